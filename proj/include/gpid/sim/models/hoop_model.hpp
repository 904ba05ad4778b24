#pragma once

#include "gpid/sim/model.hpp"
#include "gpid/systems/hoop.hpp"

namespace gpid::sim {

/// Position reference o_ref(t) = start + v t + A sin(w t).
struct LineReference {
  double start = 0.0, velocity = 0.0, amplitude = 0.0, frequency = 0.0;

  double o(double t) const { return start + velocity * t + amplitude * std::sin(frequency * t); }
  double rate(double t) const { return velocity + amplitude * frequency * std::cos(frequency * t); }

  static LineReference parse(const Reader& r) {
    LineReference ref;
    const std::string type = r.str("type");
    ref.start = r.num("start_m");
    if (type == "fixed") return ref;
    ref.velocity = r.num("velocity_m_s");
    if (type == "linear") return ref;
    if (type != "sinusoid") throw ScenarioError(r.path() + ".type must be fixed, linear or sinusoid");
    ref.amplitude = r.num("amplitude_m");
    ref.frequency = r.num("frequency_rad_s");
    return ref;
  }
};

/// State: theta, o, omega, theta_a, omega_a. Integrator: o_I.
class HoopModel : public Model {
 public:
  explicit HoopModel(const Scenario& sc) {
    const Reader root = sc.reader();
    const Reader n = root.child("nominal");
    nominal_.m_h = n.num("hoop_mass_kg");
    nominal_.I_h = n.num("hoop_inertia_kgm2");
    nominal_.r = n.num("hoop_radius_m");
    nominal_.m_a = n.num("actuator_mass_kg");
    nominal_.I_a = n.num("actuator_inertia_kgm2");
    nominal_.l = n.num("actuator_arm_m");
    nominal_.g = n.num("g_m_s2", hoop::kGravity);
    nominal_.beta = 0.0;

    const auto mm = root.child_opt("mismatch");
    plant_ = nominal_;
    plant_.m_h *= factor(mm, "hoop_mass", 1.5);
    plant_.I_h *= factor(mm, "hoop_inertia", 1.5);
    plant_.m_a *= factor(mm, "actuator_mass", 1.5);
    plant_.I_a *= factor(mm, "actuator_inertia", 1.5);
    plant_.r *= factor(mm, "hoop_radius", 1.0);
    plant_.l *= factor(mm, "actuator_arm", 1.0);
    plant_.g *= factor(mm, "g", 1.0);
    plant_.beta = deg(root.child("incline").num("beta_true_deg"));
    try {
      nominal_.validate();
      plant_.validate();
    } catch (const InvalidArgumentError& e) {
      throw ScenarioError(e.what());
    }
    const double bmax = hoop::beta_max(plant_);
    if (std::isfinite(bmax) && std::abs(plant_.beta) >= bmax) {
      throw ScenarioError("incline.beta_true_deg exceeds the largest incline the actuator can hold");
    }

    ref_ = LineReference::parse(root.child("reference"));
    const Reader init = root.child("initial");
    x0_ = VecX(5);
    x0_ << init.num("theta_rad", 0.0), init.num("o_m"), init.num("omega_rad_s", 0.0), init.num("theta_a_rad", 0.0),
        init.num("omega_a_rad_s", 0.0);

    parse_gains(root.child("gains"));
    parse_monitors(root.child("monitors"));
    finalize_gains();
  }

  VecX initial_state() const override { return x0_; }
  VecX initial_integrator() const override { return VecX::Zero(1); }

  static hoop::State unpack(const VecX& x) { return {x(0), x(1), x(2), x(3), x(4)}; }

  double o_err(double t, const VecX& x) const { return x(1) - ref_.o(t); }
  double omega_err(double t, const VecX& x) const { return x(2) + ref_.rate(t) / nominal_.r; }

  hoop::ControlOutput law(double t, const VecX& x, const VecX& xi) const {
    return hoop::controller(o_err(t, x), omega_err(t, x), x(4), x(3), xi(0), false, gains_, nominal_);
  }

  ControlSample control(double t, const VecX& x, const VecX& xi) const override {
    ControlSample s;
    s.u = VecX::Constant(1, law(t, x, xi).tau_total);
    return s;
  }
  VecX integrator_rate(double t, const VecX& x, const VecX& xi) const override {
    return VecX::Constant(1, law(t, x, xi).do_I);
  }
  VecX plant_rhs(double, const VecX& x, const VecX& u) const override {
    const hoop::Derivative d = hoop::dynamics(unpack(x), u(0), plant_);
    VecX dx(5);
    dx << d.dtheta, d.dO, d.domega, d.dtheta_a, d.domega_a;
    return dx;
  }

  std::vector<std::string> columns() const override {
    return {"theta_rad", "o_m",     "omega_rad_s", "theta_a_rad", "omega_a_rad_s", "o_ref_m",
            "o_err_m",   "omega_e_rad_s", "o_I", "tau_N_m",    "roll_residual_m"};
  }
  void trace_row(double t, const VecX& x, const VecX& xi, const ControlSample& c,
                 std::vector<double>& row) const override {
    row.insert(row.end(), {x(0), x(1), x(2), x(3), x(4), ref_.o(t), o_err(t, x), omega_err(t, x), xi(0), c.u(0),
                           roll_residual(x)});
  }

  std::string error_metric_name() const override { return "|o - o_ref|"; }
  double error_metric(double t, const VecX& x) const override { return std::abs(o_err(t, x)); }
  double velocity_magnitude(const VecX& x) const override { return std::abs(x(2)); }

  /// Rolling without slip: o + r theta is conserved.
  double roll_residual(const VecX& x) const {
    return (x(1) + plant_.r * x(0)) - (x0_(1) + plant_.r * x0_(0));
  }
  void invariants(double, const VecX& x, std::vector<Invariant>& out) const override {
    out.push_back({"rolling_constraint", std::abs(roll_residual(x)), monitors_.invariant_tol});
  }

  std::optional<MorseProbe> morse_probe() const override {
    // V = o_e^2 / 2 on a +-1 m window with the hoop metric at theta_a = 0
    return quadratic_probe(MatX::Identity(1, 1), MatX::Constant(1, 1, nominal_.inertia(0.0)), 1.0);
  }

  const hoop::Params& nominal() const { return nominal_; }
  const hoop::Params& plant() const { return plant_; }

 private:
  hoop::Params nominal_, plant_;
  LineReference ref_;
  VecX x0_;
};

}  // namespace gpid::sim
