#pragma once

#include "gpid/sim/model.hpp"
#include "gpid/systems/ipc.hpp"

namespace gpid::sim {

/// State: theta, omega, x, v. Integrator: o_I.
class IpcModel : public Model {
 public:
  explicit IpcModel(const Scenario& sc) {
    const Reader root = sc.reader();
    const Reader n = root.child("nominal");
    nominal_.M_cart = n.num("cart_mass_kg");
    nominal_.m_pend = n.num("pendulum_mass_kg");
    nominal_.L = n.num("pendulum_length_m");
    nominal_.I_p = n.num("pendulum_inertia_kgm2");
    nominal_.g = n.num("g_m_s2", ipc::kGravity);
    nominal_.beta = deg(n.num("beta_deg"));

    const auto mm = root.child_opt("mismatch");
    plant_ = nominal_;
    plant_.M_cart *= factor(mm, "cart_mass", 1.5);
    plant_.m_pend *= factor(mm, "pendulum_mass", 1.5);
    plant_.I_p *= factor(mm, "pendulum_inertia", 1.5);
    plant_.L *= factor(mm, "pendulum_length", 1.0);
    plant_.g *= factor(mm, "g", 1.0);
    if (auto inc = root.child_opt("incline")) plant_.beta = deg(inc->num("beta_true_deg"));
    try {
      nominal_.validate();
      plant_.validate();
    } catch (const InvalidArgumentError& e) {
      throw ScenarioError(e.what());
    }

    const Reader c = root.child("controller");
    const std::string fm = c.str("force_map");
    if (fm == "displayed") {
      map_ = ipc::ForceMap::displayed;
    } else if (fm == "inverse") {
      map_ = ipc::ForceMap::inverse;
    } else {
      throw ScenarioError("controller.force_map must be 'displayed' or 'inverse'");
    }

    const Reader init = root.child("initial");
    x0_ = VecX(4);
    x0_ << deg(init.num("theta_deg")), init.num("omega_rad_s", 0.0), init.num("x_m", 0.0), init.num("v_m_s", 0.0);

    const Reader g = root.child("gains");
    if (g.has("kcp")) {
      g.num("kcp");
      warn("gains.kcp has no slot in the IPC control law and is ignored");
    }
    parse_gains(g, {"kcd"});
    parse_monitors(root.child("monitors"));
    finalize_gains();
  }

  VecX initial_state() const override { return x0_; }
  VecX initial_integrator() const override { return VecX::Zero(1); }

  ipc::ControlOutput law(const VecX& x, const VecX& xi) const {
    return ipc::controller(x(0), x(1), x(3), xi(0), false, gains_, nominal_, map_);
  }

  ControlSample control(double, const VecX& x, const VecX& xi) const override {
    ControlSample s;
    s.u = VecX::Constant(1, law(x, xi).f);
    return s;
  }
  VecX integrator_rate(double, const VecX& x, const VecX& xi) const override {
    return VecX::Constant(1, law(x, xi).do_I);
  }
  VecX plant_rhs(double, const VecX& x, const VecX& u) const override {
    const ipc::Derivative d = ipc::dynamics(x(0), x(1), x(2), x(3), u(0), plant_);
    VecX dx(4);
    dx << d.dtheta, d.domega, d.dx, d.dv;
    return dx;
  }

  std::vector<std::string> columns() const override {
    return {"theta_rad", "omega_rad_s", "x_m", "v_m_s", "tilt_err_rad", "eta_e", "o_I", "force_N"};
  }
  void trace_row(double, const VecX& x, const VecX& xi, const ControlSample& c,
                 std::vector<double>& row) const override {
    row.insert(row.end(), {x(0), x(1), x(2), x(3), x(0) + plant_.beta, std::sin(x(0) + nominal_.beta) /
                                                                           nominal_.inertia(x(0)),
                           xi(0), c.u(0)});
  }

  std::string error_metric_name() const override { return "|theta + beta|"; }
  double error_metric(double, const VecX& x) const override { return std::abs(x(0) + plant_.beta); }
  double velocity_magnitude(const VecX& x) const override { return std::abs(x(3)); }

  std::optional<MorseProbe> morse_probe() const override {
    // region where the input map cos(theta) stays away from zero
    return circle_cosine_probe(nominal_.metric(), nominal_.beta, -deg(80.0), deg(80.0));
  }

  const ipc::Params& nominal() const { return nominal_; }
  const ipc::Params& plant() const { return plant_; }

 private:
  ipc::Params nominal_, plant_;
  ipc::ForceMap map_ = ipc::ForceMap::displayed;
  VecX x0_;
};

}  // namespace gpid::sim
