#pragma once

#include "gpid/sim/model.hpp"
#include "gpid/systems/pendulum.hpp"

namespace gpid::sim {

/// State: R (9), Omega (3) with Omega_3 = 0. Integrator: Omega_I (3).
class PendulumModel : public Model {
 public:
  explicit PendulumModel(const Scenario& sc) {
    const Reader root = sc.reader();
    const Reader n = root.child("nominal");
    nominal_.M = n.num("mass_kg");
    nominal_.l = n.num("length_m");
    nominal_.g = n.num("g_m_s2");
    nominal_.inertia = n.vec3("inertia_diag_kgm2").asDiagonal();

    const auto mm = root.child_opt("mismatch");
    plant_ = nominal_;
    plant_.M *= factor(mm, "mass", 1.5);
    plant_.inertia *= factor(mm, "inertia", 1.5);
    plant_.l *= factor(mm, "length", 1.0);
    plant_.g *= factor(mm, "g", 1.0);
    try {
      nominal_.validate();
      plant_.validate();
    } catch (const InvalidArgumentError& e) {
      throw ScenarioError(e.what());
    }

    const Reader init = root.child("initial");
    R0_ = exp_so3(init.vec3("rotvec_rad")).matrix();
    Omega0_ = init.vec3("omega_rad_s", Vec3::Zero());
    if (Omega0_.z() != 0.0) throw ScenarioError("initial.omega_rad_s must have a zero third component");

    parse_gains(root.child("gains"));
    parse_monitors(root.child("monitors"));
    finalize_gains();
  }

  VecX initial_state() const override {
    VecX x(12);
    Eigen::Map<Mat3>(x.data()) = R0_;
    x.segment<3>(9) = Omega0_;
    return x;
  }
  VecX initial_integrator() const override { return VecX::Zero(3); }
  std::vector<Eigen::Index> rotation_blocks() const override { return {0}; }

  pendulum::ControlOutput law(const VecX& x, const VecX& xi) const {
    return pendulum::controller(R(x), x.segment<3>(9), xi.head<3>(), false, gains_, nominal_);
  }

  ControlSample control(double, const VecX& x, const VecX& xi) const override {
    ControlSample s;
    s.u = law(x, xi).tau_u;
    return s;
  }
  VecX integrator_rate(double, const VecX& x, const VecX& xi) const override { return law(x, xi).dOmega_I; }
  VecX plant_rhs(double, const VecX& x, const VecX& u) const override {
    const pendulum::Derivative d = pendulum::dynamics(R(x), x.segment<3>(9), u.head<3>(), plant_);
    VecX dx(12);
    Eigen::Map<Mat3>(dx.data()) = d.dR;
    dx.segment<3>(9) = d.dOmega;
    return dx;
  }

  std::vector<std::string> columns() const override {
    return {"V_y", "tilt_rad", "Omega_x", "Omega_y", "Omega_z", "Omega_I_x", "Omega_I_y", "Omega_I_z",
            "tau_x", "tau_y", "tau_z", "y_x", "y_y", "y_z"};
  }
  void trace_row(double, const VecX& x, const VecX& xi, const ControlSample& c,
                 std::vector<double>& row) const override {
    const Vec3 y = R(x).col(2);
    row.push_back(pendulum::morse_V(R(x)));
    row.push_back(std::atan2(y.head<2>().norm(), y.z()));
    for (int i = 0; i < 3; ++i) row.push_back(x(9 + i));
    for (int i = 0; i < 3; ++i) row.push_back(xi(i));
    for (int i = 0; i < 3; ++i) row.push_back(c.u(i));
    for (int i = 0; i < 3; ++i) row.push_back(y(i));
  }

  std::string error_metric_name() const override { return "V(y)"; }
  double error_metric(double, const VecX& x) const override { return pendulum::morse_V(R(x)); }
  double velocity_magnitude(const VecX& x) const override { return x.segment<3>(9).norm(); }

  void invariants(double, const VecX& x, std::vector<Invariant>& out) const override {
    out.push_back({"Omega_3", std::abs(x(11)), 1e-9});
    out.push_back({"orthonormality_R", orthonormality_error(R(x)), 1e-9});
  }

  std::optional<MorseProbe> morse_probe() const override { return pendulum_probe(nominal_.inertia); }

  const pendulum::Params& nominal() const { return nominal_; }
  const pendulum::Params& plant() const { return plant_; }

 private:
  static Mat3 R(const VecX& x) { return Eigen::Map<const Mat3>(x.data()); }

  pendulum::Params nominal_, plant_;
  Mat3 R0_ = Mat3::Identity();
  Vec3 Omega0_ = Vec3::Zero();
};

}  // namespace gpid::sim
