#pragma once

#include "gpid/sim/model.hpp"
#include "gpid/systems/quadrotor.hpp"

namespace gpid::sim {

/// State: R (9, column-major), Omega (3). Integrator: Omega_I (3).
class QuadrotorModel : public Model {
 public:
  explicit QuadrotorModel(const Scenario& sc) {
    const Reader root = sc.reader();
    const Reader n = root.child("nominal");
    nominal_.M = n.num("mass_kg");
    nominal_.inertia = n.vec3("inertia_diag_kgm2").asDiagonal();
    nominal_.l_arm = n.num("arm_m");
    nominal_.c_l.fill(n.num("c_l_N_per_rpm2"));
    nominal_.c_d.fill(n.num("c_d_Nm_per_rpm2"));
    nominal_.motor_min = n.num("motor_min_rpm");
    nominal_.motor_max = n.num("motor_max_rpm");
    plant_ = nominal_;
    if (auto t = root.child_opt("true")) {
      plant_.M = t->num("mass_kg", nominal_.M);
      if (t->has("inertia_diag_kgm2")) plant_.inertia = t->vec3("inertia_diag_kgm2").asDiagonal();
      plant_.l_arm = t->num("arm_m", nominal_.l_arm);
      if (t->has("c_l_factors")) {
        const auto f = t->list("c_l_factors", 4);
        for (int i = 0; i < 4; ++i) plant_.c_l[i] = nominal_.c_l[i] * f[i];
      }
      if (t->has("c_d_factors")) {
        const auto f = t->list("c_d_factors", 4);
        for (int i = 0; i < 4; ++i) plant_.c_d[i] = nominal_.c_d[i] * f[i];
      }
    }
    try {
      nominal_.validate();
      plant_.validate();
    } catch (const InvalidArgumentError& e) {
      throw ScenarioError(e.what());
    }

    const Reader c = root.child("controller");
    const std::string grad = c.str("gradient");
    if (grad == "weighted") {
      weighting_ = MorseWeighting::weighted(nominal_.inertia);
    } else if (grad == "plain") {
      weighting_ = MorseWeighting::plain();
    } else {
      throw ScenarioError("controller.gradient must be 'weighted' or 'plain'");
    }
    const std::string act = c.str("actuators");
    if (act != "motors" && act != "ideal") throw ScenarioError("controller.actuators must be 'motors' or 'ideal'");
    motors_ = act == "motors";
    thrust_ = c.num("thrust_N");

    const Reader ref = root.child("reference");
    ref_R0_ = exp_so3(ref.vec3("initial_rotvec_rad", Vec3::Zero())).matrix();
    ref_axis_ = ref.vec3("axis");
    if (!(ref_axis_.norm() > 0.0)) throw ScenarioError("reference.axis must be nonzero");
    ref_axis_.normalize();
    ref_rate_ = ref.num("rate_rad_s");

    if (auto d = root.child_opt("disturbance")) {
      delta_d_ = quadrotor::com_offset_moment(d->vec3("com_offset_kgm"), d->num("g_m_s2", 9.81));
    }
    const Reader init = root.child("initial");
    R0_ = exp_so3(init.vec3("rotvec_rad")).matrix();
    Omega0_ = init.vec3("omega_rad_s", Vec3::Zero());

    parse_gains(root.child("gains"));
    parse_monitors(root.child("monitors"));
    if (monitors_.lyap_residual && !weighting_.inertia_weighted) {
      throw ScenarioError("the Lyapunov monitor needs controller.gradient: weighted");
    }
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

  quadrotor::Reference reference(double t) const {
    return {ref_R0_ * exp_so3(ref_rate_ * t * ref_axis_).matrix(), ref_rate_ * ref_axis_, Vec3::Zero()};
  }

  quadrotor::ControlOutput law(double t, const VecX& x, const VecX& xi) const {
    return quadrotor::controller(R(x), x.segment<3>(9), reference(t), xi.head<3>(), false, gains_, nominal_,
                                 weighting_);
  }

  ControlSample control(double t, const VecX& x, const VecX& xi) const override {
    const quadrotor::ControlOutput out = law(t, x, xi);
    ControlSample s;
    if (!motors_) {
      s.u = out.tau_u;
      s.aux = VecX::Constant(4, std::numeric_limits<double>::quiet_NaN());
      return s;
    }
    const quadrotor::Allocation a = quadrotor::allocate(thrust_, out.tau_u, nominal_);
    const Eigen::Vector4d w = quadrotor::forward_map(a.speeds.array().square().matrix(), plant_);
    s.u = w.tail<3>();
    s.saturated = a.saturated;
    s.aux = a.speeds;
    return s;
  }

  VecX integrator_rate(double t, const VecX& x, const VecX& xi) const override { return law(t, x, xi).dOmega_I; }

  VecX plant_rhs(double /*t*/, const VecX& x, const VecX& u) const override {
    const Vec3 dist = plant_.inertia.ldlt().solve(delta_d_);
    const quadrotor::Derivative d = quadrotor::dynamics(R(x), x.segment<3>(9), u.head<3>(), dist, plant_);
    VecX dx(12);
    Eigen::Map<Mat3>(dx.data()) = d.dR;
    dx.segment<3>(9) = d.dOmega;
    return dx;
  }

  std::vector<std::string> columns() const override {
    return {"V",        "rot_err_rad", "Omega_x",   "Omega_y",   "Omega_z",   "Omega_e_x", "Omega_e_y",
            "Omega_e_z", "Omega_I_x",  "Omega_I_y", "Omega_I_z", "tau_x",     "tau_y",     "tau_z",
            "motor_1_rpm", "motor_2_rpm", "motor_3_rpm", "motor_4_rpm", "saturated",
            "R_11", "R_12", "R_13", "R_21", "R_22", "R_23", "R_31", "R_32", "R_33"};
  }

  void trace_row(double t, const VecX& x, const VecX& xi, const ControlSample& c,
                 std::vector<double>& row) const override {
    const quadrotor::Reference ref = reference(t);
    const Mat3 e = ref.R_r.transpose() * R(x);
    const Vec3 om = x.segment<3>(9);
    const Vec3 om_e = om - e.transpose() * ref.Omega_r;
    row.push_back((Mat3::Identity() - e).trace());
    row.push_back(log_so3(Rotation::nearest(e)).norm());
    for (int i = 0; i < 3; ++i) row.push_back(om(i));
    for (int i = 0; i < 3; ++i) row.push_back(om_e(i));
    for (int i = 0; i < 3; ++i) row.push_back(xi(i));
    for (int i = 0; i < 3; ++i) row.push_back(c.u(i));
    for (int i = 0; i < 4; ++i) row.push_back(c.aux(i));
    row.push_back(c.saturated ? 1.0 : 0.0);
    const Mat3 r = R(x);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) row.push_back(r(i, j));
  }

  std::string error_metric_name() const override { return "V(E)"; }
  double error_metric(double t, const VecX& x) const override {
    return (Mat3::Identity() - reference(t).R_r.transpose() * R(x)).trace();
  }

  void invariants(double, const VecX& x, std::vector<Invariant>& out) const override {
    out.push_back({"orthonormality_R", orthonormality_error(R(x)), 1e-9});
  }

  std::optional<LyapunovSample> lyapunov(double t, const VecX& x, const VecX& xi) const override {
    if (!gains_.has_certificate_data()) return std::nullopt;
    const quadrotor::ControlOutput out = law(t, x, xi);
    LyapunovInput in;
    in.V_s = out.V;
    in.eta_e = out.eta_E;
    in.v_s = out.Omega_e;
    in.v_I = xi.head<3>();
    in.metric_s = nominal_.inertia;
    return lyapunov_W(in, gains_);
  }

  std::optional<MorseProbe> morse_probe() const override { return so3_trace_probe(weighting_); }

  const quadrotor::Params& nominal() const { return nominal_; }
  const quadrotor::Params& plant() const { return plant_; }
  const Vec3& disturbance() const { return delta_d_; }

 private:
  static Mat3 R(const VecX& x) { return Eigen::Map<const Mat3>(x.data()); }

  quadrotor::Params nominal_, plant_;
  MorseWeighting weighting_;
  bool motors_ = true;
  double thrust_ = 0.0;
  Mat3 ref_R0_ = Mat3::Identity();
  Vec3 ref_axis_ = Vec3::UnitX();
  double ref_rate_ = 0.0;
  Vec3 delta_d_ = Vec3::Zero();
  Mat3 R0_ = Mat3::Identity();
  Vec3 Omega0_ = Vec3::Zero();
};

}  // namespace gpid::sim
