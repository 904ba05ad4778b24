#pragma once

#include <array>

#include "gpid/sim/model.hpp"
#include "gpid/systems/sphere.hpp"

namespace gpid::sim {

/// Planar centre reference: fixed point, circle, or line plus sinusoid.
struct PlanarReference {
  enum class Type { fixed, circle, sinusoid } type = Type::fixed;
  Eigen::Vector2d p0 = Eigen::Vector2d::Zero();  ///< point, circle centre or line start
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  Eigen::Vector2d amp = Eigen::Vector2d::Zero();
  double radius = 0.0, rate = 0.0;

  /// Position, velocity, acceleration in the plane.
  std::array<Eigen::Vector2d, 3> eval(double t) const {
    switch (type) {
      case Type::fixed:
        return {p0, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
      case Type::circle: {
        const double c = std::cos(rate * t), s = std::sin(rate * t);
        return {p0 + radius * Eigen::Vector2d(c, s), radius * rate * Eigen::Vector2d(-s, c),
                -radius * rate * rate * Eigen::Vector2d(c, s)};
      }
      case Type::sinusoid:
      default: {
        const double c = std::cos(rate * t), s = std::sin(rate * t);
        return {p0 + v * t + amp * s, v + amp * (rate * c), -amp * (rate * rate * s)};
      }
    }
  }

  static Eigen::Vector2d vec2(const Reader& r, const std::string& key) {
    const auto l = r.list(key, 2);
    return {l[0], l[1]};
  }

  static PlanarReference parse(const Reader& r) {
    PlanarReference ref;
    const std::string type = r.str("type");
    if (type == "fixed") {
      ref.p0 = vec2(r, "point_m");
    } else if (type == "circle") {
      ref.type = Type::circle;
      ref.p0 = vec2(r, "center_m");
      ref.radius = r.num("radius_m");
      ref.rate = r.num("rate_rad_s");
    } else if (type == "sinusoid") {
      ref.type = Type::sinusoid;
      ref.p0 = vec2(r, "start_m");
      ref.v = vec2(r, "velocity_m_s");
      ref.amp = vec2(r, "amplitude_m");
      ref.rate = r.num("frequency_rad_s");
    } else {
      throw ScenarioError(r.path() + ".type must be fixed, circle or sinusoid");
    }
    return ref;
  }
};

/// State: R (9), o (3), omega (3), R_i (9), omega_i (3), phi = integral of omega (3).
/// Integrator: o_I (3).
class SphereModel : public Model {
 public:
  explicit SphereModel(const Scenario& sc) {
    const Reader root = sc.reader();
    const Reader n = root.child("nominal");
    nominal_.m_b = n.num("shell_mass_kg");
    nominal_.I_b = n.vec3("shell_inertia_diag_kgm2").asDiagonal();
    nominal_.r = n.num("shell_radius_m");
    nominal_.m_i = n.num("cart_mass_kg");
    nominal_.I_i = n.vec3("cart_inertia_diag_kgm2").asDiagonal();
    nominal_.l = n.num("cart_offset_m");
    nominal_.g = n.num("g_m_s2", sphere::kGravity);

    const auto mm = root.child_opt("mismatch");
    plant_ = nominal_;
    plant_.m_b *= factor(mm, "shell_mass", 1.5);
    plant_.I_b *= factor(mm, "shell_inertia", 1.5);
    plant_.m_i *= factor(mm, "cart_mass", 1.5);
    plant_.I_i *= factor(mm, "cart_inertia", 1.5);
    plant_.r *= factor(mm, "shell_radius", 1.0);
    plant_.l *= factor(mm, "cart_offset", 1.0);
    plant_.g *= factor(mm, "g", 1.0);
    const Reader inc = root.child("incline");
    plant_.beta = deg(inc.num("beta_true_deg"));
    nominal_.beta = deg(inc.num("beta_nominal_deg"));
    try {
      nominal_.validate();
      plant_.validate();
    } catch (const InvalidArgumentError& e) {
      throw ScenarioError(e.what());
    }
    if (std::abs(plant_.beta) >= sphere::beta_max(plant_)) {
      throw ScenarioError("incline.beta_true_deg exceeds the largest incline the cart can hold");
    }

    const Reader c = root.child("controller");
    const std::string shaping = c.str("gravity_shaping");
    if (shaping == "e3") {
      shaping_ = sphere::GravityShaping::e3;
    } else if (shaping == "nominal_eg") {
      shaping_ = sphere::GravityShaping::nominal_eg;
    } else {
      throw ScenarioError("controller.gravity_shaping must be 'e3' or 'nominal_eg'");
    }

    ref_ = PlanarReference::parse(root.child("reference"));
    const Reader init = root.child("initial");
    const auto o = init.list("o_m", 2);
    x0_ = VecX::Zero(30);
    Eigen::Map<Mat3>(x0_.data()) = exp_so3(init.vec3("rotvec_rad", Vec3::Zero())).matrix();
    x0_.segment<3>(9) = Vec3(o[0], o[1], plant_.r);
    x0_.segment<3>(12) = init.vec3("omega_rad_s", Vec3::Zero());
    Eigen::Map<Mat3>(x0_.data() + 15) = exp_so3(init.vec3("cart_rotvec_rad", Vec3::Zero())).matrix();
    x0_.segment<3>(24) = init.vec3("cart_omega_rad_s", Vec3::Zero());

    parse_gains(root.child("gains"), {"kcd"});
    parse_monitors(root.child("monitors"));
    finalize_gains();
  }

  VecX initial_state() const override { return x0_; }
  VecX initial_integrator() const override { return VecX::Zero(3); }
  std::vector<Eigen::Index> rotation_blocks() const override { return {0, 15}; }

  static sphere::State unpack(const VecX& x) {
    sphere::State s;
    s.R = Eigen::Map<const Mat3>(x.data());
    s.o = x.segment<3>(9);
    s.omega = x.segment<3>(12);
    s.R_i = Eigen::Map<const Mat3>(x.data() + 15);
    s.omega_i = x.segment<3>(24);
    return s;
  }

  sphere::Reference reference(double t) const {
    const auto e = ref_.eval(t);
    return {Vec3(e[0].x(), e[0].y(), nominal_.r), Vec3(e[1].x(), e[1].y(), 0.0), Vec3(e[2].x(), e[2].y(), 0.0)};
  }

  sphere::ControlOutput law(double t, const VecX& x, const VecX& xi) const {
    return sphere::controller(unpack(x), reference(t), xi.head<3>(), false, gains_, nominal_, shaping_);
  }

  ControlSample control(double t, const VecX& x, const VecX& xi) const override {
    ControlSample s;
    s.u = law(t, x, xi).tau_u;
    return s;
  }
  VecX integrator_rate(double t, const VecX& x, const VecX& xi) const override { return law(t, x, xi).do_I; }

  VecX plant_rhs(double, const VecX& x, const VecX& u) const override {
    const sphere::Derivative d = sphere::dynamics(unpack(x), u.head<3>(), Vec3::Zero(), plant_);
    VecX dx(30);
    Eigen::Map<Mat3>(dx.data()) = d.dR;
    dx.segment<3>(9) = d.dO;
    dx.segment<3>(12) = d.domega;
    Eigen::Map<Mat3>(dx.data() + 15) = d.dR_i;
    dx.segment<3>(24) = d.domega_i;
    dx.segment<3>(27) = x.segment<3>(12);
    return dx;
  }

  std::vector<std::string> columns() const override {
    return {"o_x_m",       "o_y_m",       "o_ref_x_m",   "o_ref_y_m",   "o_err_x_m",   "o_err_y_m",
            "planar_err_m", "omega_x",    "omega_y",     "omega_z",     "omega_e_x",   "omega_e_y",
            "omega_e_z",   "omega_i_x",   "omega_i_y",   "omega_i_z",   "o_I_x",       "o_I_y",
            "o_I_z",       "tau_x",       "tau_y",       "tau_z",       "roll_residual_m", "height_residual_m"};
  }
  void trace_row(double t, const VecX& x, const VecX& xi, const ControlSample& c,
                 std::vector<double>& row) const override {
    const sphere::Reference ref = reference(t);
    const Vec3 o = x.segment<3>(9);
    const Vec3 w_ref = sphere::reference_rates(ref, nominal_.r).first;
    const Vec3 w_e = x.segment<3>(12) - w_ref;
    row.insert(row.end(), {o.x(), o.y(), ref.o.x(), ref.o.y(), o.x() - ref.o.x(), o.y() - ref.o.y(),
                           error_metric(t, x)});
    for (int i = 0; i < 3; ++i) row.push_back(x(12 + i));
    for (int i = 0; i < 3; ++i) row.push_back(w_e(i));
    for (int i = 0; i < 3; ++i) row.push_back(x(24 + i));
    for (int i = 0; i < 3; ++i) row.push_back(xi(i));
    for (int i = 0; i < 3; ++i) row.push_back(c.u(i));
    row.push_back(roll_residual(x));
    row.push_back(x(11) - plant_.r);
  }

  std::string error_metric_name() const override { return "planar |o - o_ref|"; }
  double error_metric(double t, const VecX& x) const override {
    const sphere::Reference ref = reference(t);
    return (x.segment<2>(9) - ref.o.head<2>()).norm();
  }
  double velocity_magnitude(const VecX& x) const override { return plant_.r * x.segment<2>(12).norm(); }

  /// Rolling without slip integrated: o(t) - o(0) = r phi(t) x e3.
  double roll_residual(const VecX& x) const {
    const Vec3 d = x.segment<3>(9) - x0_.segment<3>(9) - plant_.r * Vec3(x.segment<3>(27)).cross(Vec3::UnitZ());
    return d.norm();
  }
  void invariants(double, const VecX& x, std::vector<Invariant>& out) const override {
    out.push_back({"no_slip", roll_residual(x), monitors_.invariant_tol});
    out.push_back({"contact_height", std::abs(x(11) - plant_.r), monitors_.invariant_tol});
    out.push_back({"orthonormality_R", orthonormality_error(Eigen::Map<const Mat3>(x.data())), 1e-9});
    out.push_back({"orthonormality_R_i", orthonormality_error(Eigen::Map<const Mat3>(x.data() + 15)), 1e-9});
  }

  const sphere::Params& nominal() const { return nominal_; }
  const sphere::Params& plant() const { return plant_; }

 private:
  sphere::Params nominal_, plant_;
  sphere::GravityShaping shaping_ = sphere::GravityShaping::e3;
  PlanarReference ref_;
  VecX x0_;
};

}  // namespace gpid::sim
