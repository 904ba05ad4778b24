#pragma once

// Inertially asymmetric sphere rolling without slip on an incline, driven by
// one internal cart mechanism. All velocities are spatial (right-trivialized).

#include <cmath>

#include "gpid/geometry.hpp"
#include "gpid/pid.hpp"

namespace gpid::sphere {

inline constexpr double kGravity = 9.81;

struct Params {
  double m_b = 0.0;                ///< shell mass, kg
  Mat3 I_b = Mat3::Identity();     ///< shell inertia in the body frame, kg m^2
  double r = 0.0;                  ///< m
  double m_i = 0.0;                ///< cart mass, kg
  Mat3 I_i = Mat3::Identity();     ///< cart inertia in its own frame, kg m^2
  double l = 0.0;                  ///< sphere centre to cart CoM, m
  double beta = 0.0;               ///< incline about e1, rad
  double g = kGravity;

  Mat3 I_s() const {
    Mat3 m = Mat3::Zero();
    m(0, 0) = m(1, 1) = (m_b + m_i) * r * r;
    return m;
  }
  Mat3 I_V() const {
    const Mat3 e3h = hat(Vec3::UnitZ());
    return I_i - m_i * l * l * e3h * e3h;
  }
  Mat3 I_Vt() const {
    const Mat3 e3h = hat(Vec3::UnitZ());
    return -r * r * m_i * m_i * l * l * e3h * I_V().inverse() * e3h;
  }

  void validate() const {
    if (!(m_b > 0.0) || !(m_i > 0.0) || !(r > 0.0) || !(l > 0.0)) {
      throw InvalidArgumentError("sphere: masses, r and l must be positive");
    }
    for (const Mat3* m : {&I_b, &I_i}) {
      if ((*m - m->transpose()).norm() > 1e-12) throw InvalidArgumentError("sphere: inertia must be symmetric");
      Eigen::SelfAdjointEigenSolver<Mat3> es(*m);
      if (!(es.eigenvalues().minCoeff() > 0.0)) throw InvalidArgumentError("sphere: inertia must be positive definite");
    }
  }
};

/// Unit vertical in the incline frame (gravity acts along -e_g).
inline Vec3 e_g(double beta) { return {0.0, std::sin(beta), std::cos(beta)}; }

/// arcsin(m_i l / ((m_b + m_i) r)).
inline double beta_max(const Params& p) { return std::asin(p.m_i * p.l / ((p.m_b + p.m_i) * p.r)); }

inline Mat3 B(const Mat3& R_i, const Params& p) {
  const Mat3 e3h = hat(Vec3::UnitZ());
  return p.m_i * p.r * p.l * e3h * R_i * e3h * p.I_V().inverse() * R_i.transpose() + Mat3::Identity();
}

inline Vec3 tau_v(const Mat3& R_i, const Vec3& omega_i, const Params& p) {
  const Mat3 e3h = hat(Vec3::UnitZ());
  const Mat3 iv = p.I_V();
  const Mat3 wh = hat(omega_i);
  const Vec3 a = p.m_i * p.r * p.l * e3h * R_i * e3h * iv.inverse() * R_i.transpose() * wh *
                 (R_i * iv * R_i.transpose()) * omega_i;
  const Vec3 b = p.m_i * p.r * p.l * e3h * wh * wh * R_i * Vec3::UnitZ();
  return a + b;
}

inline Vec3 tau_g(const Mat3& R_i, const Params& p) {
  const Vec3 e3 = Vec3::UnitZ();
  const Vec3 eg = e_g(p.beta);
  const Mat3 ivt = R_i * p.I_Vt() * R_i.transpose();
  return -p.r * (p.m_b + p.m_i) * p.g * e3.cross(eg) + (p.g / p.r) * e3.cross(ivt * eg);
}

/// I_b^R + I_s + hat(e3) I_Vt^{R_i} hat(e3).
inline Mat3 mass_operator(const Mat3& R, const Mat3& R_i, const Params& p) {
  const Mat3 e3h = hat(Vec3::UnitZ());
  return R * p.I_b * R.transpose() + p.I_s() + e3h * (R_i * p.I_Vt() * R_i.transpose()) * e3h;
}

struct State {
  Mat3 R = Mat3::Identity();
  Vec3 o = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  Mat3 R_i = Mat3::Identity();
  Vec3 omega_i = Vec3::Zero();
};

struct Derivative {
  Mat3 dR;
  Vec3 dO;
  Vec3 domega;
  Mat3 dR_i;
  Vec3 domega_i;
};

/// Sphere and cart accelerations from the stacked 6x6 system
///   M w' = (I_b^R w) x w + B tau_u + tau_v + tau_g + delta
///   m_i r l R_i e3 x (e3 x w') + I_V^{R_i} w_i' = (I_V^{R_i} w_i) x w_i + m_i g l R_i e3 x e_g - tau_u.
inline Derivative dynamics(const State& s, const Vec3& tau_u, const Vec3& delta, const Params& p) {
  const Vec3 e3 = Vec3::UnitZ();
  const Mat3 ib = s.R * p.I_b * s.R.transpose();
  const Mat3 ivr = s.R_i * p.I_V() * s.R_i.transpose();
  const Vec3 ri_e3 = s.R_i * e3;
  Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Zero();
  a.topLeftCorner<3, 3>() = mass_operator(s.R, s.R_i, p);
  a.bottomLeftCorner<3, 3>() = p.m_i * p.r * p.l * hat(ri_e3) * hat(e3);
  a.bottomRightCorner<3, 3>() = ivr;
  Eigen::Matrix<double, 6, 1> rhs;
  rhs.head<3>() = (ib * s.omega).cross(s.omega) + B(s.R_i, p) * tau_u + tau_v(s.R_i, s.omega_i, p) + tau_g(s.R_i, p) + delta;
  rhs.tail<3>() = (ivr * s.omega_i).cross(s.omega_i) + p.m_i * p.g * p.l * ri_e3.cross(e_g(p.beta)) - tau_u;
  Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(a);
  if (!lu.isInvertible()) throw SingularityError("sphere: mass operator is singular");
  const Eigen::Matrix<double, 6, 1> acc = lu.solve(rhs);
  return {hat(s.omega) * s.R, p.r * s.omega.cross(e3), acc.head<3>(), hat(s.omega_i) * s.R_i, acc.tail<3>()};
}

/// Planar reference for the sphere centre with its first two derivatives.
struct Reference {
  Vec3 o;    ///< e3 component equals r
  Vec3 do_;  ///< planar
  Vec3 ddo;  ///< planar
};

/// Spatial angular velocity and acceleration whose rolling motion realizes the reference.
inline std::pair<Vec3, Vec3> reference_rates(const Reference& ref, double r) {
  return {Vec3(-ref.do_.y() / r, ref.do_.x() / r, 0.0), Vec3(-ref.ddo.y() / r, ref.ddo.x() / r, 0.0)};
}

enum class GravityShaping {
  e3,          ///< shaping term evaluated with e3
  nominal_eg,  ///< shaping term evaluated with e_g(beta_nominal)
};

struct ControlOutput {
  Vec3 tau_u;
  Vec3 do_I;
  Vec3 o_e;
  Vec3 omega_e;
};

/// Split-metric PID law. Gradients satisfy I_nu eta^nu = hat(e3) o_e for the shell
/// and rolling metrics and I_Vt eta^Vt = o_e for the cart metric.
inline ControlOutput controller(const State& s, const Reference& ref, const Vec3& o_I, bool windup_frozen,
                                const GainSet& gains, const Params& nominal, GravityShaping shaping) {
  const Params& p = nominal;
  const Vec3 e3 = Vec3::UnitZ();
  const Mat3 e3h = hat(e3);
  const auto [w_ref, dw_ref] = reference_rates(ref, p.r);
  Vec3 o_e = s.o - ref.o;
  o_e.z() = 0.0;
  const Vec3 w_e = s.omega - w_ref;

  const Mat3 ia = s.R * p.I_b * s.R.transpose();
  const Mat3 is = p.I_s();
  const Mat3 ivt = s.R_i * p.I_Vt() * s.R_i.transpose();
  const Mat3 mt = mass_operator(s.R, s.R_i, p);

  const Vec3 x = e3.cross(w_e);
  const Vec3 t_vt = -0.5 * e3.cross(ivt * s.omega_i.cross(x) + (ivt * s.omega_i).cross(x) + (ivt * x).cross(s.omega_i));
  const Vec3 t_ref = mt * dw_ref - (ia * w_ref).cross(w_e) - (ia * w_e).cross(w_ref) - (ia * w_ref).cross(w_ref);
  const Vec3 dir = shaping == GravityShaping::e3 ? e3 : e_g(p.beta);
  const Vec3 t_shape = (p.g / p.r) * e3.cross(ivt * dir);
  const Vec3 dV = e3h * o_e;
  const Vec3 pid = 3.0 * gains.kp * dV + mt * (gains.kd * w_e + gains.kI * o_I);

  const Vec3 inner = tau_v(s.R_i, s.omega_i, p) + t_vt + (is * w_e).cross(w_e) - t_ref + t_shape + pid;
  const Mat3 b = B(s.R_i, p);
  Eigen::FullPivLU<Mat3> lu(b);
  if (!lu.isInvertible()) throw SingularityError("sphere controller: B is singular");
  const Vec3 tau = -lu.solve(inner) + (s.R_i * p.I_V() * s.R_i.transpose()) * (gains.kc * s.omega_i);

  Vec3 doi = Vec3::Zero();
  if (!windup_frozen) {
    const auto R = Chirality::right;
    const AlgebraElement we = AlgebraElement::so3(w_e, R);
    const AlgebraElement oi = AlgebraElement::so3(o_I, R);
    const Vec3 q_s = connection_quadratic_lower(InertiaMetric::constant(is, Invariance::right), we, oi).vec3();
    const Vec3 q_a = connection_quadratic_lower(InertiaMetric::constant(ia, Invariance::left), we, oi).vec3();
    const Vec3 q_v = connection_quadratic_lower(InertiaMetric::constant(ivt, Invariance::left),
                                                AlgebraElement::so3(s.omega_i, R), AlgebraElement::so3(e3h * o_I, R))
                         .vec3();
    doi = mt.lu().solve(3.0 * dV - q_s - q_a - e3.cross(q_v));
  }
  return {tau, doi, o_e, w_e};
}

}  // namespace gpid::sphere
