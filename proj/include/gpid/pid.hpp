#pragma once

// Error systems and the three PID families: fully actuated, underactuated
// interconnected, and constrained.

#include <cmath>
#include <limits>
#include <optional>

#include "gpid/geometry.hpp"

namespace gpid {

struct GainSet {
  double kp = 0.0;
  double kd = 0.0;
  double kI = 0.0;
  double kc = 0.0;  ///< cross/actuator damping (kc or kcd)
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();
  bool verified = false;

  bool has_certificate_data() const { return std::isfinite(kappa) && std::isfinite(mu) && std::isfinite(lambda); }
  double delta() const { return std::abs(kappa * mu - 1.0); }

  /// Basic sanity: finite, nonnegative gains; kappa in [1/mu, 2/mu) when set.
  void validate() const {
    for (double g : {kp, kd, kI, kc}) {
      if (!std::isfinite(g) || g < 0.0) throw InvalidArgumentError("gains must be finite and nonnegative");
    }
    if (std::isfinite(kappa) && std::isfinite(mu)) {
      if (!(mu > 0.0)) throw InvalidArgumentError("mu must be positive");
      const double lo = 1.0 / mu, hi = 2.0 / mu;
      if (kappa < lo * (1.0 - 1e-12) || kappa >= hi) {
        throw InvalidArgumentError("kappa = " + std::to_string(kappa) + " outside [1/mu, 2/mu) = [" +
                                   std::to_string(lo) + ", " + std::to_string(hi) + ")");
      }
    }
  }
};

struct ErrorState {
  GroupElement E;
  AlgebraElement zeta_E;
  AlgebraElement eta_r;  ///< reference velocity transported into the error frame
  AlgebraElement eta_E;  ///< gradient of the error potential (set by the caller)
  Chirality chirality;
};

struct ControllerState {
  AlgebraElement zeta_I;
  bool windup_frozen = false;
};

/// left: E = g_r^{-1} g, eta_r = Ad_{E^{-1}} zeta_r; right: E = g g_r^{-1},
/// eta_r = Ad_E zeta_r. zeta_E = zeta - eta_r. eta_E starts at zero.
inline ErrorState build_error(const GroupElement& g, const GroupElement& g_r, const AlgebraElement& zeta,
                              const AlgebraElement& zeta_r, Chirality chirality) {
  if (zeta.chirality() != chirality || zeta_r.chirality() != chirality) {
    throw ChiralityMismatchError("build_error: velocities must use the requested trivialization");
  }
  zeta.checked(zeta_r);
  const bool left = chirality == Chirality::left;
  const GroupElement e = left ? compose(group_inverse(g_r), g) : compose(g, group_inverse(g_r));
  const AlgebraElement eta_r = adjoint_Ad(left ? group_inverse(e) : e, zeta_r);
  return ErrorState{e, zeta - eta_r, eta_r, AlgebraElement::zero_like(zeta), chirality};
}

/// Time derivative of eta_r given the reference acceleration d zeta_r / dt.
inline AlgebraElement transported_reference_rate(const ErrorState& err, const AlgebraElement& dzeta_r) {
  const bool left = err.chirality == Chirality::left;
  const AlgebraElement moved = adjoint_Ad(left ? group_inverse(err.E) : err.E, dzeta_r);
  const AlgebraElement br = ad_bracket(err.zeta_E, err.eta_r);
  return left ? moved - br : moved + br;
}

/// f_r = I nabla_{zeta_E} eta_r + I nabla_{eta_r} zeta_E + I nabla_{eta_r} eta_r,
/// with the time derivative of eta_r carried by the last term.
inline Covector feedforward_fr(const ErrorState& err, const InertiaMetric& metric, const AlgebraElement& d_eta_r) {
  const AlgebraElement z = AlgebraElement::zero_like(err.eta_r);
  return lower_connection(metric, err.zeta_E, err.eta_r, z) + lower_connection(metric, err.eta_r, err.zeta_E, z) +
         lower_connection(metric, err.eta_r, err.eta_r, d_eta_r);
}

struct MorseSample {
  double V = 0.0;
  AlgebraElement eta;
};

/// Gradient choice for V(E) = trace(I - E) on SO(3).
struct MorseWeighting {
  bool inertia_weighted = false;
  Mat3 inertia = Mat3::Identity();

  static MorseWeighting plain() { return {}; }
  static MorseWeighting weighted(const Mat3& i) { return {true, i}; }
};

/// plain: hat(eta) = E - E^T; weighted: hat(eta) = I (E - E^T) I / det(I).
inline MorseSample morse_grad_so3(const Rotation& e, const MorseWeighting& w,
                                  Chirality chirality = Chirality::left) {
  const Mat3& m = e.matrix();
  const Mat3 s = m - m.transpose();
  const Mat3 h = w.inertia_weighted ? Mat3(w.inertia * s * w.inertia / w.inertia.determinant()) : s;
  return {(Mat3::Identity() - m).trace(), AlgebraElement::so3(vee_skew_part(h), chirality)};
}

struct PidOutput {
  Covector control;
  AlgebraElement dzeta_I;
};

/// f_u = -I (kp eta_E + kd zeta_E + kI zeta_I) + f_r; I nabla_{zeta_E} zeta_I = I eta_E.
inline PidOutput pid_full_step(const ErrorState& err, const ControllerState& ctrl, const GainSet& gains,
                               const InertiaMetric& metric, const Covector& f_r) {
  const AlgebraElement mix = gains.kp * err.eta_E + gains.kd * err.zeta_E + gains.kI * ctrl.zeta_I;
  const Covector u = -metric.lower(mix) + f_r;
  if (ctrl.windup_frozen) return {u, AlgebraElement::zero_like(ctrl.zeta_I)};
  const Covector q = connection_quadratic_lower(metric, err.zeta_E, ctrl.zeta_I);
  return {u, err.eta_E - metric.raise(q, ctrl.zeta_I.group(), ctrl.zeta_I.chirality())};
}

/// Configuration and velocity of one subsystem of an interconnected system.
struct SubsystemState {
  GroupElement g;
  AlgebraElement v;
};

namespace detail {

inline MatX metric_at(const InertiaMetric& m, const GroupElement& g) {
  if (m.kind() == InertiaMetric::Kind::circle_field) {
    if (group_of(g) != Group::circle) throw InvalidMetricError("circle metric on a non-circle configuration");
    return MatX::Constant(1, 1, m.value(std::get<CircleAngle>(g).theta()));
  }
  return m.matrix();
}

}  // namespace detail

/// tau_u = -I_s (kp eta_e + kd v_s + kI v_I) - kc B^{-1} I_a v_a;
/// I_s nabla^s_{v_s} v_I = I_s eta_e.
inline PidOutput pid_underactuated_step(const SubsystemState& s, const AlgebraElement& eta_e,
                                        const SubsystemState& a, const ControllerState& ctrl, const GainSet& gains,
                                        const InertiaMetric& metric_s, const MatX& B_inv,
                                        const InertiaMetric& metric_a) {
  const MatX is = detail::metric_at(metric_s, s.g);
  const MatX ia = detail::metric_at(metric_a, a.g);
  if (B_inv.rows() != is.rows() || B_inv.cols() != ia.rows() || !B_inv.allFinite()) {
    throw SingularityError("pid_underactuated_step: B^{-1} unavailable or of wrong shape");
  }
  const VecX mix = gains.kp * eta_e.vector() + gains.kd * s.v.vector() + gains.kI * ctrl.zeta_I.vector();
  const Covector u(-is * mix - gains.kc * B_inv * (ia * a.v.vector()));
  if (ctrl.windup_frozen) return {u, AlgebraElement::zero_like(ctrl.zeta_I)};
  if (metric_s.kind() == InertiaMetric::Kind::circle_field) {
    const double corr =
        circle_covariant(metric_s, std::get<CircleAngle>(s.g), s.v.scalar(), ctrl.zeta_I.scalar(), 0.0);
    return {u, eta_e - AlgebraElement(ctrl.zeta_I.group(), VecX::Constant(1, corr), ctrl.zeta_I.chirality())};
  }
  const Covector q = connection_quadratic_lower(metric_s, s.v, ctrl.zeta_I);
  return {u, eta_e - metric_s.raise(q, ctrl.zeta_I.group(), ctrl.zeta_I.chirality())};
}

/// P(gamma) = -P(kp dV) - kd P(I gdot) - kI P(I v_I);
/// I nabla_gdot v_I = -(nabla_gdot P_c)(I v_I) + P(dV).
/// The displayed constrained law carries no proportional gain; kp_gradient = 1 reproduces it.
inline PidOutput pid_constrained_step(const AlgebraElement& gdot, const ControllerState& ctrl, const GainSet& gains,
                                      const InertiaMetric& metric, const ConstraintDistribution& dist,
                                      const Covector& dV, double kp_gradient = 1.0) {
  detail::check_admissible(dist, metric, gdot);
  const Mat3 i = metric.matrix();
  const Vec3 v = gdot.vec3();
  const Vec3 vi = ctrl.zeta_I.vec3();
  const Vec3 gamma = dist.P() * (-kp_gradient * dV.vec3() - gains.kd * (i * v) - gains.kI * (i * vi));
  const Covector u{VecX(gamma)};
  if (ctrl.windup_frozen) return {u, AlgebraElement::zero_like(ctrl.zeta_I)};
  const Covector nab = constant_projector_derivative(dist, metric, gdot, ctrl.zeta_I);
  const Covector quad = connection_quadratic_lower(metric, gdot, ctrl.zeta_I);
  const VecX rhs = -nab.f + VecX(dist.P() * dV.vec3()) - quad.f;
  return {u, AlgebraElement(ctrl.zeta_I.group(), metric.inverse() * rhs, ctrl.zeta_I.chirality())};
}

}  // namespace gpid
