#pragma once

// Nontrivial spherical pendulum on SO(3) with the no-spin constraint Omega_3 = 0.

#include "gpid/geometry.hpp"
#include "gpid/pid.hpp"

namespace gpid::pendulum {

struct Params {
  double M = 0.0;                    ///< kg
  double l = 0.0;                    ///< m
  double g = 0.0;                    ///< m/s^2
  Mat3 inertia = Mat3::Identity();   ///< diagonal, kg m^2

  void validate() const {
    if (!(M > 0.0) || !(l > 0.0) || !(g > 0.0)) throw InvalidArgumentError("pendulum: M, l, g must be positive");
    if ((inertia - Mat3(inertia.diagonal().asDiagonal())).norm() > 0.0 || !(inertia.diagonal().minCoeff() > 0.0)) {
      throw InvalidArgumentError("pendulum: inertia must be diagonal with positive entries");
    }
  }
};

inline ConstraintDistribution distribution() { return ConstraintDistribution::from_annihilator(Vec3::UnitZ()); }

inline Vec3 gravity_moment(const Mat3& R, const Params& p) {
  const Vec3 e3 = Vec3::UnitZ();
  return -p.M * p.g * p.l * e3.cross(R.transpose() * e3);
}

/// tau_lambda = -e3 e3^T (I Omega x Omega).
inline Vec3 constraint_moment(const Vec3& Omega, const Params& p) {
  const Vec3 e3 = Vec3::UnitZ();
  return -e3 * e3.dot((p.inertia * Omega).cross(Omega));
}

struct Derivative {
  Mat3 dR;
  Vec3 dOmega;
};

inline Derivative dynamics(const Mat3& R, const Vec3& Omega, const Vec3& tau_u, const Params& p) {
  if (std::abs(Omega.z()) > 1e-9) throw ConstraintViolationError("pendulum: Omega_3 must vanish");
  const InertiaMetric metric = InertiaMetric::constant(p.inertia, Invariance::left);
  const AlgebraElement v = AlgebraElement::so3(Omega, Chirality::left);
  const AlgebraElement a = constrained_rhs(distribution(), metric, v, Covector(VecX(gravity_moment(R, p) + tau_u)));
  Vec3 dO = a.vec3();
  dO.z() = 0.0;
  return {R * hat(Omega), dO};
}

/// V = 1 - e3 . R e3 evaluated as |R e3 - e3|^2 / 2.
inline double morse_V(const Mat3& R) { return 0.5 * (R.col(2) - Vec3::UnitZ()).squaredNorm(); }

/// dV = R^T e3 x e3.
inline Vec3 morse_dV(const Mat3& R) {
  const Vec3 e3 = Vec3::UnitZ();
  return (R.transpose() * e3).cross(e3);
}

inline double energy(const Mat3& R, const Vec3& Omega, const Params& p) {
  return 0.5 * Omega.dot(p.inertia * Omega) + p.M * p.g * p.l * R(2, 2);
}

struct ControlOutput {
  Vec3 tau_u;
  Vec3 dOmega_I;
  double V;
};

/// Two-axis PID: tau_k = -kp dV_k - kd I_k Omega_k - kI I_k Omega_I,k; I_k dOmega_I,k = dV_k.
inline ControlOutput controller(const Mat3& R, const Vec3& Omega, const Vec3& Omega_I, bool windup_frozen,
                                const GainSet& gains, const Params& nominal) {
  const InertiaMetric metric = InertiaMetric::constant(nominal.inertia, Invariance::left);
  const ControllerState cs{AlgebraElement::so3(Omega_I, Chirality::left), windup_frozen};
  const PidOutput out = pid_constrained_step(AlgebraElement::so3(Omega, Chirality::left), cs, gains, metric,
                                             distribution(), Covector(VecX(morse_dV(R))), gains.kp);
  return {out.control.vec3(), out.dzeta_I.vec3(), morse_V(R)};
}

}  // namespace gpid::pendulum
