#pragma once

// Quadrotor attitude dynamics, motor allocation with saturation, and the
// geometric PID attitude tracking controller.

#include <array>

#include "gpid/pid.hpp"

namespace gpid::quadrotor {

struct Params {
  double M = 0.0;                  ///< kg
  Mat3 inertia = Mat3::Identity();  ///< kg m^2, diagonal
  double l_arm = 0.0;               ///< m
  std::array<double, 4> c_l{};     ///< N / rpm^2 per motor
  std::array<double, 4> c_d{};     ///< N m / rpm^2 per motor
  double motor_min = 0.0;           ///< rpm
  double motor_max = 0.0;           ///< rpm

  void validate() const {
    if (!(M > 0.0) || !(l_arm > 0.0)) throw InvalidArgumentError("quadrotor: M and l_arm must be positive");
    if (!((inertia - inertia.transpose()).norm() < 1e-12) || !(inertia.diagonal().minCoeff() > 0.0)) {
      throw InvalidArgumentError("quadrotor: inertia must be symmetric with positive diagonal");
    }
    for (int i = 0; i < 4; ++i) {
      if (!(c_l[i] > 0.0) || !(c_d[i] > 0.0)) throw InvalidArgumentError("quadrotor: c_l, c_d must be positive");
    }
    if (!(motor_min > 0.0) || !(motor_min < motor_max)) {
      throw InvalidArgumentError("quadrotor: need 0 < motor_min < motor_max");
    }
  }
};

struct Derivative {
  Mat3 dR;
  Vec3 dOmega;
};

/// dR = R hat(Omega); dOmega = I^{-1}(I Omega x Omega) + Delta_T + I^{-1} tau_u.
inline Derivative dynamics(const Mat3& R, const Vec3& Omega, const Vec3& tau_u, const Vec3& Delta_T, const Params& p) {
  const Mat3& i = p.inertia;
  const Vec3 dO = i.ldlt().solve((i * Omega).cross(Omega) + tau_u) + Delta_T;
  return {R * hat(Omega), dO};
}

/// Rows: thrust, roll, pitch, yaw; columns: motors 1..4.
inline Eigen::Matrix4d allocation_matrix(const Params& p) {
  const double l = p.l_arm;
  Eigen::Matrix4d a;
  a << p.c_l[0], p.c_l[1], p.c_l[2], p.c_l[3],
       0.0, l * p.c_l[1], -l * p.c_l[2], 0.0,
       -l * p.c_l[0], 0.0, l * p.c_l[2], 0.0,
       -p.c_d[0], p.c_d[1], -p.c_d[2], p.c_d[3];
  return a;
}

/// Thrust and body moments produced by squared motor speeds (rpm^2).
inline Eigen::Vector4d forward_map(const Eigen::Vector4d& speed_sq, const Params& p) {
  return allocation_matrix(p) * speed_sq;
}

struct Allocation {
  Eigen::Vector4d speeds;  ///< rpm
  bool saturated = false;
};

inline Allocation allocate(double f_u, const Vec3& tau_u, const Params& p) {
  const Eigen::Vector4d w = Eigen::Vector4d(f_u, tau_u.x(), tau_u.y(), tau_u.z());
  const Eigen::Vector4d sq = allocation_matrix(p).partialPivLu().solve(w);
  Allocation out;
  const double lo = p.motor_min * p.motor_min;
  const double hi = p.motor_max * p.motor_max;
  for (int i = 0; i < 4; ++i) {
    double s = sq(i);
    if (!(s >= lo)) {  // also catches NaN
      s = lo;
      out.saturated = true;
    } else if (s > hi) {
      s = hi;
      out.saturated = true;
    }
    out.speeds(i) = std::sqrt(s);
  }
  return out;
}

/// Constant body moment from a centre-of-mass offset: -g (Xbar x e3).
inline Vec3 com_offset_moment(const Vec3& xbar_kgm, double g) { return -g * xbar_kgm.cross(Vec3::UnitZ()); }

struct Reference {
  Mat3 R_r;
  Vec3 Omega_r;   ///< body frame of R_r
  Vec3 dOmega_r;
};

struct ControlOutput {
  Vec3 tau_u;
  Vec3 dOmega_I;
  double V = 0.0;
  Vec3 eta_E;
  Vec3 Omega_e;
};

/// Left error E = R_r^T R fed through pid_full_step with the nominal inertia.
inline ControlOutput controller(const Mat3& R, const Vec3& Omega, const Reference& ref, const Vec3& Omega_I,
                                bool windup_frozen, const GainSet& gains, const Params& nominal,
                                const MorseWeighting& weighting) {
  const auto L = Chirality::left;
  const ErrorState base = build_error(Rotation::nearest(R), Rotation::nearest(ref.R_r), AlgebraElement::so3(Omega, L),
                                      AlgebraElement::so3(ref.Omega_r, L), L);
  ErrorState err = base;
  const MorseSample ms = morse_grad_so3(std::get<Rotation>(err.E), weighting, L);
  err.eta_E = ms.eta;
  const InertiaMetric metric = InertiaMetric::constant(nominal.inertia, Invariance::left);
  const AlgebraElement d_eta_r = transported_reference_rate(err, AlgebraElement::so3(ref.dOmega_r, L));
  const Covector f_r = feedforward_fr(err, metric, d_eta_r);
  const ControllerState cs{AlgebraElement::so3(Omega_I, L), windup_frozen};
  const PidOutput out = pid_full_step(err, cs, gains, metric, f_r);
  return {out.control.vec3(), out.dzeta_I.vec3(), ms.V, ms.eta.vec3(), err.zeta_E.vec3()};
}

}  // namespace gpid::quadrotor
