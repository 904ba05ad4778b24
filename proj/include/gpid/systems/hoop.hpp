#pragma once

// Hoop rolling without slip on an incline, actuated by an internal
// pendulum/cart mechanism; feedback regularization and PID.

#include <cmath>

#include "gpid/geometry.hpp"
#include "gpid/pid.hpp"

namespace gpid::hoop {

inline constexpr double kGravity = 9.81;

struct Params {
  double m_h = 0.0, m_a = 0.0;  ///< kg
  double I_h = 0.0, I_a = 0.0;  ///< kg m^2
  double r = 0.0, l = 0.0;      ///< m
  double beta = 0.0;            ///< rad, plant only
  double g = kGravity;

  double M() const { return m_h + m_a; }
  double J() const { return I_a + m_a * l * l; }

  /// I(theta_a) = I_h + M r^2 - m_a^2 r^2 l^2 cos^2(theta_a) / (I_a + m_a l^2)
  double inertia(double theta_a) const {
    const double c = std::cos(theta_a);
    return I_h + M() * r * r - m_a * m_a * r * r * l * l * c * c / J();
  }
  double inertia_derivative(double theta_a) const {
    return m_a * m_a * r * r * l * l * std::sin(2.0 * theta_a) / J();
  }
  InertiaMetric metric() const {
    const Params p = *this;
    return InertiaMetric::circle([p](double t) { return p.inertia(t); },
                                 [p](double t) { return p.inertia_derivative(t); });
  }

  void validate() const {
    if (!(m_h > 0.0) || !(m_a > 0.0) || !(I_h > 0.0) || !(I_a > 0.0) || !(r > 0.0) || !(l > 0.0)) {
      throw InvalidArgumentError("hoop: parameters must be positive");
    }
    if (!(I_h + M() * r * r - m_a * m_a * r * r * l * l / J() > 0.0)) {
      throw InvalidArgumentError("hoop: I(theta_a) must stay positive");
    }
  }
};

/// arcsin(m_a l / (M r)); NaN when every incline admits an equilibrium.
inline double beta_max(const Params& p) {
  const double s = p.m_a * p.l / (p.M() * p.r);
  return s >= 1.0 ? std::numeric_limits<double>::quiet_NaN() : std::asin(s);
}

inline double tau_g_omega(double theta_a, const Params& p) {
  return p.r * p.M() * p.g * std::sin(p.beta) -
         (p.m_a * p.m_a * p.r * p.l * p.l * p.g / p.J()) * std::cos(theta_a) * std::sin(theta_a + p.beta);
}

inline double tau_g_omega_a(double theta_a, const Params& p) {
  return (p.m_a * p.r * p.l * std::cos(theta_a) / p.J()) * tau_g_omega(theta_a, p) -
         p.inertia(theta_a) * (p.m_a * p.g * p.l * std::sin(theta_a + p.beta) / p.J());
}

inline double B(double theta_a, const Params& p) {
  const double den = p.J() - p.m_a * p.r * p.l * std::cos(theta_a);
  if (std::abs(den) < 1e-12) throw SingularityError("hoop: B(theta_a) has a vanishing denominator");
  return p.m_a * p.r * p.l * std::cos(theta_a) / p.J() - p.inertia(theta_a) / den;
}

struct State {
  double theta = 0.0, o = 0.0, omega = 0.0, theta_a = 0.0, omega_a = 0.0;
};

struct Derivative {
  double dtheta, dO, domega, dtheta_a, domega_a;
};

inline Derivative dynamics(const State& s, double tau_u, const Params& p) {
  const double i = p.inertia(s.theta_a);
  const double sa = std::sin(s.theta_a), ca = std::cos(s.theta_a);
  const double domega = (-p.m_a * p.r * p.l * sa * s.omega_a * s.omega_a + tau_g_omega(s.theta_a, p) + tau_u) / i;
  const double domega_a = (-(p.m_a * p.m_a * p.r * p.r * p.l * p.l * sa * ca / p.J()) * s.omega_a * s.omega_a +
                           tau_g_omega_a(s.theta_a, p) + B(s.theta_a, p) * tau_u) / i;
  return {s.omega, -p.r * s.omega, domega, s.omega_a, domega_a};
}

/// Kinetic plus potential energy for beta = 0 (actuator CoM below the centre at theta_a = 0).
inline double energy_flat(const State& s, const Params& p) {
  const double ke = 0.5 * ((p.I_h + p.M() * p.r * p.r) * s.omega * s.omega -
                           2.0 * p.m_a * p.r * p.l * std::cos(s.theta_a) * s.omega * s.omega_a + p.J() * s.omega_a * s.omega_a);
  return ke - p.m_a * p.g * p.l * std::cos(s.theta_a);
}

struct Trim {
  double theta_a;
  double tau_u;
};

/// Static equilibrium on the incline: sin(theta_a + beta) = r M sin(beta) / (m_a l).
inline Trim equilibrium(const Params& p) {
  const double s = p.r * p.M() * std::sin(p.beta) / (p.m_a * p.l);
  if (std::abs(s) > 1.0) throw InvalidArgumentError("hoop: incline exceeds beta_max, no equilibrium");
  const double ta = std::asin(s) - p.beta;
  return {ta, -tau_g_omega(ta, p)};
}

/// Regularizing plus potential-shaping input.
inline double regularize(double theta_a, double omega_a, double omega_e, const Params& nominal) {
  const Params& p = nominal;
  const double s2 = std::sin(2.0 * theta_a);
  return -(p.m_a * p.m_a * p.r * p.r * p.l * p.l * s2 / (2.0 * p.J())) * omega_a * omega_e +
         p.m_a * p.m_a * p.r * p.l * p.l * p.g * s2 / (2.0 * p.J());
}

struct ControlOutput {
  double tau_total;
  double tau_tilde;
  double tau_reg;
  double do_I;
};

/// tau_tilde = -I(theta_a)(kp eta_e + kd omega_e + kI o_I + kc B^{-1} omega_a), eta_e = -o_e;
/// I(theta_a) nabla_{omega_a} o_I = I(theta_a) eta_e.
inline ControlOutput controller(double o_e, double omega_e, double omega_a, double theta_a, double o_I,
                                bool windup_frozen, const GainSet& gains, const Params& nominal) {
  const double b = B(theta_a, nominal);
  if (std::abs(b) < 1e-12) throw SingularityError("hoop controller: B(theta_a) = 0");
  const double i = nominal.inertia(theta_a);
  const double eta = -o_e;
  const double tt = -i * (gains.kp * eta + gains.kd * omega_e + gains.kI * o_I + gains.kc * omega_a / b);
  const double tr = regularize(theta_a, omega_a, omega_e, nominal);
  const double gamma = nominal.inertia_derivative(theta_a) / (2.0 * i);
  const double doi = windup_frozen ? 0.0 : eta - gamma * omega_a * o_I;
  return {tr + tt, tt, tr, doi};
}

}  // namespace gpid::hoop
