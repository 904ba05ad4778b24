#pragma once

// Inverted pendulum on a cart on an incline.

#include <cmath>

#include "gpid/geometry.hpp"
#include "gpid/pid.hpp"

namespace gpid::ipc {

inline constexpr double kGravity = 9.81;

struct Params {
  double M_cart = 0.0;  ///< kg
  double m_pend = 0.0;  ///< kg
  double L = 0.0;       ///< m
  double I_p = 0.0;     ///< kg m^2
  double beta = 0.0;    ///< rad
  double g = kGravity;

  double inertia(double theta) const {
    const double c = std::cos(theta);
    return I_p - m_pend * m_pend * L * L * c * c / (M_cart + m_pend);
  }
  double inertia_derivative(double theta) const {
    return m_pend * m_pend * L * L * std::sin(2.0 * theta) / (M_cart + m_pend);
  }
  InertiaMetric metric() const {
    const Params p = *this;
    return InertiaMetric::circle([p](double t) { return p.inertia(t); },
                                 [p](double t) { return p.inertia_derivative(t); });
  }

  void validate() const {
    if (!(M_cart > 0.0) || !(m_pend > 0.0) || !(L > 0.0) || !(I_p > 0.0)) {
      throw InvalidArgumentError("ipc: masses, L and I_p must be positive");
    }
    // min over theta of I(theta) is at cos^2 = 1
    if (!(I_p - m_pend * m_pend * L * L / (M_cart + m_pend) > 0.0)) {
      throw InvalidArgumentError("ipc: I(theta) must stay positive");
    }
  }
};

struct Derivative {
  double dtheta, domega, dx, dv;
};

inline Derivative dynamics(double theta, double omega, double /*x*/, double v, double f, const Params& p) {
  const double mt = p.M_cart + p.m_pend;
  const double i = p.inertia(theta);
  const double s = std::sin(theta), c = std::cos(theta);
  const double mlg = p.m_pend * p.L * p.g;
  const double m2l2 = p.m_pend * p.m_pend * p.L * p.L;
  const double domega = (-(m2l2 / mt) * omega * omega * s * c + mlg * std::sin(theta + p.beta) +
                         (p.m_pend * p.L * c / mt) * f) / i;
  const double dv = (-(p.m_pend * p.L * p.I_p / i) * omega * omega * s +
                     (m2l2 * p.g / i) * std::sin(theta + p.beta) * c + (p.I_p / i) * f) / mt;
  return {omega, domega, v, dv};
}

/// Kinetic plus potential energy, for conservation checks.
inline double energy(double theta, double omega, double v, const Params& p) {
  const double mt = p.M_cart + p.m_pend;
  const double ke = 0.5 * (mt * v * v - 2.0 * p.m_pend * p.L * std::cos(theta) * omega * v + p.I_p * omega * omega);
  return ke + p.m_pend * p.g * p.L * std::cos(theta + p.beta);
}

/// u = m L cos(theta) f / (M + m).
inline double input_map(double theta, const Params& p) {
  return p.m_pend * p.L * std::cos(theta) / (p.M_cart + p.m_pend);
}

/// B(theta) = (M + m) I_p / (m L cos(theta) I(theta)).
inline double B(double theta, const Params& p) {
  const double c = std::cos(theta);
  if (std::abs(c) < 1e-12) throw SingularityError("ipc: B(theta) undefined at cos(theta) = 0");
  return (p.M_cart + p.m_pend) * p.I_p / (p.m_pend * p.L * c * p.inertia(theta));
}

struct ControlOutput {
  double f;
  double do_I;
  double eta_e;
};

/// How the tilt PID term is mapped to the cart force.
enum class ForceMap {
  displayed,  ///< f = -(I/cos)(...): the tilt channel sees u = -(mL/(M+m)) I(...)
  inverse,    ///< f = u / input_map(theta), so the tilt channel sees u = -I(...)
};

/// f = -(I/cos) (kp eta_e + kd omega + kI o_I) - (I/I_p) kcd v, with I eta_e = sin(theta + beta);
/// do_I = eta_e - Gamma(theta) omega o_I. ForceMap::inverse scales the first term by (M+m)/(mL).
inline ControlOutput controller(double theta, double omega, double v, double o_I, bool windup_frozen,
                                const GainSet& gains, const Params& nominal,
                                ForceMap map = ForceMap::displayed) {
  const double c = std::cos(theta);
  if (std::abs(c) < 1e-9) throw SingularityError("ipc controller: cos(theta) = 0");
  const double i = nominal.inertia(theta);
  const double eta = std::sin(theta + nominal.beta) / i;
  const double scale = map == ForceMap::inverse ? (nominal.M_cart + nominal.m_pend) / (nominal.m_pend * nominal.L) : 1.0;
  const double f =
      -scale * (i / c) * (gains.kp * eta + gains.kd * omega + gains.kI * o_I) - (i / nominal.I_p) * gains.kc * v;
  const double gamma = nominal.inertia_derivative(theta) / (2.0 * i);
  const double doi = windup_frozen ? 0.0 : eta - gamma * omega * o_I;
  return {f, doi, eta};
}

}  // namespace gpid::ipc
