#pragma once

// Strict Lyapunov function W of the PID closed loop and its decay matrix Q.

#include <cmath>

#include "gpid/pid.hpp"

namespace gpid {

struct LyapunovInput {
  double V_s = 0.0;
  VecX eta_e, v_s, v_I;
  MatX metric_s;
  double V_a = 0.0;
  VecX v_a;  ///< may be empty
  MatX metric_a;
};

struct LyapunovSample {
  double W = 0.0;
  bool zdotW_bound_ok = false;  ///< Q positive definite
  double q_min_eig = 0.0;
  double norm_vI = 0.0, norm_eta = 0.0, norm_vs = 0.0, norm_va = 0.0;
};

struct LyapunovCoefficients {
  double alpha, beta, sigma, gamma;
};

inline LyapunovCoefficients lyapunov_coefficients(const GainSet& g) {
  if (!(g.kd > 0.0)) throw InvalidArgumentError("lyapunov: kd must be positive");
  if (!std::isfinite(g.kappa)) throw InvalidArgumentError("lyapunov: kappa must be set");
  const double kd2 = g.kd * g.kd;
  return {g.kI / kd2, g.kI / g.kd, 2.0 * g.kappa * g.kI, g.kI * (g.kI + g.kp * g.kd) / kd2};
}

/// 3x3 bound matrix in z = (|v_I|, |eta_e|, |v_s|).
inline Mat3 lyapunov_Q(const GainSet& g) {
  if (!g.has_certificate_data()) throw InvalidArgumentError("lyapunov_Q: kappa, mu and lambda must be set");
  const double kd2 = g.kd * g.kd;
  const double d = g.delta();
  Mat3 q;
  q << g.kI * g.kI / g.kd, 0.0, -d * g.kI,
       0.0, (g.kI / kd2) * (g.kp - 2.0 * g.kappa * kd2), 0.0,
       -d * g.kI, 0.0, g.kd - g.mu * g.kI / kd2;
  return q;
}

inline double lyapunov_Q_min_eig(const GainSet& g) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(lyapunov_Q(g));
  return es.eigenvalues().minCoeff();
}

inline LyapunovSample lyapunov_W(const LyapunovInput& in, const GainSet& g) {
  const LyapunovCoefficients c = lyapunov_coefficients(g);
  const MatX& m = in.metric_s;
  auto ip = [&](const VecX& a, const VecX& b) { return a.dot(m * b); };
  LyapunovSample s;
  s.W = g.kp * in.V_s + 0.5 * ip(in.v_s, in.v_s) + 0.5 * c.gamma * ip(in.v_I, in.v_I) +
        c.alpha * ip(in.eta_e, in.v_s) + c.beta * ip(in.v_I, in.v_s) + c.sigma * ip(in.v_I, in.eta_e) + in.V_a;
  if (in.v_a.size() > 0) {
    s.W += 0.5 * in.v_a.dot(in.metric_a * in.v_a);
    s.norm_va = std::sqrt(in.v_a.dot(in.metric_a * in.v_a));
  }
  s.norm_vI = std::sqrt(ip(in.v_I, in.v_I));
  s.norm_eta = std::sqrt(ip(in.eta_e, in.eta_e));
  s.norm_vs = std::sqrt(ip(in.v_s, in.v_s));
  if (g.has_certificate_data()) {
    s.q_min_eig = lyapunov_Q_min_eig(g);
    s.zdotW_bound_ok = s.q_min_eig > 0.0;
  }
  return s;
}

}  // namespace gpid
