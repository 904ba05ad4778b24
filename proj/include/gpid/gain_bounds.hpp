#pragma once

// Integral/proportional gain bounds and numerical estimation of the Hessian
// bound mu and gradient ratio lambda of an error potential.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gpid/geometry.hpp"
#include "gpid/pid.hpp"

namespace gpid {

struct GainBounds {
  double delta = 0.0;
  double kI_max = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;  ///< 2 kappa kd^2
  double kp_min = 0.0;
};

inline GainBounds gain_bounds(double mu, double lambda, double kappa, double kd, double kI) {
  if (!(mu > 0.0) || !(lambda > 0.0) || !(kd > 0.0) || !(kI > 0.0)) {
    throw InvalidArgumentError("gain_bounds: mu, lambda, kd and kI must be positive");
  }
  GainSet probe;
  probe.kappa = kappa;
  probe.mu = mu;
  probe.validate();
  GainBounds b;
  b.delta = std::abs(kappa * mu - 1.0);
  const double kd2 = kd * kd, kd3 = kd2 * kd, kd4 = kd3 * kd;
  b.kI_max = kd3 * (1.0 - b.delta * b.delta) / mu;
  b.k1 = (kI / (2.0 * kd)) * (std::sqrt(1.0 + 16.0 * lambda * kappa * kappa * kd2 / kI) - 1.0);
  const double inner = 4.0 * kd3 * (kI * kI + 4.0 * kappa * kd3 * (1.0 + kappa * kd3)) / (lambda * kI * kI * kI);
  b.k2 = (lambda * kI * kI / (2.0 * kd4)) * (1.0 + std::sqrt(1.0 + inner));
  b.k3 = 2.0 * kappa * kd2;
  b.kp_min = std::max({b.k1, b.k2, b.k3});
  return b;
}

struct GainVerdict {
  GainBounds bounds;
  bool kI_ok = false;
  bool kp_ok = false;
  double kI_margin = 0.0;  ///< kI_max - kI
  double kp_margin = 0.0;  ///< kp - kp_min
  bool ok() const { return kI_ok && kp_ok; }
};

inline GainVerdict verify_gains(const GainSet& g) {
  if (!g.has_certificate_data()) throw InvalidArgumentError("verify_gains: kappa, mu and lambda must be set");
  GainVerdict v;
  v.bounds = gain_bounds(g.mu, g.lambda, g.kappa, g.kd, g.kI);
  v.kI_margin = v.bounds.kI_max - g.kI;
  v.kp_margin = g.kp - v.bounds.kp_min;
  v.kI_ok = v.kI_margin > 0.0;
  v.kp_ok = v.kp_margin > 0.0;
  return v;
}

/// Local quantities of an error potential at one configuration.
struct MorsePoint {
  double V = 0.0;
  double grad_norm2 = 0.0;  ///< <<eta, eta>>
  double hess_norm = 0.0;   ///< operator norm of zeta -> nabla_zeta eta in the metric
};

/// Parameterized operating region: eval(p) for p in the box [lo, hi].
struct MorseProbe {
  VecX lo, hi;
  std::function<MorsePoint(const VecX&)> eval;
};

struct MuLambda {
  double mu = 0.0;
  double lambda = 0.0;
};

namespace detail {

/// sqrt(M) H sqrt(M)^{-1}, spectral norm.
inline double metric_operator_norm(const MatX& h, const MatX& m) {
  Eigen::SelfAdjointEigenSolver<MatX> es(m);
  const MatX s = es.operatorSqrt();
  const MatX si = es.operatorInverseSqrt();
  Eigen::JacobiSVD<MatX> svd(s * h * si);
  return svd.singularValues()(0);
}

inline double pattern_search_max(const std::function<double(const VecX&)>& f, VecX p, const VecX& lo,
                                 const VecX& hi, double step0, int iters) {
  double best = f(p);
  double step = step0;
  for (int it = 0; it < iters && step > 1e-9; ++it) {
    bool moved = false;
    for (Eigen::Index d = 0; d < p.size(); ++d) {
      for (double sgn : {1.0, -1.0}) {
        VecX q = p;
        q(d) = std::clamp(q(d) + sgn * step, lo(d), hi(d));
        const double v = f(q);
        if (v > best) {
          best = v;
          p = q;
          moved = true;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return best;
}

}  // namespace detail

/// Grid search over the probe box followed by pattern-search refinement from
/// the best grid points. lambda skips points with V below v_floor.
inline MuLambda estimate_mu_lambda(const MorseProbe& probe, int grid_per_dim = 21, int refine_iters = 200,
                                   double v_floor = 1e-10) {
  const auto n = probe.lo.size();
  if (n == 0 || probe.hi.size() != n || grid_per_dim < 2) throw InvalidArgumentError("estimate_mu_lambda: bad probe");
  auto mu_f = [&](const VecX& p) { return probe.eval(p).hess_norm; };
  auto la_f = [&](const VecX& p) {
    const MorsePoint m = probe.eval(p);
    return m.V > v_floor ? m.grad_norm2 / (2.0 * m.V) : 0.0;
  };
  struct Cand {
    double v;
    VecX p;
  };
  std::vector<Cand> mus, las;
  long total = 1;
  for (Eigen::Index i = 0; i < n; ++i) total *= grid_per_dim;
  for (long k = 0; k < total; ++k) {
    VecX p(n);
    long r = k;
    for (Eigen::Index d = 0; d < n; ++d) {
      const int j = static_cast<int>(r % grid_per_dim);
      r /= grid_per_dim;
      p(d) = probe.lo(d) + (probe.hi(d) - probe.lo(d)) * j / (grid_per_dim - 1);
    }
    mus.push_back({mu_f(p), p});
    las.push_back({la_f(p), p});
  }
  auto top = [](std::vector<Cand>& c) {
    const std::size_t k = std::min<std::size_t>(5, c.size());
    std::partial_sort(c.begin(), c.begin() + static_cast<long>(k), c.end(),
                      [](const Cand& a, const Cand& b) { return a.v > b.v; });
    c.resize(k);
  };
  top(mus);
  top(las);
  const double step0 = (probe.hi - probe.lo).maxCoeff() / (grid_per_dim - 1);
  MuLambda out;
  for (const auto& c : mus) {
    out.mu = std::max(out.mu, detail::pattern_search_max(mu_f, c.p, probe.lo, probe.hi, step0, refine_iters));
  }
  for (const auto& c : las) {
    out.lambda = std::max(out.lambda, detail::pattern_search_max(la_f, c.p, probe.lo, probe.hi, step0, refine_iters));
  }
  return out;
}

/// V(E) = trace(I - E) on SO(3), parameterized by a rotation vector in [-pi, pi]^3.
/// Plain weighting is measured in the Euclidean metric, inertia weighting in I.
inline MorseProbe so3_trace_probe(const MorseWeighting& w) {
  const Mat3 m = w.inertia_weighted ? w.inertia : Mat3::Identity();
  const Mat3 minv = m.inverse();
  const InertiaMetric metric = InertiaMetric::constant(m, Invariance::left);
  MorseProbe p;
  p.lo = VecX::Constant(3, -kPi);
  p.hi = VecX::Constant(3, kPi);
  p.eval = [m, minv, metric](const VecX& x) {
    const Mat3 e = exp_so3(x.head<3>()).matrix();
    const Vec3 eta = minv * vee_skew_part(e - e.transpose());
    Mat3 h;
    for (int j = 0; j < 3; ++j) {
      const Vec3 z = Vec3::Unit(j);
      const Vec3 deta = minv * vee_skew_part(e * hat(z) + hat(z) * e.transpose());
      const AlgebraElement zj = AlgebraElement::so3(z, Chirality::left);
      const AlgebraElement et = AlgebraElement::so3(eta, Chirality::left);
      h.col(j) = connection_invariant(metric, zj, et, AlgebraElement::so3(deta, Chirality::left)).vec3();
    }
    MorsePoint r;
    r.V = (Mat3::Identity() - e).trace();
    r.grad_norm2 = eta.dot(m * eta);
    r.hess_norm = detail::metric_operator_norm(h, m);
    return r;
  };
  return p;
}

/// V = 1 - e3 . R e3 with gradient I^{-1}(R^T e3 x e3) restricted to the
/// distribution Omega_3 = 0; parameters are tilt rotation components (a, b).
inline MorseProbe pendulum_probe(const Mat3& inertia) {
  const InertiaMetric metric = InertiaMetric::constant(inertia, Invariance::left);
  const Mat3 minv = inertia.inverse();
  MorseProbe p;
  p.lo = VecX::Constant(2, -kPi);
  p.hi = VecX::Constant(2, kPi);
  p.eval = [inertia, minv, metric](const VecX& x) {
    const Mat3 r = exp_so3(Vec3(x(0), x(1), 0.0)).matrix();
    const Vec3 e3 = Vec3::UnitZ();
    const Vec3 b = r.transpose() * e3;
    const Vec3 eta = minv * b.cross(e3);
    MatX h(2, 2);
    for (int j = 0; j < 2; ++j) {
      const Vec3 z = Vec3::Unit(j);
      const Vec3 deta = minv * ((-z.cross(b)).cross(e3));
      const AlgebraElement zj = AlgebraElement::so3(z, Chirality::left);
      const Vec3 col = connection_invariant(metric, zj, AlgebraElement::so3(eta, Chirality::left),
                                            AlgebraElement::so3(deta, Chirality::left))
                           .vec3();
      h.col(j) = col.head<2>();
    }
    MorsePoint out;
    out.V = 1.0 - e3.dot(r * e3);
    out.grad_norm2 = eta.dot(inertia * eta);
    out.hess_norm = detail::metric_operator_norm(h, inertia.topLeftCorner<2, 2>());
    return out;
  };
  return p;
}

/// V = 1 - cos(theta + beta) on S^1 with metric I(theta), theta in [lo, hi].
inline MorseProbe circle_cosine_probe(const InertiaMetric& metric, double beta, double theta_lo, double theta_hi) {
  MorseProbe p;
  p.lo = VecX::Constant(1, theta_lo);
  p.hi = VecX::Constant(1, theta_hi);
  p.eval = [metric, beta](const VecX& x) {
    const double th = x(0);
    auto eta = [&](double t) { return std::sin(t + beta) / metric.value(t); };
    const double h = 1e-6;
    const double deta = (eta(th + h) - eta(th - h)) / (2.0 * h);
    const double hess = circle_covariant(metric, CircleAngle(th), 1.0, eta(th), deta);
    MorsePoint r;
    r.V = 1.0 - std::cos(th + beta);
    r.grad_norm2 = metric.value(th) * eta(th) * eta(th);
    r.hess_norm = std::abs(hess);
    return r;
  };
  return p;
}

/// V = x^T K x / 2 on a flat space with constant metric M, x in [-half_width, half_width]^n.
inline MorseProbe quadratic_probe(const MatX& k, const MatX& m, double half_width) {
  MorseProbe p;
  p.lo = VecX::Constant(k.rows(), -half_width);
  p.hi = VecX::Constant(k.rows(), half_width);
  const MatX h = m.inverse() * k;
  p.eval = [k, m, h](const VecX& x) {
    const VecX eta = h * x;
    MorsePoint r;
    r.V = 0.5 * x.dot(k * x);
    r.grad_norm2 = eta.dot(m * eta);
    r.hess_norm = detail::metric_operator_norm(h, m);
    return r;
  };
  return p;
}

}  // namespace gpid
