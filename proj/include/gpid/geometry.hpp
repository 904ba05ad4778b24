#pragma once

// Inertia metrics, invariant Levi-Civita connections on Lie algebras, the
// circle connection, a Koszul-formula oracle, and constraint projections.

#include <functional>
#include <string>

#include "gpid/lie.hpp"

namespace gpid {

/// Element of the dual of a Lie algebra (force, moment, differential).
struct Covector {
  VecX f;

  Covector() = default;
  explicit Covector(VecX v) : f(std::move(v)) {}
  static Covector zero(Eigen::Index n) { return Covector(VecX::Zero(n)); }

  Eigen::Index dim() const { return f.size(); }
  Vec3 vec3() const { return f.head<3>(); }
  double pair(const AlgebraElement& v) const { return f.dot(v.vector()); }

  Covector operator+(const Covector& o) const { return Covector(f + o.f); }
  Covector operator-(const Covector& o) const { return Covector(f - o.f); }
  Covector operator-() const { return Covector(-f); }
  friend Covector operator*(double s, const Covector& c) { return Covector(s * c.f); }
};

enum class Invariance { left, right, bi, none };

class InertiaMetric {
 public:
  enum class Kind { constant_matrix, circle_field };
  using ScalarField = std::function<double(double)>;

  /// Symmetric positive semi-definite matrix in the trivialization used by the
  /// caller (for a left-invariant metric with spatial velocities pass R I R^T).
  static InertiaMetric constant(const MatX& m, Invariance inv, double tol = 1e-12) {
    if (m.rows() != m.cols() || m.rows() == 0) throw InvalidMetricError("metric must be square");
    if (!m.allFinite()) throw InvalidMetricError("metric has non-finite entries");
    const double scale = std::max(1.0, m.norm());
    if ((m - m.transpose()).norm() > tol * scale) throw InvalidMetricError("metric is not symmetric");
    Eigen::SelfAdjointEigenSolver<MatX> es(m);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < -tol * scale) throw InvalidMetricError("metric has a negative eigenvalue");
    InertiaMetric r;
    r.kind_ = Kind::constant_matrix;
    r.m_ = m;
    r.inv_ = inv;
    r.definite_ = lmin > tol * scale;
    return r;
  }

  /// Scalar metric I(theta) > 0 on S^1 with its derivative.
  static InertiaMetric circle(ScalarField i, ScalarField di) {
    if (!i || !di) throw InvalidMetricError("circle metric needs I(theta) and dI/dtheta");
    InertiaMetric r;
    r.kind_ = Kind::circle_field;
    r.i_ = std::move(i);
    r.di_ = std::move(di);
    r.inv_ = Invariance::none;
    r.definite_ = true;
    return r;
  }

  Kind kind() const { return kind_; }
  Invariance invariance() const { return inv_; }
  bool definite() const { return definite_; }
  Eigen::Index dim() const { return kind_ == Kind::circle_field ? 1 : m_.rows(); }

  const MatX& matrix() const {
    if (kind_ != Kind::constant_matrix) throw InvalidMetricError("matrix() on a circle scalar field");
    return m_;
  }

  double value(double theta) const {
    const double v = i_(theta);
    if (!(v > 0.0)) throw InvalidMetricError("circle metric I(theta) must be positive");
    return v;
  }
  double derivative(double theta) const { return di_(theta); }

  MatX inverse() const {
    if (!definite_) throw InvalidMetricError("inverse of a semi-definite metric");
    return matrix().inverse();
  }

  Covector lower(const AlgebraElement& v) const { return Covector(matrix() * v.vector()); }
  AlgebraElement raise(const Covector& c, Group g, Chirality ch) const {
    return {g, inverse() * c.f, ch};
  }
  double inner(const AlgebraElement& a, const AlgebraElement& b) const {
    return a.vector().dot(matrix() * b.vector());
  }

 private:
  Kind kind_ = Kind::constant_matrix;
  MatX m_;
  ScalarField i_, di_;
  Invariance inv_ = Invariance::none;
  bool definite_ = false;
};

namespace detail {

inline void check_pair(const InertiaMetric& metric, const AlgebraElement& xi, const AlgebraElement& eta) {
  xi.checked(eta);
  if (metric.kind() != InertiaMetric::Kind::constant_matrix) {
    throw InvalidMetricError("invariant connection needs a constant-matrix metric");
  }
  if (metric.invariance() == Invariance::none) {
    throw InvalidMetricError("invariant connection needs a left, right or bi-invariant metric");
  }
  if (metric.dim() != xi.dim()) throw DimensionMismatchError("metric and algebra dimensions differ");
}

}  // namespace detail

/// ad*_xi m, i.e. ad_xi^T m (m x xi on so(3)).
inline VecX ad_star(Group g, const VecX& xi, const VecX& m) { return ad_matrix(g, xi).transpose() * m; }

/// Velocity-quadratic part of the lowered connection, I B(xi, eta), so that
/// I nabla_xi eta = I d_eta(xi) + I B(xi, eta).
inline Covector connection_quadratic_lower(const InertiaMetric& metric, const AlgebraElement& xi,
                                           const AlgebraElement& eta) {
  detail::check_pair(metric, xi, eta);
  const MatX& m = metric.matrix();
  const Group g = xi.group();
  const double ad_sign = xi.chirality() == Chirality::left ? 1.0 : -1.0;
  double corr_sign = 0.0;
  if (metric.invariance() == Invariance::left) corr_sign = -1.0;
  if (metric.invariance() == Invariance::right) corr_sign = 1.0;
  VecX out = ad_sign * (m * (ad_matrix(g, xi.vector()) * eta.vector()));
  if (corr_sign != 0.0) {
    out += corr_sign * (ad_star(g, xi.vector(), m * eta.vector()) + ad_star(g, eta.vector(), m * xi.vector()));
  }
  return Covector(0.5 * out);
}

/// Lower derivative I nabla_xi eta; meaningful for semi-definite metrics too.
inline Covector lower_connection(const InertiaMetric& metric, const AlgebraElement& xi, const AlgebraElement& eta,
                                 const AlgebraElement& d_eta_xi) {
  xi.checked(d_eta_xi);
  return metric.lower(d_eta_xi) + connection_quadratic_lower(metric, xi, eta);
}

/// nabla_xi eta in the algebra. Requires a definite metric.
inline AlgebraElement connection_invariant(const InertiaMetric& metric, const AlgebraElement& xi,
                                           const AlgebraElement& eta, const AlgebraElement& d_eta_xi) {
  const Covector q = connection_quadratic_lower(metric, xi, eta);
  xi.checked(d_eta_xi);
  return d_eta_xi + metric.raise(q, xi.group(), xi.chirality());
}

/// Gamma(theta) = I'(theta) / (2 I(theta)).
class ChristoffelCircle {
 public:
  explicit ChristoffelCircle(InertiaMetric metric) : metric_(std::move(metric)) {
    if (metric_.kind() != InertiaMetric::Kind::circle_field) {
      throw InvalidMetricError("ChristoffelCircle needs a circle scalar metric");
    }
  }
  double operator()(double theta) const { return metric_.derivative(theta) / (2.0 * metric_.value(theta)); }

  /// |Gamma - central difference of I / (2I)|, used to validate supplied derivatives.
  double finite_difference_gap(double theta, double h = 1e-6) const {
    const double fd = (metric_.value(theta + h) - metric_.value(theta - h)) / (2.0 * h);
    return std::abs((*this)(theta) - fd / (2.0 * metric_.value(theta)));
  }

 private:
  InertiaMetric metric_;
};

inline double circle_covariant(const InertiaMetric& metric, const CircleAngle& theta, double zeta, double eta,
                               double d_eta_zeta) {
  if (metric.kind() != InertiaMetric::Kind::circle_field) {
    throw InvalidMetricError("circle_covariant needs a circle scalar metric");
  }
  return d_eta_zeta + ChristoffelCircle(metric)(theta.theta()) * zeta * eta;
}

namespace detail {

template <class F>
double richardson_derivative(const F& f, double h) {
  auto central = [&](double s) { return (f(s) - f(-s)) / (2.0 * s); };
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

inline void check_step(double step) {
  if (!(step > 0.0)) throw InvalidArgumentError("koszul_numeric: step must be positive");
}

}  // namespace detail

/// Koszul six-term evaluation of <I nabla_X Y, Z> on SO(3) for fields with
/// constant coefficients in the chosen trivialization. `metric_field` returns
/// the metric matrix at a configuration in that same trivialization.
inline double koszul_numeric(const std::function<Mat3(const Rotation&)>& metric_field, const Vec3& x,
                             const Vec3& y, const Vec3& z, const Rotation& base, double step,
                             Chirality chirality = Chirality::left) {
  detail::check_step(step);
  auto flow = [&](const Vec3& dir, double s) {
    const Rotation e = exp_so3(s * dir);
    return chirality == Chirality::left ? base * e : e * base;
  };
  auto ip = [&](const Rotation& g, const Vec3& a, const Vec3& b) { return a.dot(metric_field(g) * b); };
  auto lie = [&](const Vec3& dir, const Vec3& a, const Vec3& b) {
    return detail::richardson_derivative([&](double s) { return ip(flow(dir, s), a, b); }, step);
  };
  // Brackets of invariant fields: +cross for left-invariant, -cross for right-invariant.
  const double bs = chirality == Chirality::left ? 1.0 : -1.0;
  auto br = [&](const Vec3& a, const Vec3& b) -> Vec3 { return bs * a.cross(b); };
  const double t = lie(x, y, z) + lie(y, z, x) - lie(z, x, y) - ip(base, x, br(y, z)) + ip(base, y, br(z, x)) +
                   ip(base, z, br(x, y));
  return 0.5 * t;
}

/// Koszul evaluation on S^1 with constant-coefficient fields a, b, c.
inline double koszul_numeric(const std::function<double(double)>& metric_field, double a, double b, double c,
                             double theta, double step) {
  detail::check_step(step);
  auto lie = [&](double dir, double u, double v) {
    return detail::richardson_derivative([&](double s) { return u * v * metric_field(theta + s * dir); }, step);
  };
  return 0.5 * (lie(a, b, c) + lie(b, c, a) - lie(c, a, b));
}

/// Koszul evaluation on R^n (abelian; brackets of constant fields vanish).
inline double koszul_numeric(const std::function<MatX(const VecX&)>& metric_field, const VecX& x, const VecX& y,
                             const VecX& z, const VecX& base, double step) {
  detail::check_step(step);
  auto lie = [&](const VecX& dir, const VecX& u, const VecX& v) {
    return detail::richardson_derivative([&](double s) { return u.dot(metric_field(base + s * dir) * v); }, step);
  };
  return 0.5 * (lie(x, y, z) + lie(y, z, x) - lie(z, x, y));
}

class ConstraintDistribution {
 public:
  ConstraintDistribution(const Mat3& p_dstar, const Mat3& p_dstar_c, double tol = 1e-12)
      : p_(p_dstar), pc_(p_dstar_c) {
    if ((p_ + pc_ - Mat3::Identity()).norm() > tol) throw InvalidArgumentError("projectors must sum to I");
    if ((p_ * p_ - p_).norm() > tol || (pc_ * pc_ - pc_).norm() > tol) {
      throw InvalidArgumentError("projectors must be idempotent");
    }
    rank_ = static_cast<int>(std::lround(p_.trace()));
  }

  /// P_{D*c} = n n^T for a unit annihilator n.
  static ConstraintDistribution from_annihilator(const Vec3& n) {
    const Vec3 u = n.normalized();
    const Mat3 pc = u * u.transpose();
    return {Mat3::Identity() - pc, pc};
  }

  const Mat3& P() const { return p_; }
  const Mat3& Pc() const { return pc_; }
  int rank() const { return rank_; }

 private:
  Mat3 p_, pc_;
  int rank_ = 0;
};

namespace detail {

inline void check_admissible(const ConstraintDistribution& dist, const InertiaMetric& metric,
                             const AlgebraElement& v, double tol = 1e-6) {
  const double r = (dist.Pc() * (metric.matrix() * v.vector())).norm();
  if (r > tol) {
    throw ConstraintViolationError("velocity violates the constraint (|P_c I v| = " + std::to_string(r) + ")");
  }
}

}  // namespace detail

/// (nabla_X P_{D*c})(I Y) for a projector that is constant in the trivialization.
inline Covector constant_projector_derivative(const ConstraintDistribution& dist, const InertiaMetric& metric,
                                              const AlgebraElement& x, const AlgebraElement& y) {
  const Vec3 pc_iy = dist.Pc() * (metric.matrix() * y.vector());
  Vec3 out = -dist.Pc() * connection_quadratic_lower(metric, x, y).vec3();
  if (pc_iy.norm() > 0.0) {
    const AlgebraElement w(x.group(), metric.inverse() * pc_iy, x.chirality());
    out += connection_quadratic_lower(metric, x, w).vec3();
  }
  return Covector(VecX(out));
}

/// gamma_lambda = -(nabla_v P_c)(I v) - P_c gamma.
inline Covector constraint_force(const ConstraintDistribution& dist, const InertiaMetric& metric,
                                 const AlgebraElement& velocity, const Covector& gamma, const Covector& nabla_P_term) {
  detail::check_admissible(dist, metric, velocity);
  const Vec3 g = -nabla_P_term.vec3() - dist.Pc() * gamma.vec3();
  const double leak = (dist.P() * g).norm();
  if (leak > 1e-9 * std::max(1.0, g.norm())) {
    throw InvalidArgumentError("constraint_force: supplied projector derivative does not lie in D*_c");
  }
  return Covector(VecX(g));
}

/// Admissible acceleration of I nabla_v v = -(nabla_v P_c)(I v) + P gamma.
inline AlgebraElement constrained_rhs(const ConstraintDistribution& dist, const InertiaMetric& metric,
                                      const AlgebraElement& velocity, const Covector& gamma) {
  detail::check_admissible(dist, metric, velocity);
  const Covector nab = constant_projector_derivative(dist, metric, velocity, velocity);
  const Covector quad = connection_quadratic_lower(metric, velocity, velocity);
  const VecX rhs = -nab.f + dist.P() * gamma.vec3() - quad.f;
  return {velocity.group(), metric.inverse() * rhs, velocity.chirality()};
}

}  // namespace gpid
