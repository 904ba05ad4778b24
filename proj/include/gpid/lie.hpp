#pragma once

// Lie group and Lie algebra primitives: so(3) hat/vee, Rodrigues exp/log,
// group elements on S^1, SO(3), SE(3) = R^3 x SO(3) and R^n, algebra
// elements tagged with a trivialization (chirality), Ad and ad.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <variant>

#include "gpid/errors.hpp"

namespace gpid {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;

inline Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

/// Inverse of hat. Throws MalformedAlgebraError when m is not skew within tol.
inline Vec3 vee(const Mat3& m, double tol = 1e-9) {
  if (!m.allFinite()) throw MalformedAlgebraError("vee: non-finite matrix");
  const double asym = (m + m.transpose()).norm();
  if (asym > tol) {
    throw MalformedAlgebraError("vee: matrix is not skew-symmetric (|m+m^T| = " +
                                std::to_string(asym) + ")");
  }
  return Vec3(0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)),
              0.5 * (m(1, 0) - m(0, 1)));
}

/// vee of the skew part; never throws.
inline Vec3 vee_skew_part(const Mat3& m) {
  return Vec3(0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)),
              0.5 * (m(1, 0) - m(0, 1)));
}

/// Closest rotation in the Frobenius sense (symmetric orthogonalization).
inline Mat3 polar_project(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

/// max(|m^T m - I|_F, |det m - 1|)
inline double orthonormality_error(const Mat3& m) {
  return std::max((m.transpose() * m - Mat3::Identity()).norm(), std::abs(m.determinant() - 1.0));
}

class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  static Rotation identity() { return Rotation(); }

  /// Validating constructor.
  static Rotation from_matrix(const Mat3& m, double tol = 1e-9) {
    if (!m.allFinite()) throw InvalidArgumentError("Rotation: non-finite matrix");
    const double err = orthonormality_error(m);
    if (err > tol) {
      throw InvalidArgumentError("Rotation: matrix is not a rotation (error " + std::to_string(err) + ")");
    }
    return Rotation(m);
  }

  /// Projects an arbitrary (nearly orthonormal) matrix onto SO(3).
  static Rotation nearest(const Mat3& m) { return Rotation(polar_project(m)); }

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const { return Rotation(m_.transpose()); }
  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

inline Rotation exp_so3(const Vec3& v) {
  const double th = v.norm();
  const Mat3 k = hat(v);
  if (th < 1e-8) return Rotation::from_matrix(Mat3::Identity() + k + 0.5 * k * k, 1e-12);
  const Mat3 m = Mat3::Identity() + (std::sin(th) / th) * k + ((1.0 - std::cos(th)) / (th * th)) * k * k;
  return Rotation::from_matrix(m, 1e-12);
}

/// Principal logarithm, |result| <= pi. Near a half-turn the axis is read off
/// the column of a a^T with the largest diagonal entry, sign fixed by the skew
/// part (positive component at that index when the skew part vanishes).
inline Vec3 log_so3(const Rotation& rot) {
  const Mat3& r = rot.matrix();
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const Vec3 w = vee_skew_part(r);  // sin(theta) * axis
  if (c > 1.0 - 1e-12) return w;    // theta - sin(theta) is below rounding here
  const double th = std::acos(c);
  if (1.0 + c > 1e-6) return (th / std::sin(th)) * w;
  const Mat3 aat = (0.5 * (r + r.transpose()) - c * Mat3::Identity()) / (1.0 - c);
  Eigen::Index k = 0;
  aat.diagonal().maxCoeff(&k);
  Vec3 a = aat.col(k) / std::sqrt(std::max(aat(k, k), 1e-300));
  a.normalize();
  if (a.dot(w) < 0.0) a = -a;
  return th * a;
}

class CircleAngle {
 public:
  CircleAngle() = default;
  explicit CircleAngle(double theta) : theta_(reduce(theta)) {}
  double theta() const { return theta_; }

  static double reduce(double th) {
    double r = std::fmod(th, 2.0 * kPi);
    if (r < 0.0) r += 2.0 * kPi;
    if (r >= 2.0 * kPi) r = 0.0;
    return r;
  }

 private:
  double theta_ = 0.0;
};

/// Rigid motion as the direct product R^3 x SO(3): translation velocities are
/// spatial, rotational velocities are trivialized by chirality.
struct SE3Pose {
  Vec3 o = Vec3::Zero();
  Rotation R;
};

struct RnPoint {
  VecX x;
};

enum class Group { circle, so3, se3, rn };
enum class Chirality { left, right };

using GroupElement = std::variant<CircleAngle, Rotation, SE3Pose, RnPoint>;

inline Group group_of(const GroupElement& g) {
  switch (g.index()) {
    case 0: return Group::circle;
    case 1: return Group::so3;
    case 2: return Group::se3;
    default: return Group::rn;
  }
}

inline Eigen::Index algebra_dim(const GroupElement& g) {
  switch (group_of(g)) {
    case Group::circle: return 1;
    case Group::so3: return 3;
    case Group::se3: return 6;
    case Group::rn: return std::get<RnPoint>(g).x.size();
  }
  return 0;
}

inline std::string to_string(Group g) {
  switch (g) {
    case Group::circle: return "S1";
    case Group::so3: return "SO(3)";
    case Group::se3: return "SE(3)";
    case Group::rn: return "R^n";
  }
  return "?";
}

inline std::string to_string(Chirality c) { return c == Chirality::left ? "left" : "right"; }

/// Lie algebra vector. se(3) components are ordered (v, omega).
class AlgebraElement {
 public:
  AlgebraElement(Group g, VecX v, Chirality c) : group_(g), chirality_(c), v_(std::move(v)) {
    const Eigen::Index want = g == Group::circle ? 1 : g == Group::so3 ? 3 : g == Group::se3 ? 6 : -1;
    if (want >= 0 && v_.size() != want) {
      throw DimensionMismatchError("AlgebraElement: " + to_string(g) + " needs dimension " +
                                   std::to_string(want));
    }
    if (!v_.allFinite()) throw MalformedAlgebraError("AlgebraElement: non-finite components");
  }

  static AlgebraElement circle(double a, Chirality c = Chirality::left) {
    return {Group::circle, VecX::Constant(1, a), c};
  }
  static AlgebraElement so3(const Vec3& w, Chirality c) { return {Group::so3, VecX(w), c}; }
  static AlgebraElement se3(const Vec3& v, const Vec3& w, Chirality c) {
    VecX x(6);
    x << v, w;
    return {Group::se3, x, c};
  }
  static AlgebraElement rn(const VecX& x, Chirality c = Chirality::left) { return {Group::rn, x, c}; }
  static AlgebraElement zero_like(const AlgebraElement& a) {
    return {a.group_, VecX::Zero(a.v_.size()), a.chirality_};
  }

  Group group() const { return group_; }
  Chirality chirality() const { return chirality_; }
  const VecX& vector() const { return v_; }
  Eigen::Index dim() const { return v_.size(); }
  double scalar() const { return v_(0); }
  Vec3 vec3() const {
    if (group_ != Group::so3 && !(group_ == Group::rn && v_.size() == 3)) {
      throw DimensionMismatchError("AlgebraElement::vec3 on " + to_string(group_));
    }
    return v_.head<3>();
  }

  /// Same components reinterpreted in the other trivialization. Only valid for
  /// abelian groups, where both trivializations coincide.
  AlgebraElement relabel(Chirality c) const {
    if (group_ == Group::so3 || group_ == Group::se3) {
      throw ChiralityMismatchError("relabel: trivializations differ on non-abelian groups; use adjoint_Ad");
    }
    return {group_, v_, c};
  }

  AlgebraElement operator+(const AlgebraElement& o) const { return {group_, v_ + checked(o).v_, chirality_}; }
  AlgebraElement operator-(const AlgebraElement& o) const { return {group_, v_ - checked(o).v_, chirality_}; }
  AlgebraElement operator-() const { return {group_, -v_, chirality_}; }
  friend AlgebraElement operator*(double s, const AlgebraElement& a) { return {a.group_, s * a.v_, a.chirality_}; }

  const AlgebraElement& checked(const AlgebraElement& o) const {
    if (o.chirality_ != chirality_) {
      throw ChiralityMismatchError("mixed-chirality arithmetic: " + to_string(chirality_) + " vs " +
                                   to_string(o.chirality_));
    }
    if (o.group_ != group_ || o.v_.size() != v_.size()) {
      throw DimensionMismatchError("algebra elements of different groups/dimensions");
    }
    return o;
  }

 private:
  Group group_;
  Chirality chirality_;
  VecX v_;
};

/// Matrix of ad_xi acting on algebra coordinates.
inline MatX ad_matrix(Group g, const VecX& xi) {
  const auto n = xi.size();
  MatX a = MatX::Zero(n, n);
  if (g == Group::so3) {
    a = hat(xi.head<3>());
  } else if (g == Group::se3) {
    a.bottomRightCorner<3, 3>() = hat(xi.tail<3>());
  }
  return a;
}

inline AlgebraElement ad_bracket(const AlgebraElement& xi, const AlgebraElement& eta) {
  xi.checked(eta);
  return {xi.group(), ad_matrix(xi.group(), xi.vector()) * eta.vector(), xi.chirality()};
}

/// Ad_g eta = g eta g^{-1}. The output carries `out` as its chirality; by
/// default the input's (e.g. eta_r = Ad_{E^{-1}} zeta_r stays left-trivialized).
inline AlgebraElement adjoint_Ad(const GroupElement& g, const AlgebraElement& eta) {
  if (group_of(g) != eta.group() || algebra_dim(g) != eta.dim()) {
    throw DimensionMismatchError("adjoint_Ad: group " + to_string(group_of(g)) + " vs algebra " +
                                 to_string(eta.group()));
  }
  switch (group_of(g)) {
    case Group::so3:
      return AlgebraElement::so3(std::get<Rotation>(g) * eta.vec3(), eta.chirality());
    case Group::se3: {
      const auto& p = std::get<SE3Pose>(g);
      return AlgebraElement::se3(eta.vector().head<3>(), p.R * Vec3(eta.vector().tail<3>()), eta.chirality());
    }
    default:
      return eta;
  }
}

inline AlgebraElement adjoint_Ad(const GroupElement& g, const AlgebraElement& eta, Chirality out) {
  const AlgebraElement r = adjoint_Ad(g, eta);
  return {r.group(), r.vector(), out};
}

inline GroupElement group_inverse(const GroupElement& g) {
  switch (group_of(g)) {
    case Group::circle: return CircleAngle(-std::get<CircleAngle>(g).theta());
    case Group::so3: return std::get<Rotation>(g).inverse();
    case Group::se3: {
      const auto& p = std::get<SE3Pose>(g);
      return SE3Pose{-p.o, p.R.inverse()};
    }
    case Group::rn: return RnPoint{-std::get<RnPoint>(g).x};
  }
  return g;
}

inline GroupElement compose(const GroupElement& a, const GroupElement& b) {
  if (group_of(a) != group_of(b)) throw DimensionMismatchError("compose: different groups");
  switch (group_of(a)) {
    case Group::circle:
      return CircleAngle(std::get<CircleAngle>(a).theta() + std::get<CircleAngle>(b).theta());
    case Group::so3: return std::get<Rotation>(a) * std::get<Rotation>(b);
    case Group::se3: {
      const auto& p = std::get<SE3Pose>(a);
      const auto& q = std::get<SE3Pose>(b);
      return SE3Pose{p.o + q.o, p.R * q.R};
    }
    case Group::rn: {
      const auto& x = std::get<RnPoint>(a).x;
      const auto& y = std::get<RnPoint>(b).x;
      if (x.size() != y.size()) throw DimensionMismatchError("compose: R^n dimensions differ");
      return RnPoint{x + y};
    }
  }
  return a;
}

}  // namespace gpid
