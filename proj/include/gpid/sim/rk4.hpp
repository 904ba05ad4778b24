#pragma once

// Classical fixed-step Runge-Kutta and rotation-block renormalization.

#include <vector>

#include "gpid/lie.hpp"

namespace gpid::sim {

/// One classical RK4 step of x' = f(t, x). Throws NonFiniteError when any stage is not finite.
template <class F>
VecX rk4_step(F&& f, double t, const VecX& x, double h) {
  if (!(h > 0.0)) throw InvalidArgumentError("rk4_step: h must be positive");
  auto stage = [&](double ts, const VecX& xs) {
    VecX k = f(ts, xs);
    if (k.size() != x.size()) throw DimensionMismatchError("rk4_step: derivative has the wrong size");
    if (!k.allFinite()) throw NonFiniteError("rk4_step: non-finite derivative at t = " + std::to_string(ts));
    return k;
  };
  const VecX k1 = stage(t, x);
  const VecX k2 = stage(t + 0.5 * h, x + 0.5 * h * k1);
  const VecX k3 = stage(t + 0.5 * h, x + 0.5 * h * k2);
  const VecX k4 = stage(t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Rotation matrices stored column-major as 9 consecutive entries.
inline Mat3 read_rotation(const VecX& x, Eigen::Index offset) { return Eigen::Map<const Mat3>(x.data() + offset); }

inline void write_rotation(VecX& x, Eigen::Index offset, const Mat3& r) { Eigen::Map<Mat3>(x.data() + offset) = r; }

/// Polar-projects every block whose orthonormality error exceeds threshold.
/// Returns the number of blocks touched.
inline int renormalize(VecX& x, const std::vector<Eigen::Index>& blocks, double threshold) {
  int n = 0;
  for (Eigen::Index off : blocks) {
    const Mat3 r = read_rotation(x, off);
    if (orthonormality_error(r) > threshold) {
      write_rotation(x, off, polar_project(r));
      ++n;
    }
  }
  return n;
}

}  // namespace gpid::sim
