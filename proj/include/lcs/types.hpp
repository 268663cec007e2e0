#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lcs {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Axis-aligned box with per-axis periodicity. Periodic axes span [lo, lo + period).
struct Domain {
  std::array<bool, 3> periodic{false, false, false};
  std::array<double, 3> lo{-std::numeric_limits<double>::infinity(),
                           -std::numeric_limits<double>::infinity(),
                           -std::numeric_limits<double>::infinity()};
  std::array<double, 3> hi{std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};

  double period(int axis) const { return hi[axis] - lo[axis]; }

  /// True if every non-periodic coordinate lies inside [lo, hi].
  bool contains(const Vec3& x) const {
    for (int i = 0; i < 3; ++i) {
      if (!periodic[i] && (x[i] < lo[i] || x[i] > hi[i])) return false;
    }
    return true;
  }

  static Domain torus2pi() {
    Domain d;
    d.periodic = {true, true, true};
    d.lo = {0.0, 0.0, 0.0};
    d.hi = {kTwoPi, kTwoPi, kTwoPi};
    return d;
  }
};

/// Wraps a scalar into [lo, lo + period).
inline double wrap_coordinate(double v, double lo, double period) {
  double r = v - lo;
  if (r >= 0.0 && r < period) return v;
  r -= period * std::floor(r / period);
  // Rounding can land exactly on `period` (or a hair outside) for tiny negatives.
  if (r >= period || r < 0.0) r = 0.0;
  return lo + r;
}

/// Wraps periodic axes into [lo, lo + period); unbounded axes pass through.
inline Vec3 wrap_periodic(const Vec3& x, const Domain& domain) {
  Vec3 out = x;
  for (int i = 0; i < 3; ++i) {
    if (domain.periodic[i]) out[i] = wrap_coordinate(x[i], domain.lo[i], domain.period(i));
  }
  return out;
}

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

/// Thrown when an input violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace lcs
