#pragma once

#include <array>

#include "lcs/types.hpp"

namespace lcs {

inline constexpr double kDegenerateGapRatio = 1e-10;

/// SVD of a deformation gradient, singular values ascending.
///
/// DF * xi[i] = sigma[i] * eta[i]. Each xi[i] is oriented so that its
/// largest-magnitude component is positive and eta[i] follows along. This is a
/// canonical convention only; orientation along curves is handled by
/// direction_field.
struct StrainData {
  std::array<double, 3> sigma{};
  std::array<Vec3, 3> xi;
  std::array<Vec3, 3> eta;
  double gap = 0.0;  // min(sigma2 - sigma1, sigma3 - sigma2)

  bool degenerate() const { return gap < kDegenerateGapRatio * sigma[2]; }
  /// Eigenvalues of the right Cauchy-Green tensor, derived as sigma^2.
  std::array<double, 3> cauchy_green_eigenvalues() const {
    return {sigma[0] * sigma[0], sigma[1] * sigma[1], sigma[2] * sigma[2]};
  }
};

/// Singular value decomposition of a 3x3 deformation gradient with
/// det(DF) > 0. Throws InvalidArgument for non-finite or rank-deficient input.
StrainData svd3(const Mat3& DF);

/// Finite-time Lyapunov exponent (t1 - t0)^-1 log(sigma3).
double ftle(double sigma3, double t0, double t1);

/// Ordering check for the intermediate singular value: after normalising by
/// the geometric mean m, sigma1/m < min(s, 1/s) <= 1 <= max(s, 1/s) < sigma3/m
/// with s = sigma2/m.
struct UnityCheck {
  bool holds = false;
  double lower_slack = 0.0;  // log(min(s, 1/s) / (sigma1/m))
  double upper_slack = 0.0;  // log((sigma3/m) / max(s, 1/s))
  double min_ratio = 0.0;    // min(s, 1/s)
  double max_ratio = 0.0;    // max(s, 1/s)
};
UnityCheck sigma2_nearest_unity_check(const std::array<double, 3>& sigma);

struct RepulsionShear {
  double rho = 0.0;
  double shear = 0.0;
  Vec3 n1;
};

/// Normal repulsion and tangential shear of a unit surface normal n0 under DF.
RepulsionShear repulsion_and_shear(const Mat3& DF, const Vec3& n0);

struct StretchBand {
  double lambda_min = 0.0;
  double lambda_max = 0.0;

  /// [lambda_min, lambda_max] inside [sigma2 (1 - delta), sigma2 (1 + delta)],
  /// widened by a relative `slack` for the error of a numerically solved DF.
  bool within(double sigma2, double delta, double slack = 1e-6) const {
    return lambda_min >= sigma2 * (1.0 - delta - slack) &&
           lambda_max <= sigma2 * (1.0 + delta + slack);
  }
};

/// Extremal stretch factors ||DF e|| over unit tangent vectors e orthogonal to n0.
StretchBand stretch_band(const Mat3& DF, const Vec3& n0);

/// Unit vector orthogonal to n (deterministic choice).
Vec3 any_orthogonal(const Vec3& n);

}  // namespace lcs
