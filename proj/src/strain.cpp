#include "lcs/strain.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/SVD>

namespace lcs {

namespace {

int largest_component(const Vec3& v) {
  int k = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(v[i]) > std::abs(v[k])) k = i;
  }
  return k;
}

void check_unit(const Vec3& n, const char* who) {
  if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-8) {
    throw InvalidArgument(std::string(who) + ": normal must be a unit vector");
  }
}

}  // namespace

StrainData svd3(const Mat3& DF) {
  if (!DF.allFinite()) throw InvalidArgument("svd3: non-finite deformation gradient");
  Eigen::JacobiSVD<Mat3> svd(DF, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();  // descending
  if (!(s[2] > std::numeric_limits<double>::epsilon() * s[0]) || !(s[0] > 0.0)) {
    throw InvalidArgument("svd3: rank-deficient deformation gradient");
  }
  const Mat3& U = svd.matrixU();
  const Mat3& V = svd.matrixV();

  // Ties keep the input axis order (identity -> e1, e2, e3).
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return s[a] < s[b]; });

  StrainData out;
  for (int i = 0; i < 3; ++i) {
    const int k = order[i];
    out.sigma[i] = s[k];
    Vec3 xi = V.col(k);
    Vec3 eta = U.col(k);
    if (xi[largest_component(xi)] < 0.0) {
      xi = -xi;
      eta = -eta;
    }
    out.xi[i] = xi;
    out.eta[i] = eta;
  }
  out.gap = std::min(out.sigma[1] - out.sigma[0], out.sigma[2] - out.sigma[1]);
  return out;
}

double ftle(double sigma3, double t0, double t1) {
  if (t1 == t0) throw InvalidArgument("ftle: zero horizon");
  if (!(sigma3 > 0.0)) throw InvalidArgument("ftle: sigma3 must be positive");
  return std::log(sigma3) / (t1 - t0);
}

UnityCheck sigma2_nearest_unity_check(const std::array<double, 3>& sigma) {
  if (!(0.0 < sigma[0] && sigma[0] < sigma[1] && sigma[1] < sigma[2])) {
    throw InvalidArgument("sigma2_nearest_unity_check: singular values must satisfy 0 < s1 < s2 < s3");
  }
  // Geometric mean via logs keeps the product from overflowing for large stretch.
  const double log_m = (std::log(sigma[0]) + std::log(sigma[1]) + std::log(sigma[2])) / 3.0;
  const double m = std::exp(log_m);
  const double a = sigma[0] / m;
  const double b = sigma[1] / m;
  const double c = sigma[2] / m;
  UnityCheck out;
  out.min_ratio = std::min(b, 1.0 / b);
  out.max_ratio = std::max(b, 1.0 / b);
  out.lower_slack = std::log(out.min_ratio / a);
  out.upper_slack = std::log(c / out.max_ratio);
  out.holds = a < out.min_ratio && out.min_ratio <= 1.0 && 1.0 <= out.max_ratio &&
              out.max_ratio < c;
  return out;
}

RepulsionShear repulsion_and_shear(const Mat3& DF, const Vec3& n0) {
  check_unit(n0, "repulsion_and_shear");
  if (!(DF.determinant() > 0.0)) throw InvalidArgument("repulsion_and_shear: det(DF) must be > 0");
  const Vec3 v1 = DF * n0;
  // Advected normal: inverse transpose, computed by a solve rather than an explicit inverse.
  Vec3 n1 = DF.transpose().partialPivLu().solve(n0);
  n1.normalize();
  RepulsionShear out;
  out.n1 = n1;
  out.rho = v1.dot(n1);
  out.shear = (v1 - out.rho * n1).norm();
  return out;
}

Vec3 any_orthogonal(const Vec3& n) {
  // Cross with the axis least aligned with n.
  int k = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(n[i]) < std::abs(n[k])) k = i;
  }
  Vec3 axis = Vec3::Zero();
  axis[k] = 1.0;
  return n.cross(axis).normalized();
}

StretchBand stretch_band(const Mat3& DF, const Vec3& n0) {
  check_unit(n0, "stretch_band");
  if (!DF.allFinite()) throw InvalidArgument("stretch_band: non-finite deformation gradient");
  const Vec3 ea = any_orthogonal(n0);
  const Vec3 eb = n0.cross(ea).normalized();
  // ||DF (cos t ea + sin t eb)||^2 = p + q cos 2t + r sin 2t, whose extremes are p +- hypot(q, r).
  const Vec3 fa = DF * ea;
  const Vec3 fb = DF * eb;
  const double gaa = fa.squaredNorm();
  const double gbb = fb.squaredNorm();
  const double gab = fa.dot(fb);
  const double p = 0.5 * (gaa + gbb);
  const double amp = std::hypot(0.5 * (gaa - gbb), gab);
  StretchBand out;
  out.lambda_max = std::sqrt(p + amp);
  // lambda_min * lambda_max = area scaling of the plane; avoids cancellation in p - amp.
  out.lambda_min = out.lambda_max > 0.0 ? fa.cross(fb).norm() / out.lambda_max : 0.0;
  return out;
}

}  // namespace lcs
