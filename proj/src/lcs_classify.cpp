#include "lcs/lcs_classify.hpp"

#include <algorithm>
#include <atomic>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "lcs/flow_map.hpp"
#include "lcs/parallel.hpp"

namespace lcs {

namespace {

double minimal_image(double d, double period) { return d - period * std::round(d / period); }

Vec3 minimal_image(const Vec3& d, const Domain& domain) {
  Vec3 out = d;
  for (int a = 0; a < 3; ++a) {
    if (domain.periodic[a]) out[a] = minimal_image(d[a], domain.period(a));
  }
  return out;
}

}  // namespace

double line_angle_deg(const Vec3& a, const Vec3& b) {
  const double c = std::abs(a.normalized().dot(b.normalized()));
  return std::acos(std::min(c, 1.0)) * 180.0 / std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Tracer spheres

std::vector<Vec3> fibonacci_sphere(int n_points) {
  if (n_points < 1) throw InvalidArgument("fibonacci_sphere: need at least one point");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> out;
  out.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n_points;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return out;
}

namespace {

EllipsoidFit ellipsoid_from_quadric(const Mat3& Q, const Vec3& center, double scale) {
  Eigen::SelfAdjointEigenSolver<Mat3> eig(Q);
  const Vec3 lam = eig.eigenvalues();  // ascending -> lengths descending
  if (!(lam[0] > 0.0)) throw ClassificationError("fit_ellipsoid: fitted quadric is not an ellipsoid");
  EllipsoidFit out;
  out.center = center;
  for (int i = 0; i < 3; ++i) {
    out.lengths[i] = scale / std::sqrt(lam[2 - i]);
    out.axes[i] = eig.eigenvectors().col(2 - i);
  }
  return out;
}

double rms_radius(const std::vector<Vec3>& points, const Vec3& c) {
  double scale = 0.0;
  for (const auto& p : points) scale += (p - c).squaredNorm();
  scale = std::sqrt(scale / static_cast<double>(points.size()));
  if (!(scale > 0.0)) throw ClassificationError("fit_ellipsoid: degenerate point cloud");
  return scale;
}

}  // namespace

EllipsoidFit fit_ellipsoid(const std::vector<Vec3>& points) {
  if (points.size() < 9) throw ClassificationError("fit_ellipsoid: need at least 9 points");
  Vec3 c = Vec3::Zero();
  for (const auto& p : points) c += p;
  c /= static_cast<double>(points.size());
  const double scale = rms_radius(points, c);

  // p^T Q p + b.p = 1 in centroid-relative, RMS-scaled coordinates.
  Eigen::MatrixXd A(points.size(), 9);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Vec3 p = (points[k] - c) / scale;
    A.row(k) << p[0] * p[0], p[1] * p[1], p[2] * p[2], 2 * p[0] * p[1], 2 * p[0] * p[2],
        2 * p[1] * p[2], p[0], p[1], p[2];
  }
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(points.size());
  const Eigen::VectorXd q = A.colPivHouseholderQr().solve(rhs);
  Mat3 Q;
  Q << q[0], q[3], q[4], q[3], q[1], q[5], q[4], q[5], q[2];
  const Vec3 b(q[6], q[7], q[8]);
  const Vec3 shift = -0.5 * Q.ldlt().solve(b);
  const double level = 1.0 + shift.dot(Q * shift);
  if (!(level > 0.0) || !shift.allFinite()) {
    throw ClassificationError("fit_ellipsoid: fitted quadric is not an ellipsoid");
  }
  return ellipsoid_from_quadric(Q / level, c + scale * shift, scale);
}

EllipsoidFit fit_centered_ellipsoid(const std::vector<Vec3>& points, const Vec3& center) {
  if (points.size() < 6) throw ClassificationError("fit_ellipsoid: need at least 6 points");
  const double scale = rms_radius(points, center);
  Eigen::MatrixXd A(points.size(), 6);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Vec3 p = (points[k] - center) / scale;
    A.row(k) << p[0] * p[0], p[1] * p[1], p[2] * p[2], 2 * p[0] * p[1], 2 * p[0] * p[2],
        2 * p[1] * p[2];
  }
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(points.size());
  const Eigen::VectorXd q = A.colPivHouseholderQr().solve(rhs);
  Mat3 Q;
  Q << q[0], q[3], q[4], q[3], q[1], q[5], q[4], q[5], q[2];
  return ellipsoid_from_quadric(Q, center, scale);
}

SphereAdvection advect_sphere(const VelocityField& field, const Vec3& center, double radius,
                              int n_points, double t0, double t1, double tol, unsigned workers) {
  if (n_points < 50) throw InvalidArgument("advect_sphere: need at least 50 tracers");
  if (!(radius > 0.0)) throw InvalidArgument("advect_sphere: radius must be > 0");
  SphereAdvection out;
  std::vector<Vec3> unit = fibonacci_sphere((n_points + 1) / 2);
  const std::size_t half = unit.size();
  for (std::size_t i = 0; i < half; ++i) unit.push_back(-unit[i]);
  for (const auto& u : unit) out.initial.push_back(center + radius * u);

  // Each tracer is carried as (centre, offset from centre) so the offset is
  // resolved relative to the sphere size rather than to |x|.
  using State = Eigen::Matrix<double, 6, 1>;
  StepperOptions opt;
  opt.atol = tol * radius;
  opt.rtol = tol;
  auto rhs = [&field](double t, const State& y, State& dy) {
    const Vec3 xc = y.head<3>();
    const Vec3 uc = field.velocity(xc, t);
    dy.head<3>() = uc;
    dy.tail<3>() = field.velocity(Vec3(xc + y.tail<3>()), t) - uc;
    return dy.allFinite();
  };
  auto pairs = parallel_map(unit.size(), workers, [&](std::size_t i) {
    State y0;
    y0 << center, radius * unit[i];
    const auto r = integrate_dopri5<6>(rhs, t0, y0, t1, opt, [](double, const State&) { return true; });
    if (r.status != StepStatus::Completed) throw FlowError(describe(r.status), r.status, r.t);
    return State(r.y);
  });
  std::vector<Vec3> offsets;
  offsets.reserve(pairs.size());
  Vec3 mean_center = Vec3::Zero();
  Vec3 mean_offset = Vec3::Zero();
  for (const auto& y : pairs) {
    out.final.push_back(y.head<3>() + y.tail<3>());
    offsets.push_back(y.tail<3>());
    mean_center += y.head<3>();
    mean_offset += y.tail<3>();
  }
  const double n = static_cast<double>(pairs.size());
  out.ellipsoid = fit_centered_ellipsoid(offsets, mean_offset / n);
  out.ellipsoid.center += mean_center / n;
  return out;
}

// ---------------------------------------------------------------------------
// Toroidal coordinates

void ToroidalFrame::validate() const {
  if (!(R1 > 0.0) || !(R2 > 0.0)) throw InvalidArgument("toroidal frame: R1 and R2 must be > 0");
  if (xc.empty() || xc.size() != yc.size()) {
    throw InvalidArgument("toroidal frame: centre tables must be non-empty and equally long");
  }
}

std::array<double, 2> ToroidalFrame::center(double z) const {
  const std::size_t n = xc.size();
  const double u = wrap_coordinate(z, 0.0, kTwoPi) / kTwoPi * static_cast<double>(n);
  std::size_t i0 = static_cast<std::size_t>(u);
  if (i0 >= n) i0 = n - 1;
  const std::size_t i1 = (i0 + 1) % n;
  const double w = u - static_cast<double>(i0);
  // Neighbouring table entries are joined by their minimal image, so tables
  // may be stored either wrapped or unwrapped.
  const double x1 = xc[i0] + minimal_image(xc[i1] - xc[i0], kTwoPi);
  const double y1 = yc[i0] + minimal_image(yc[i1] - yc[i0], kTwoPi);
  return {(1.0 - w) * xc[i0] + w * x1, (1.0 - w) * yc[i0] + w * y1};
}

ToroidalFrame ToroidalFrame::constant(double x_c, double y_c, double R1, double R2) {
  ToroidalFrame f;
  f.R1 = R1;
  f.R2 = R2;
  f.xc = {x_c};
  f.yc = {y_c};
  return f;
}

Vec3 toroidal_transform(const Vec3& x, const ToroidalFrame& frame) {
  const auto c = frame.center(x[2]);
  const double rho = x[0] - c[0] + frame.R1;
  return {rho * std::cos(x[2]), rho * std::sin(x[2]), frame.R2 * (x[1] - c[1])};
}

Vec3 inverse_toroidal_transform(const Vec3& xbar, const ToroidalFrame& frame) {
  const double z = wrap_coordinate(std::atan2(xbar[1], xbar[0]), 0.0, kTwoPi);
  const double rho = std::hypot(xbar[0], xbar[1]);
  const auto c = frame.center(z);
  return {rho - frame.R1 + c[0], xbar[2] / frame.R2 + c[1], z};
}

namespace {

// Fills NaN entries of a periodic table by linear interpolation between the
// nearest filled neighbours (minimal image on values when `angular`).
void fill_periodic(std::vector<double>& v, bool angular) {
  const int n = static_cast<int>(v.size());
  std::vector<int> filled;
  for (int i = 0; i < n; ++i) {
    if (!std::isnan(v[i])) filled.push_back(i);
  }
  if (filled.empty()) return;
  const std::vector<double> src = v;
  for (int i = 0; i < n; ++i) {
    if (!std::isnan(src[i])) continue;
    int prev = -1, next = -1;
    for (int d = 1; d <= n && prev < 0; ++d) {
      if (!std::isnan(src[((i - d) % n + n) % n])) prev = d;
    }
    for (int d = 1; d <= n && next < 0; ++d) {
      if (!std::isnan(src[(i + d) % n])) next = d;
    }
    const double a = src[((i - prev) % n + n) % n];
    double b = src[(i + next) % n];
    if (angular) b = a + minimal_image(b - a, kTwoPi);
    v[i] = a + (b - a) * prev / static_cast<double>(prev + next);
  }
}

double circular_mean(const std::vector<double>& values) {
  double sx = 0.0, sy = 0.0;
  for (double v : values) {
    sx += std::cos(v);
    sy += std::sin(v);
  }
  return wrap_coordinate(std::atan2(sy, sx), 0.0, kTwoPi);
}

}  // namespace

ToroidalFrame estimate_center_curves(const std::vector<Vec3>& points, int n_bins, double R1,
                                     double R2) {
  if (n_bins < 1) throw InvalidArgument("estimate_center_curves: need at least one bin");
  std::vector<std::vector<double>> bx(n_bins), by(n_bins);
  for (const auto& p : points) {
    const double z = wrap_coordinate(p[2], 0.0, kTwoPi);
    int k = static_cast<int>(z / kTwoPi * n_bins);
    k = std::clamp(k, 0, n_bins - 1);
    bx[k].push_back(p[0]);
    by[k].push_back(p[1]);
  }
  ToroidalFrame f;
  f.R1 = R1;
  f.R2 = R2;
  f.xc.assign(n_bins, std::numeric_limits<double>::quiet_NaN());
  f.yc.assign(n_bins, std::numeric_limits<double>::quiet_NaN());
  bool any = false;
  for (int k = 0; k < n_bins; ++k) {
    if (bx[k].empty()) continue;
    f.xc[k] = circular_mean(bx[k]);
    f.yc[k] = circular_mean(by[k]);
    any = true;
  }
  if (!any) throw ClassificationError("estimate_center_curves: no points");
  fill_periodic(f.xc, true);
  fill_periodic(f.yc, true);
  // Tables are stored unwrapped along z so interpolation never jumps a period.
  for (int k = 1; k < n_bins; ++k) {
    f.xc[k] = f.xc[k - 1] + minimal_image(f.xc[k] - f.xc[k - 1], kTwoPi);
    f.yc[k] = f.yc[k - 1] + minimal_image(f.yc[k] - f.yc[k - 1], kTwoPi);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Quad meshes

Vec3 QuadMesh::normal(int i, int j) const {
  auto vert = [&](int ii, int jj) -> Vec3 {
    Vec3 off = Vec3::Zero();
    if (ii < 0) {
      if (!periodic_i) return at(0, std::clamp(jj, 0, n_j - 1));
      ii += n_i;
      off -= seam_offset_i;
    } else if (ii >= n_i) {
      if (!periodic_i) return at(n_i - 1, std::clamp(jj, 0, n_j - 1));
      ii -= n_i;
      off += seam_offset_i;
    }
    if (jj < 0) {
      if (!periodic_j) return at(ii, 0) + off;
      jj += n_j;
      off -= seam_offset_j;
    } else if (jj >= n_j) {
      if (!periodic_j) return at(ii, n_j - 1) + off;
      jj -= n_j;
      off += seam_offset_j;
    }
    return at(ii, jj) + off;
  };
  const Vec3 ti = vert(i + 1, j) - vert(i - 1, j);
  const Vec3 tj = vert(i, j + 1) - vert(i, j - 1);
  const Vec3 n = ti.cross(tj);
  const double len = n.norm();
  if (!(len > 0.0)) throw ClassificationError("mesh normal undefined (degenerate quad)");
  return n / len;
}

double QuadMesh::area() const {
  auto vert = [&](int ii, int jj) -> Vec3 {
    Vec3 off = Vec3::Zero();
    if (ii >= n_i) {
      ii -= n_i;
      off += seam_offset_i;
    }
    if (jj >= n_j) {
      jj -= n_j;
      off += seam_offset_j;
    }
    return at(ii, jj) + off;
  };
  const int ni = periodic_i ? n_i : n_i - 1;
  const int nj = periodic_j ? n_j : n_j - 1;
  double total = 0.0;
  for (int i = 0; i < ni; ++i) {
    for (int j = 0; j < nj; ++j) {
      const Vec3 a = vert(i, j), b = vert(i + 1, j), c = vert(i + 1, j + 1), d = vert(i, j + 1);
      total += 0.5 * (b - a).cross(c - a).norm() + 0.5 * (c - a).cross(d - a).norm();
    }
  }
  return total;
}

TorusMesh fit_torus_surface(const std::vector<Vec3>& points, const ToroidalFrame& frame,
                            int n_z, int n_theta) {
  frame.validate();
  if (n_z < 3 || n_theta < 3) throw InvalidArgument("fit_torus_surface: need n_z, n_theta >= 3");
  if (points.size() < 2) throw ClassificationError("fit_torus_surface: too few points");

  const double dz = kTwoPi / n_z;
  const double dtheta = kTwoPi / n_theta;
  std::vector<double> sum(static_cast<std::size_t>(n_z) * n_theta, 0.0);
  std::vector<int> count(sum.size(), 0);
  double winding = 0.0;
  double prev_theta = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Vec3& p = points[k];
    const double z = wrap_coordinate(p[2], 0.0, kTwoPi);
    const auto c = frame.center(z);
    const double dx = minimal_image(p[0] - c[0], kTwoPi);
    const double dy = minimal_image(p[1] - c[1], kTwoPi);
    const double theta = std::atan2(dy, dx);
    if (k > 0) winding += minimal_image(theta - prev_theta, kTwoPi);
    prev_theta = theta;
    const int iz = std::clamp(static_cast<int>(z / dz), 0, n_z - 1);
    const int it = std::clamp(static_cast<int>((theta + std::numbers::pi) / dtheta), 0, n_theta - 1);
    sum[static_cast<std::size_t>(iz) * n_theta + it] += std::hypot(dx, dy);
    ++count[static_cast<std::size_t>(iz) * n_theta + it];
  }
  if (std::abs(winding) < kTwoPi) {
    throw ClassificationError("fit_torus_surface: points do not wind around the centre curve");
  }

  TorusMesh out;
  out.frame = frame;
  out.winding = winding;
  std::size_t empty = 0;
  std::vector<double> radius(sum.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t b = 0; b < sum.size(); ++b) {
    if (count[b] > 0) {
      radius[b] = sum[b] / count[b];
    } else {
      ++empty;
    }
  }
  out.empty_fraction = static_cast<double>(empty) / static_cast<double>(sum.size());
  if (out.empty_fraction > 0.5) {
    throw ClassificationError("fit_torus_surface: more than half of the bins are empty");
  }

  // Fill along theta inside each ring first, then along z for rings that are empty.
  for (int iz = 0; iz < n_z; ++iz) {
    std::vector<double> ring(radius.begin() + iz * n_theta, radius.begin() + (iz + 1) * n_theta);
    fill_periodic(ring, false);
    std::copy(ring.begin(), ring.end(), radius.begin() + iz * n_theta);
  }
  for (int it = 0; it < n_theta; ++it) {
    std::vector<double> column(n_z);
    for (int iz = 0; iz < n_z; ++iz) column[iz] = radius[static_cast<std::size_t>(iz) * n_theta + it];
    fill_periodic(column, false);
    for (int iz = 0; iz < n_z; ++iz) radius[static_cast<std::size_t>(iz) * n_theta + it] = column[iz];
  }

  QuadMesh& mesh = out.mesh;
  mesh.n_i = n_z;
  mesh.n_j = n_theta;
  mesh.periodic_i = true;
  mesh.periodic_j = true;
  mesh.vertices.resize(radius.size());
  for (int iz = 0; iz < n_z; ++iz) {
    const double z = (iz + 0.5) * dz;
    const auto c = frame.center(z);
    for (int it = 0; it < n_theta; ++it) {
      const double theta = -std::numbers::pi + (it + 0.5) * dtheta;
      const double r = radius[static_cast<std::size_t>(iz) * n_theta + it];
      mesh.vertices[static_cast<std::size_t>(iz) * n_theta + it] =
          Vec3(c[0] + r * std::cos(theta), c[1] + r * std::sin(theta), z);
    }
  }
  // Seam: continuing the centre curve past z = 2 pi lands on the first ring
  // shifted by whole periods in x and y.
  const auto c_first = frame.center(0.5 * dz);
  const auto c_last = frame.center(kTwoPi - 0.5 * dz);
  const double x_next = c_last[0] + minimal_image(c_first[0] - c_last[0], kTwoPi);
  const double y_next = c_last[1] + minimal_image(c_first[1] - c_last[1], kTwoPi);
  mesh.seam_offset_i = Vec3(x_next - c_first[0], y_next - c_first[1], kTwoPi);
  out.radii = std::move(radius);
  return out;
}

// ---------------------------------------------------------------------------
// Evidence

StretchAudit stretch_audit(const QuadMesh& mesh, const VelocityField& field, double t0,
                           double t1, double delta, double tol, unsigned workers) {
  if (!(delta >= 0.0)) throw InvalidArgument("stretch_audit: delta must be >= 0");
  struct VertexResult {
    bool evaluated = false;
    bool pass = false;
  };
  const std::size_t n = mesh.vertices.size();
  const auto results = parallel_map(n, workers, [&](std::size_t k) {
    VertexResult r;
    try {
      const int i = static_cast<int>(k) / mesh.n_j;
      const int j = static_cast<int>(k) % mesh.n_j;
      const Vec3 normal = mesh.normal(i, j);
      const Mat3 DF = advect_with_variations(field, mesh.vertices[k], t0, t1, tol).DF;
      const StrainData sd = svd3(DF);
      r.pass = stretch_band(DF, normal).within(sd.sigma[1], delta);
      r.evaluated = true;
    } catch (const std::exception&) {
      r.evaluated = false;
    }
    return r;
  });
  StretchAudit out;
  out.pass.resize(n, false);
  std::size_t passed = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!results[k].evaluated) {
      out.failed_vertices.push_back(k);
      continue;
    }
    ++out.evaluated;
    out.pass[k] = results[k].pass;
    if (results[k].pass) ++passed;
  }
  out.pass_fraction = out.evaluated ? static_cast<double>(passed) / out.evaluated : 0.0;
  return out;
}

std::array<Partner, 2> robustness_partners(DualBase base) {
  if (base == DualBase::Xi2) return {Partner::Xi1, Partner::Xi3};
  return {Partner::Eta3, Partner::Eta1};
}

double section_distance(const SectionPoints& a, const SectionPoints& b, const Domain& domain,
                        const SectionSpec& section) {
  const auto ax = section.plane_axes();
  double period = 0.0;
  if (domain.periodic[ax[0]] && domain.periodic[ax[1]] &&
      domain.period(ax[0]) == domain.period(ax[1])) {
    period = domain.period(ax[0]);
  }
  return cloud_distance(planar_points(a), planar_points(b), period);
}

RobustnessResult perturbation_robustness(const DualFieldSpec& base_spec,
                                         const VelocityField& field, const Vec3& seed,
                                         const RobustnessSettings& settings, unsigned workers) {
  const auto partners = robustness_partners(base_spec.base);
  std::array<DualFieldSpec, 3> specs{base_spec, base_spec, base_spec};
  specs[0].blend.reset();
  specs[1].blend = Blend{settings.epsilon, partners[0]};
  specs[2].blend = Blend{settings.epsilon, partners[1]};
  for (const auto& s : specs) s.validate();

  // Blended lines first: once any line falls short the rest are skipped.
  constexpr std::array<std::size_t, 3> order{1, 2, 0};
  std::atomic<bool> short_line{false};
  auto done = parallel_map(3, workers, [&](std::size_t j) {
    const std::size_t k = order[j];
    if (short_line) return std::optional<DirectionLine>{};
    DirectionLine l = integrate_line(specs[k], field, seed, settings.initial_orientation, settings.line);
    if (l.length() < settings.window.hi) short_line = true;
    return std::optional<DirectionLine>(std::move(l));
  });
  std::array<std::optional<DirectionLine>, 3> lines;
  for (std::size_t j = 0; j < 3; ++j) lines[order[j]] = std::move(done[j]);
  const char* names[3] = {"unperturbed", "tangent-blend", "normal-blend"};
  for (std::size_t k : order) {
    if (lines[k] && lines[k]->length() < settings.window.hi) {
      throw ClassificationError("perturbation_robustness: " + std::string(names[k]) +
                                " line ended at s=" + std::to_string(lines[k]->length()) + " (" +
                                std::string(to_string(lines[k]->termination)) + ": " +
                                lines[k]->detail + ") before the window was complete");
    }
  }
  RobustnessResult out;
  for (std::size_t k = 0; k < 3; ++k) {
    out.sections[k] = dual_section({*lines[k]}, settings.window, settings.section, field.domain());
    out.lines[k] = std::move(*lines[k]);
  }
  out.distance_tangent =
      section_distance(out.sections[0], out.sections[1], field.domain(), settings.section);
  out.distance_normal =
      section_distance(out.sections[0], out.sections[2], field.domain(), settings.section);
  return out;
}

LocalPlane local_plane(const std::vector<LineVertex>& vertices, const Vec3& center,
                       double radius, const Domain& domain) {
  std::vector<Vec3> near;
  for (const auto& v : vertices) {
    const Vec3 d = minimal_image(Vec3(v.x - center), domain);
    if (d.norm() <= radius) near.push_back(d);
  }
  LocalPlane out;
  out.center = center;
  out.neighbours = near.size();
  if (near.size() < 5) throw ClassificationError("local_plane: fewer than 5 neighbouring vertices");
  Vec3 mean = Vec3::Zero();
  for (const auto& d : near) mean += d;
  mean /= static_cast<double>(near.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& d : near) cov += (d - mean) * (d - mean).transpose();
  cov /= static_cast<double>(near.size());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 lam = eig.eigenvalues();
  out.normal = eig.eigenvectors().col(0);
  out.planarity = lam[2] > 0.0 ? lam[1] / lam[2] : 0.0;
  out.flatness = lam[1] > 0.0 ? lam[0] / lam[1] : 1.0;
  return out;
}

LocalPlane best_local_plane(const DirectionLine& line, const Interval& window, double radius,
                            const Domain& domain, int candidates) {
  std::vector<std::size_t> in_window;
  for (std::size_t k = 0; k < line.vertices.size(); ++k) {
    if (window.contains(line.vertices[k].s)) in_window.push_back(k);
  }
  if (in_window.empty()) throw ClassificationError("best_local_plane: no vertices in the window");
  std::vector<LineVertex> window_vertices;
  window_vertices.reserve(in_window.size());
  for (std::size_t k : in_window) window_vertices.push_back(line.vertices[k]);

  std::optional<LocalPlane> best;
  double best_score = -std::numeric_limits<double>::infinity();
  const int m = std::max(1, candidates);
  for (int c = 0; c < m; ++c) {
    const std::size_t k = in_window[(in_window.size() - 1) * (2 * c + 1) / (2 * m)];
    try {
      const LocalPlane p = local_plane(window_vertices, line.vertices[k].x, radius, domain);
      const double score = p.planarity - p.flatness;
      if (score > best_score) {
        best_score = score;
        best = p;
      }
    } catch (const ClassificationError&) {
    }
  }
  if (!best) throw ClassificationError("best_local_plane: no candidate with enough neighbours");
  return *best;
}

std::string_view to_string(LcsType t) {
  switch (t) {
    case LcsType::RepellingHyperbolic: return "RepellingHyperbolic";
    case LcsType::AttractingHyperbolic: return "AttractingHyperbolic";
    case LcsType::Elliptic: return "Elliptic";
    case LcsType::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

SphereAlignment repelling_sphere_alignment(const VelocityField& field, const LocalPlane& plane,
                                           double t0, double dt, double radius, int n_points,
                                           double tol, unsigned workers) {
  SphereAlignment out;
  out.plane = plane;
  out.sphere = advect_sphere(field, plane.center, radius, n_points, t0, t0 + dt, tol, workers);
  const Mat3 DF = advect_with_variations(field, plane.center, t0, t0 + dt, tol).DF;
  out.reference_normal = repulsion_and_shear(DF, plane.normal.normalized()).n1;
  out.angle_deg = line_angle_deg(out.sphere.ellipsoid.axes[2], out.reference_normal);
  return out;
}

SphereAlignment attracting_sphere_alignment(const VelocityField& field, const LocalPlane& plane,
                                            double t1, double dt, double radius, int n_points,
                                            double tol, unsigned workers) {
  SphereAlignment out;
  out.plane = plane;
  const Vec3 pulled_back = advect(field, plane.center, t1, t1 - dt, tol);
  out.sphere = advect_sphere(field, pulled_back, radius, n_points, t1 - dt, t1, tol, workers);
  out.reference_normal = plane.normal.normalized();
  out.angle_deg = line_angle_deg(out.sphere.ellipsoid.axes[0], out.reference_normal);
  return out;
}

CandidateVerdict hyperbolic_verdict(DualBase base, const RobustnessResult& robustness,
                                    const SphereAlignment& alignment,
                                    const HyperbolicThresholds& thresholds) {
  CandidateVerdict v;
  const auto partners = robustness_partners(base);
  v.evidence.push_back({"tangent_perturbation_distance", robustness.distance_tangent,
                        thresholds.tangent_max,
                        robustness.distance_tangent <= thresholds.tangent_max,
                        "dual section of the " + std::string(to_string(partners[0])) +
                            "-blended line vs the unperturbed line"});
  v.evidence.push_back({"normal_perturbation_distance", robustness.distance_normal,
                        thresholds.normal_factor * thresholds.tangent_max,
                        robustness.distance_normal >= thresholds.normal_factor * thresholds.tangent_max,
                        "dual section of the " + std::string(to_string(partners[1])) +
                            "-blended line vs the unperturbed line"});
  v.evidence.push_back({"sphere_axis_angle_deg", alignment.angle_deg, thresholds.max_angle_deg,
                        alignment.angle_deg <= thresholds.max_angle_deg,
                        base == DualBase::Xi2
                            ? "ellipsoid major axis vs advected surface normal"
                            : "ellipsoid minor axis vs final-time surface normal"});
  const bool all = std::all_of(v.evidence.begin(), v.evidence.end(),
                               [](const EvidenceItem& e) { return e.supports; });
  if (all) {
    v.type = base == DualBase::Xi2 ? LcsType::RepellingHyperbolic : LcsType::AttractingHyperbolic;
  }
  return v;
}

CandidateVerdict elliptic_verdict(const TorusMesh& torus, const StretchAudit& audit,
                                  double majority) {
  CandidateVerdict v;
  v.evidence.push_back({"torus_empty_bin_fraction", torus.empty_fraction, 0.5,
                        torus.empty_fraction <= 0.5, "tube fit around the centre curve"});
  v.evidence.push_back({"torus_winding_turns", std::abs(torus.winding) / kTwoPi, 1.0,
                        std::abs(torus.winding) >= kTwoPi, "poloidal turns of the input points"});
  v.evidence.push_back({"stretch_audit_pass_fraction", audit.pass_fraction, majority,
                        audit.pass_fraction > majority, "near-uniform stretching at mesh vertices"});
  const bool all = std::all_of(v.evidence.begin(), v.evidence.end(),
                               [](const EvidenceItem& e) { return e.supports; });
  if (all) v.type = LcsType::Elliptic;
  return v;
}

}  // namespace lcs
