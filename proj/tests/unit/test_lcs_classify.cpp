#include <cmath>
#include <random>

#include "doctest.h"
#include "lcs/flow_map.hpp"
#include "lcs/lcs_classify.hpp"
#include "oracles.hpp"

using namespace lcs;

namespace {

// Rigid rotation about the z axis.
VelocityField rotation_field(double omega) {
  Mat3 W = Mat3::Zero();
  W(0, 1) = -omega;
  W(1, 0) = omega;
  return VelocityField::linear(W);
}

std::vector<Vec3> torus_points(double xc, double yc, double r0, int n, double noise,
                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, kTwoPi);
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<Vec3> pts;
  // A helix winds poloidally many times while advancing in z.
  for (int k = 0; k < n; ++k) {
    const double z = kTwoPi * k / n;
    const double th = 37.0 * z + 0.1 * U(rng);
    const double r = r0 * (1.0 + noise * N(rng));
    pts.emplace_back(xc + r * std::cos(th), yc + r * std::sin(th), z);
  }
  return pts;
}

}  // namespace

TEST_CASE("fibonacci sphere") {
  const auto pts = fibonacci_sphere(200);
  CHECK(pts.size() == 200);
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) {
    CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-14));
    mean += p;
  }
  CHECK(mean.norm() / 200 < 1e-2);
  CHECK_THROWS_AS(fibonacci_sphere(0), InvalidArgument);
}

TEST_CASE("ellipsoid fit recovers exact ellipsoids") {
  std::mt19937_64 rng(4);
  const Mat3 R = oracle::random_rotation(rng);
  const Vec3 L(0.5, 1.0, 3.0);
  const Vec3 c(1.0, -2.0, 0.5);
  std::vector<Vec3> pts;
  for (const auto& u : fibonacci_sphere(300)) pts.push_back(c + R * L.asDiagonal() * u);
  const auto fit = fit_ellipsoid(pts);
  for (int i = 0; i < 3; ++i) {
    CHECK(fit.lengths[i] == doctest::Approx(L[i]).epsilon(1e-10));
    CHECK(oracle::line_angle_deg(fit.axes[i], R.col(i)) < 1e-6);
  }
  CHECK((fit.center - c).norm() < 1e-10);

  // Points on a small piece of the surface only: the centre is still recovered.
  std::vector<Vec3> cap;
  for (const auto& u : fibonacci_sphere(2000)) {
    if (u[2] > 0.3) cap.push_back(c + R * L.asDiagonal() * u);
  }
  const auto cap_fit = fit_ellipsoid(cap);
  CHECK((cap_fit.center - c).norm() < 1e-8);
  CHECK(cap_fit.lengths[2] == doctest::Approx(L[2]).epsilon(1e-8));
  CHECK_THROWS_AS(fit_ellipsoid({Vec3::Zero(), Vec3::UnitX()}), ClassificationError);
}

TEST_CASE("rigid rotation maps a sphere to a sphere") {
  const auto f = rotation_field(0.7);
  const auto adv = advect_sphere(f, Vec3(1.0, 0.5, 0.0), 1e-3, 200, 0.0, 3.0);
  const auto& L = adv.ellipsoid.lengths;
  CHECK(L[2] / L[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(L[1] / 1e-3 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(advect_sphere(f, Vec3::Zero(), 1e-3, 20, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("linear flows map the tracer sphere onto an exact ellipsoid") {
  Mat3 M;
  M << 0.3, 0.5, 0.0, -0.2, 0.1, 0.4, 0.1, 0.0, -0.4;
  const auto f = VelocityField::linear(M);
  const Vec3 x0(0.2, -0.1, 0.3);
  const double r = 1e-2;
  const auto adv = advect_sphere(f, x0, r, 201, 0.0, 2.0, 1e-10);
  CHECK(adv.initial.size() == 202);  // antipodal pairs
  const Mat3 F = oracle::expm(2.0 * M);
  const auto sig = oracle::symmetric_eigenvalues(Mat3(F.transpose() * F));
  for (int i = 0; i < 3; ++i) {
    CHECK(adv.ellipsoid.lengths[i] / r == doctest::Approx(std::sqrt(sig[i])).epsilon(1e-7));
  }
  CHECK((adv.ellipsoid.center - F * x0).norm() < 1e-8);
}

TEST_CASE("small spheres follow the linearised flow map") {
  const auto f = VelocityField::steady_abc();
  const Vec3 x0(1.0, 2.0, 3.0);
  const FlowSample s = advect_with_variations(f, x0, 0.0, 2.0);
  const StrainData sd = svd3(s.DF);
  const auto adv = advect_sphere(f, x0, 1e-3, 200, 0.0, 2.0, 1e-10, 2);
  for (int i = 0; i < 3; ++i) {
    CHECK(adv.ellipsoid.lengths[i] / 1e-3 == doctest::Approx(sd.sigma[i]).epsilon(1e-2));
    CHECK(oracle::line_angle_deg(adv.ellipsoid.axes[i], sd.eta[i]) < 1.0);
  }
}

TEST_CASE("toroidal transform") {
  const auto frame = ToroidalFrame::constant(1.0, 2.0);
  const Vec3 a = toroidal_transform(Vec3(1.0, 2.0, 0.0), frame);
  CHECK((a - Vec3(2, 0, 0)).norm() < 1e-15);
  const Vec3 b = toroidal_transform(Vec3(1.0, 2.0, M_PI / 2), frame);
  CHECK((b - Vec3(0, 2, 0)).norm() < 1e-15);
  CHECK(toroidal_transform(Vec3(1.0, 3.0, 0.4), frame)[2] == doctest::Approx(1.0));

  ToroidalFrame wavy;
  for (int k = 0; k < 64; ++k) {
    const double z = kTwoPi * k / 64;
    wavy.xc.push_back(3.0 + 0.3 * std::sin(z));
    wavy.yc.push_back(1.0 + 0.2 * std::cos(2 * z));
  }
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.0, kTwoPi), D(-1.5, 1.5);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double z = U(rng);
    const auto c = wavy.center(z);
    const Vec3 x(c[0] + D(rng), c[1] + D(rng), z);
    worst = std::max(worst, (inverse_toroidal_transform(toroidal_transform(x, wavy), wavy) - x).norm());
  }
  CHECK(worst <= 1e-12);

  ToroidalFrame bad = frame;
  bad.R1 = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("centre curves are interpolated across the period seam") {
  ToroidalFrame f;
  f.xc = {6.2, 6.25, 0.02, 0.05};  // crosses x = 2 pi between entries
  f.yc = {1.0, 1.0, 1.0, 1.0};
  const auto c = f.center(kTwoPi * 1.5 / 4);
  const double expected = 6.25 + 0.5 * (0.02 + kTwoPi - 6.25);
  CHECK(std::remainder(c[0] - expected, kTwoPi) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("centre curve estimate of a tube") {
  std::mt19937_64 rng(12);
  const auto pts = torus_points(3.0, 2.0, 0.4, 20000, 0.0, rng);
  const auto frame = estimate_center_curves(pts, 16);
  for (std::size_t k = 0; k < frame.xc.size(); ++k) {
    CHECK(frame.xc[k] == doctest::Approx(3.0).epsilon(2e-2));
    CHECK(frame.yc[k] == doctest::Approx(2.0).epsilon(2e-2));
  }
}

TEST_CASE("torus fit") {
  std::mt19937_64 rng(21);
  const auto frame = ToroidalFrame::constant(3.0, 2.0);
  const auto exact = fit_torus_surface(torus_points(3.0, 2.0, 0.4, 10000, 0.0, rng), frame, 12, 16);
  CHECK(exact.empty_fraction == 0.0);
  CHECK(std::abs(exact.winding) >= kTwoPi);
  for (double r : exact.radii) CHECK(r == doctest::Approx(0.4).epsilon(1e-6));
  // Mesh normals point radially for a straight tube.
  for (int i = 0; i < exact.mesh.n_i; ++i) {
    for (int j = 0; j < exact.mesh.n_j; ++j) {
      const Vec3 radial = exact.mesh.at(i, j) - Vec3(3.0, 2.0, exact.mesh.at(i, j)[2]);
      CHECK(oracle::line_angle_deg(exact.mesh.normal(i, j), radial) < 1e-6);
    }
  }
  // Polygonal cross sections slightly under-estimate 2 pi r L.
  CHECK(exact.mesh.area() == doctest::Approx(kTwoPi * 0.4 * kTwoPi).epsilon(0.03));

  const double noise = 0.01;
  const auto noisy = fit_torus_surface(torus_points(3.0, 2.0, 0.4, 10000, noise, rng), frame, 12, 16);
  for (double r : noisy.radii) CHECK(std::abs(r - 0.4) <= 3.0 * noise * 0.4);

  // A cloud that sits on one side of the centre never winds around it.
  std::vector<Vec3> side;
  for (int k = 0; k < 1000; ++k) side.emplace_back(3.5, 2.0 + 0.1 * std::sin(0.01 * k), kTwoPi * k / 1000.0);
  CHECK_THROWS_AS(fit_torus_surface(side, frame, 12, 16), ClassificationError);

  // Winding, but only in a thin z slab: most bins stay empty.
  std::vector<Vec3> slab;
  for (int k = 0; k < 1000; ++k) {
    const double th = 0.1 * k;
    slab.emplace_back(3.0 + 0.4 * std::cos(th), 2.0 + 0.4 * std::sin(th), 0.1);
  }
  CHECK_THROWS_AS(fit_torus_surface(slab, frame, 12, 16), ClassificationError);
}

TEST_CASE("stretch audit") {
  std::mt19937_64 rng(2);
  const auto frame = ToroidalFrame::constant(0.0, 0.0);
  const auto torus = fit_torus_surface(torus_points(0.0, 0.0, 0.5, 4000, 0.0, rng), frame, 6, 8);

  const auto rigid = stretch_audit(torus.mesh, rotation_field(0.4), 0.0, 2.0, 0.0);
  CHECK(rigid.evaluated == torus.mesh.vertices.size());
  CHECK(rigid.pass_fraction == 1.0);

  // u = (a x, -a y, 0): DF = diag(e^{aT}, e^{-aT}, 1). With the normal e1 the
  // tangent plane (e2, e3) stretches over [e^{-aT}, 1] and sigma2 = 1.
  const double a = 0.1, T = 1.0;
  QuadMesh plane;
  plane.n_i = 3;
  plane.n_j = 3;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) plane.vertices.emplace_back(0.0, 0.1 * i, 0.1 * j);
  const auto stretch = VelocityField::linear(Vec3(a, -a, 0.0).asDiagonal());
  const double needed = 1.0 - std::exp(-a * T);
  CHECK(stretch_audit(plane, stretch, 0.0, T, needed * 1.01).pass_fraction == 1.0);
  CHECK(stretch_audit(plane, stretch, 0.0, T, needed * 0.99).pass_fraction == 0.0);
  CHECK(oracle::line_angle_deg(plane.normal(1, 1), Vec3::UnitX()) < 1e-12);
}

TEST_CASE("robustness partners and section distance symmetry") {
  CHECK(robustness_partners(DualBase::Xi2)[0] == Partner::Xi1);
  CHECK(robustness_partners(DualBase::Xi2)[1] == Partner::Xi3);
  CHECK(robustness_partners(DualBase::Eta2)[0] == Partner::Eta3);
  CHECK(robustness_partners(DualBase::Eta2)[1] == Partner::Eta1);

  SectionPoints a, b;
  a.rows = {{0, 1.0, 0.5, 0.5, 0.0}, {0, 2.0, 1.5, 0.5, 0.0}};
  b.rows = {{0, 1.0, 0.6, 0.5, 0.0}};
  const Domain d = Domain::torus2pi();
  SectionSpec s;
  CHECK(section_distance(a, b, d, s) == section_distance(b, a, d, s));
  CHECK(section_distance(a, a, d, s) == 0.0);
}

TEST_CASE("perturbation robustness on a field with constant singular vectors") {
  // xi1 = e3, xi2 = e2, xi3 = e1 everywhere; the section plane is y = 0 (mod 2 pi).
  const auto f = VelocityField::linear(Vec3(0.3, -0.1, -0.2).asDiagonal());
  DualFieldSpec spec;
  spec.t0 = 0.0;
  spec.t1 = 1.0;
  RobustnessSettings rs;
  rs.epsilon = 0.01;
  rs.line.s_max = 200.0;
  rs.window = {100.0, 200.0};
  rs.section.axis = 1;
  rs.section.rule = CrossingRule::Interpolate;
  rs.initial_orientation = Vec3::UnitY();
  const Vec3 seed(0.5, 0.0, 0.25);
  const auto r = perturbation_robustness(spec, f, seed, rs, 3);
  CHECK(r.lines[0].termination == Termination::ReachedSmax);

  // Unperturbed crossings all sit at the seed's (x, z). A blended line moves
  // off by eps per unit y, so its k-th plane crossing is offset by 2 pi k eps.
  const auto& blended = r.sections[1].rows;
  REQUIRE_FALSE(blended.empty());
  REQUIRE_FALSE(r.sections[0].rows.empty());
  double mean_offset = 0.0, min_offset = INFINITY;
  for (const auto& p : blended) {
    const double k = std::round(p.stamp / (kTwoPi * std::sqrt(1.0 + 1e-4)));
    const double off = kTwoPi * k * rs.epsilon;
    mean_offset += off;
    min_offset = std::min(min_offset, off);
    CHECK(p.a == doctest::Approx(seed[0]).epsilon(1e-9));
    CHECK(p.b - seed[2] == doctest::Approx(off).epsilon(1e-6));
  }
  mean_offset /= blended.size();
  const double expected = 0.5 * (mean_offset + min_offset);
  CHECK(r.distance_tangent == doctest::Approx(expected).epsilon(1e-6));
  CHECK(r.distance_normal == doctest::Approx(expected).epsilon(1e-6));

  rs.line.s_max = 150.0;
  CHECK_THROWS_AS(perturbation_robustness(spec, f, seed, rs), ClassificationError);
}

TEST_CASE("local plane of a sheet-filling polyline") {
  DirectionLine line;
  const Vec3 n = Vec3(1.0, 1.0, 0.2).normalized();
  const Vec3 e1 = any_orthogonal(n), e2 = n.cross(e1);
  double s = 0.0;
  for (int k = 0; k < 5000; ++k) {
    const double u = std::sin(0.37 * k), v = std::cos(0.11 * k);
    line.vertices.push_back({s, Vec3(3, 3, 3) + u * e1 + v * e2});
    s += 1.0;
  }
  const auto p = local_plane(line.vertices, Vec3(3, 3, 3), 0.5, Domain::torus2pi());
  CHECK(p.neighbours > 100);
  CHECK(oracle::line_angle_deg(p.normal, n) < 1e-6);
  CHECK(p.flatness < 1e-12);
  const auto best = best_local_plane(line, {0.0, s}, 0.5, Domain::torus2pi());
  CHECK(oracle::line_angle_deg(best.normal, n) < 1e-6);
  CHECK_THROWS_AS(local_plane(line.vertices, Vec3(0, 0, 0), 1e-3, Domain{}), ClassificationError);
}

TEST_CASE("verdicts need every piece of evidence") {
  RobustnessResult r;
  r.distance_tangent = 0.01;
  r.distance_normal = 0.2;
  SphereAlignment al;
  al.angle_deg = 3.0;
  HyperbolicThresholds th;
  th.tangent_max = 0.02;
  auto v = hyperbolic_verdict(DualBase::Xi2, r, al, th);
  CHECK(v.type == LcsType::RepellingHyperbolic);
  CHECK(v.evidence.size() >= 2);
  CHECK(hyperbolic_verdict(DualBase::Eta2, r, al, th).type == LcsType::AttractingHyperbolic);
  r.distance_normal = 0.05;
  CHECK(hyperbolic_verdict(DualBase::Xi2, r, al, th).type == LcsType::Undetermined);
  r.distance_normal = 0.2;
  al.angle_deg = 20.0;
  CHECK(hyperbolic_verdict(DualBase::Xi2, r, al, th).type == LcsType::Undetermined);

  TorusMesh t;
  t.empty_fraction = 0.1;
  t.winding = 4 * kTwoPi;
  StretchAudit audit;
  audit.pass_fraction = 0.8;
  auto e = elliptic_verdict(t, audit);
  CHECK(e.type == LcsType::Elliptic);
  CHECK(e.evidence.size() >= 2);
  audit.pass_fraction = 0.3;
  CHECK(elliptic_verdict(t, audit).type == LcsType::Undetermined);
}

TEST_CASE("sphere alignment for a hyperbolic linear flow") {
  // u = (a x, -a y, 0): the plane x = 0 is repelling with normal e1.
  const auto f = VelocityField::linear(Vec3(0.5, -0.5, 0.0).asDiagonal());
  LocalPlane plane;
  plane.center = Vec3(0.0, 0.3, 0.2);
  plane.normal = Vec3::UnitX();
  const auto rep = repelling_sphere_alignment(f, plane, 0.0, 1.0, 1e-3, 100, 1e-10);
  CHECK(rep.angle_deg < 1e-3);
  // The plane y = 0 is attracting; its normal e2 is the contracted direction.
  plane.normal = Vec3::UnitY();
  const auto att = attracting_sphere_alignment(f, plane, 5.0, 1.0, 1e-3, 100, 1e-10);
  CHECK(att.angle_deg < 1e-3);
}
