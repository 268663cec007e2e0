#include <cmath>
#include <random>

#include "doctest.h"
#include "lcs/direction_field.hpp"
#include "lcs/flow_map.hpp"
#include "oracles.hpp"

using namespace lcs;

namespace {

// u = diag(0.3, -0.1, -0.2) x: xi1 = e3, xi2 = e2, xi3 = e1 everywhere.
VelocityField diagonal_field() { return VelocityField::linear(Vec3(0.3, -0.1, -0.2).asDiagonal()); }

DualFieldSpec spec_for(DualBase base, double t0, double t1) {
  DualFieldSpec s;
  s.base = base;
  s.t0 = t0;
  s.t1 = t1;
  return s;
}

}  // namespace

TEST_CASE("spec validation and names") {
  auto s = spec_for(DualBase::Xi2, 0.0, 0.0);
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.t1 = 5.0;
  s.blend = Blend{0.01, Partner::Eta1};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.blend = Blend{0.01, Partner::Xi3};
  CHECK_NOTHROW(s.validate());
  CHECK(parse_dual_base("eta2") == DualBase::Eta2);
  CHECK(parse_partner(std::string(to_string(Partner::Eta3))) == Partner::Eta3);
  CHECK_THROWS_AS(parse_partner("xi2"), InvalidArgument);
}

TEST_CASE("constant singular vectors of a linear field") {
  const auto f = diagonal_field();
  const auto s = spec_for(DualBase::Xi2, 0.0, 2.0);
  const Vec3 d = oriented_direction(s, f, Vec3(0.3, 0.1, -0.4), Vec3::UnitY());
  CHECK((d - Vec3::UnitY()).norm() < 1e-9);
  const Vec3 r = oriented_direction(s, f, Vec3(0.3, 0.1, -0.4), -Vec3::UnitY());
  CHECK((r + Vec3::UnitY()).norm() < 1e-9);
}

TEST_CASE("zero blend is the base field") {
  const auto f = VelocityField::steady_abc();
  auto base = spec_for(DualBase::Xi2, 0.0, 2.0);
  auto blended = base;
  blended.blend = Blend{0.0, Partner::Xi1};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, kTwoPi);
  for (int k = 0; k < 10; ++k) {
    const Vec3 x(U(rng), U(rng), U(rng));
    CHECK(oriented_direction(base, f, x, Vec3::UnitZ()) ==
          oriented_direction(blended, f, x, Vec3::UnitZ()));
  }
}

TEST_CASE("orientation flip equivariance") {
  const auto f = VelocityField::aperiodic_abc();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.0, kTwoPi);
  auto plain = spec_for(DualBase::Xi2, 0.0, 1.0);
  auto blended = plain;
  blended.blend = Blend{0.01, Partner::Xi3};
  for (int k = 0; k < 20; ++k) {
    const Vec3 x(U(rng), U(rng), U(rng));
    const Vec3 p = oracle::random_rotation(rng).col(0);
    CHECK(oriented_direction(plain, f, x, -p) == -oriented_direction(plain, f, x, p));
    // With a blend, both continuity references flip together.
    const Vec3 q = oracle::random_rotation(rng).col(1);
    const auto a = evaluate_direction(blended, f, x, {p, q});
    const auto b = evaluate_direction(blended, f, x, {-p, Vec3(-q)});
    CHECK(a.direction == -b.direction);
    CHECK(std::abs(a.direction.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("eta2 is xi2 of the backward map and partners map to forward left vectors") {
  const auto f = VelocityField::aperiodic_abc();
  const Vec3 x0(1.0, 2.0, 3.0);
  const FlowSample fwd = advect_with_variations(f, x0, 0.0, 5.0);
  const StrainData sd = svd3(fwd.DF);

  const auto eta = spec_for(DualBase::Eta2, 0.0, 5.0);
  const auto mirrored = spec_for(DualBase::Xi2, 5.0, 0.0);
  const Vec3 ref = Vec3(1, 1, 1).normalized();
  CHECK(oriented_direction(eta, f, fwd.x1, ref) == oriented_direction(mirrored, f, fwd.x1, ref));
  CHECK(oracle::line_angle_deg(oriented_direction(eta, f, fwd.x1, ref), sd.eta[1]) < 1e-4);

  auto with_partner = eta;
  with_partner.blend = Blend{0.5, Partner::Eta1};
  const auto e1 = evaluate_direction(with_partner, f, fwd.x1, {ref, std::nullopt});
  CHECK(oracle::line_angle_deg(e1.partner, sd.eta[0]) < 1e-4);
  with_partner.blend = Blend{0.5, Partner::Eta3};
  const auto e3 = evaluate_direction(with_partner, f, fwd.x1, {ref, std::nullopt});
  CHECK(oracle::line_angle_deg(e3.partner, sd.eta[2]) < 1e-4);
}

TEST_CASE("initial orientation with positive z component on the cat's eye") {
  const auto f = VelocityField::cats_eye();
  const auto s = spec_for(DualBase::Xi2, 0.0, 100.0);
  const Vec3 d = oriented_direction(s, f, Vec3(1.0, 0.5, 0.0), Vec3::UnitZ());
  CHECK(d[2] > 0.0);
}

TEST_CASE("straight lines of a linear field") {
  const auto f = diagonal_field();
  auto s = spec_for(DualBase::Xi2, 0.0, 1.0);
  s.blend = Blend{0.25, Partner::Xi1};
  LineOptions opt;
  opt.s_max = 5.0;
  const auto line = integrate_line(s, f, Vec3(0.1, 0.2, 0.3), Vec3::UnitY(), opt);
  CHECK(line.termination == Termination::ReachedSmax);
  CHECK(line.length() == 5.0);
  const Vec3 dir = Vec3(0.0, 1.0, 0.25).normalized();
  for (std::size_t k = 1; k < line.vertices.size(); ++k) {
    const auto& a = line.vertices[k - 1];
    const auto& b = line.vertices[k];
    const double ds = b.s - a.s;
    CHECK(ds > 0.0);
    CHECK(ds <= opt.max_step * (1 + 1e-12));
    CHECK((b.x - a.x).norm() / ds == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(((b.x - a.x) / ds - dir).norm() < 1e-8);
  }
}

TEST_CASE("unit speed and orientation continuity on a curved line") {
  const auto f = VelocityField::steady_abc();
  const auto s = spec_for(DualBase::Xi2, 0.0, 2.0);
  LineOptions opt;
  opt.s_max = 3.0;
  const auto line = integrate_line(s, f, Vec3(1.0, 2.0, 0.5), Vec3::UnitZ(), opt);
  REQUIRE(line.termination == Termination::ReachedSmax);
  for (std::size_t k = 1; k < line.vertices.size(); ++k) {
    const Vec3 chord = line.vertices[k].x - line.vertices[k - 1].x;
    const double ds = line.vertices[k].s - line.vertices[k - 1].s;
    // A chord never exceeds the arc it spans.
    CHECK(chord.norm() / ds <= 1.0 + 1e-6);
    CHECK(chord.norm() / ds > 0.99);
    if (k > 1) {
      const Vec3 prev = line.vertices[k - 1].x - line.vertices[k - 2].x;
      CHECK(prev.dot(chord) > 0.0);
    }
  }
}

TEST_CASE("reversed orientation retraces the line") {
  const auto f = VelocityField::steady_abc();
  const auto s = spec_for(DualBase::Xi2, 0.0, 2.0);
  LineOptions opt;
  opt.s_max = 10.0;
  const Vec3 seed(2.0, 1.0, 4.0);
  const auto fwd = integrate_line(s, f, seed, Vec3::UnitZ(), opt);
  REQUIRE(fwd.termination == Termination::ReachedSmax);
  const Vec3 end = fwd.vertices.back().x;
  const Vec3 end_dir = oriented_direction(s, f, end, (end - fwd.vertices[fwd.vertices.size() - 2].x).normalized());
  const auto back = integrate_line(s, f, end, -end_dir, opt);
  REQUIRE(back.termination == Termination::ReachedSmax);
  // Distance from the seed to the returning polyline.
  double gap = INFINITY;
  for (std::size_t k = 1; k < back.vertices.size(); ++k) {
    const Vec3 a = back.vertices[k - 1].x, b = back.vertices[k].x;
    const double t = std::clamp((seed - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
    gap = std::min(gap, (a + t * (b - a) - seed).norm());
  }
  // Each direction carries the inner flow solve's error divided by the
  // singular-value gap, so the return misses by more than the outer tolerance.
  CHECK(gap < 1e-6);
}

TEST_CASE("reversal is exact up to tolerance when the field is constant") {
  const auto f = diagonal_field();
  const auto s = spec_for(DualBase::Xi2, 0.0, 1.0);
  LineOptions opt;
  opt.s_max = 10.0;
  const Vec3 seed(0.2, 0.1, -0.3);
  const auto fwd = integrate_line(s, f, seed, Vec3::UnitY(), opt);
  const Vec3 dir = Vec3::UnitY();
  const auto back = integrate_line(s, f, fwd.vertices.back().x, -dir, opt);
  CHECK((back.vertices.back().x - seed).norm() < 10 * s.tol);
}

TEST_CASE("early terminations are data") {
  // Zero field: DF = I everywhere, so the gap is degenerate at the seed.
  const auto still = VelocityField::linear(Mat3::Zero());
  LineOptions opt;
  opt.s_max = 1.0;
  const auto a = integrate_line(spec_for(DualBase::Xi2, 0, 1), still, Vec3::Zero(), Vec3::UnitZ(), opt);
  CHECK(a.termination == Termination::DegenerateGap);
  CHECK(a.vertices.size() == 1);

  Domain box;
  box.lo = {-1.0, -0.5, -1.0};
  box.hi = {1.0, 0.5, 1.0};
  const Mat3 M = Vec3(0.3, -0.1, -0.2).asDiagonal();
  const auto boxed = VelocityField::custom(
      "boxed", [M](const Vec3& x, double) { return Vec3(M * x); },
      [M](const Vec3&, double) { return M; }, box);
  opt.s_max = 5.0;
  const auto b = integrate_line(spec_for(DualBase::Xi2, 0, 1), boxed, Vec3::Zero(), Vec3::UnitY(), opt);
  CHECK(b.termination == Termination::LeftDomain);
  CHECK(b.length() > 0.5);
  CHECK(b.length() < 0.61);

  const auto c = integrate_line(spec_for(DualBase::Xi2, 0, 1), boxed, Vec3(0, 2, 0), Vec3::UnitY(), opt);
  CHECK(c.termination == Termination::LeftDomain);

  CHECK_THROWS_AS(integrate_line(spec_for(DualBase::Xi2, 0, 1), boxed, Vec3::Zero(), Vec3(0, 2, 0), opt),
                  InvalidArgument);
}

TEST_CASE("output stride thins stored vertices") {
  const auto f = diagonal_field();
  LineOptions opt;
  opt.s_max = 4.0;
  opt.output_stride = 0.5;
  const auto line = integrate_line(spec_for(DualBase::Xi2, 0, 1), f, Vec3::Zero(), Vec3::UnitY(), opt);
  CHECK(line.vertices.back().s == 4.0);
  for (std::size_t k = 1; k + 1 < line.vertices.size(); ++k) {
    CHECK(line.vertices[k].s - line.vertices[k - 1].s >= 0.5);
  }
}

TEST_CASE("deformation cache reproduces a spatially constant gradient") {
  const auto f = diagonal_field();
  auto cache = std::make_shared<DeformationCache>(f, 0.0, 1.0, 1e-10, std::array<int, 3>{3, 3, 3},
                                                  Vec3(-1, -1, -1), Vec3(1, 1, 1));
  auto s = spec_for(DualBase::Xi2, 0.0, 1.0);
  s.cache = cache;
  CHECK((cache->interpolate(Vec3(0.3, -0.2, 0.7)) - oracle::expm(Mat3(Vec3(0.3, -0.1, -0.2).asDiagonal()))).norm() < 1e-8);
  CHECK_THROWS_AS(cache->interpolate(Vec3(2, 0, 0)), InvalidArgument);
  auto wrong = spec_for(DualBase::Xi2, 0.0, 2.0);
  wrong.cache = cache;
  CHECK_THROWS_AS(wrong.validate(), InvalidArgument);
}

TEST_CASE("line integration is deterministic") {
  const auto f = VelocityField::aperiodic_abc();
  auto s = spec_for(DualBase::Xi2, 0.0, 5.0);
  s.blend = Blend{0.01, Partner::Xi1};
  LineOptions opt;
  opt.s_max = 1.0;
  const auto a = integrate_line(s, f, Vec3(5.03, 3.14, 0.0), Vec3::UnitZ(), opt);
  const auto b = integrate_line(s, f, Vec3(5.03, 3.14, 0.0), Vec3::UnitZ(), opt);
  REQUIRE(a.vertices.size() == b.vertices.size());
  for (std::size_t k = 0; k < a.vertices.size(); ++k) {
    CHECK(a.vertices[k].x == b.vertices[k].x);
    CHECK(a.vertices[k].s == b.vertices[k].s);
  }
}
