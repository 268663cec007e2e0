#include <cmath>
#include <random>

#include "doctest.h"
#include "lcs/velocity_fields.hpp"
#include "oracles.hpp"

using namespace lcs;

namespace {

Mat3 central_difference_jacobian(const VelocityField& f, const Vec3& x, double t, double h) {
  Mat3 J;
  for (int j = 0; j < 3; ++j) {
    Vec3 e = Vec3::Zero();
    e[j] = h;
    J.col(j) = (f.velocity(x + e, t) - f.velocity(x - e, t)) / (2.0 * h);
  }
  return J;
}

std::vector<VelocityField> builtins() {
  return {VelocityField::cats_eye(), VelocityField::steady_abc(), VelocityField::aperiodic_abc()};
}

}  // namespace

TEST_CASE("steady ABC at the origin") {
  const auto f = VelocityField::steady_abc();
  const Vec3 u = f.velocity(Vec3::Zero(), 0.0);
  CHECK(u[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(u[1] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(u[2] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  Mat3 expected;
  expected << 0, 0, std::sqrt(3.0), std::sqrt(2.0), 0, 0, 0, 1, 0;
  CHECK((f.gradient(Vec3::Zero(), 0.0) - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("cat's eye at the origin") {
  const auto f = VelocityField::cats_eye(2.0);
  const Vec3 u = f.velocity(Vec3::Zero(), 0.0);
  CHECK(std::abs(u[0]) < 1e-15);
  CHECK(std::abs(u[1]) < 1e-15);
  CHECK(u[2] == doctest::Approx(1.0 / (2.0 + std::sqrt(3.0))).epsilon(1e-14));
  CHECK(u[2] == doctest::Approx(0.267949).epsilon(1e-6));
}

TEST_CASE("aperiodic ABC reduces to steady ABC at t = 0") {
  const auto a = VelocityField::aperiodic_abc();
  const auto s = VelocityField::steady_abc();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-10.0, 10.0);
  for (int k = 0; k < 50; ++k) {
    const Vec3 x(U(rng), U(rng), U(rng));
    CHECK((a.velocity(x, 0.0) - s.velocity(x, 0.0)).norm() == 0.0);
  }
}

TEST_CASE("stream function values") {
  CHECK(cats_eye_stream_function(0.0, 0.0, 2.0) == doctest::Approx(-std::log(2.0 + std::sqrt(3.0))));
  CHECK(cats_eye_stream_function(0.0, 0.0, 2.0) == doctest::Approx(-1.316958).epsilon(1e-6));
  CHECK(cats_eye_stream_function(M_PI, 0.0, 2.0) == doctest::Approx(1.316958).epsilon(1e-6));
  for (double y : {0.3, 1.7, 4.0}) {
    CHECK(cats_eye_stream_function(1.1, y, 2.0) == cats_eye_stream_function(1.1, -y, 2.0));
  }
  CHECK_THROWS_AS(cats_eye_stream_function(0.0, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("aperiodic coefficients") {
  const double B = std::sqrt(2.0), C = 1.0;
  auto c0 = aperiodic_coefficients(0.0, B, C, 0.3, 0.5, 1.5, 1.8);
  CHECK(c0.B == B);
  CHECK(c0.C == C);
  auto c1 = aperiodic_coefficients(1.0, B, C, 0.3, 0.5, 1.5, 1.8);
  CHECK(c1.B == doctest::Approx(B * (1.0 + 0.3 * std::tanh(0.5) * std::cos(2.25))).epsilon(1e-15));
  CHECK(c1.C == doctest::Approx(C * (1.0 + 0.3 * std::tanh(0.5) * std::sin(1.8 * 1.8))).epsilon(1e-15));
  for (double t = 0.0; t < 200.0; t += 0.37) {
    auto c = aperiodic_coefficients(t, B, C, 0.3, 0.5, 1.5, 1.8);
    CHECK(std::abs(c.B - B) <= 0.3 * B + 1e-15);
    CHECK(std::abs(c.C - C) <= 0.3 * C + 1e-15);
  }
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-4.0, 4.0), T(0.0, 5.0);
  for (const auto& f : builtins()) {
    CAPTURE(f.name());
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Vec3 x(U(rng), U(rng), U(rng));
      const double t = T(rng);
      const Mat3 fd = central_difference_jacobian(f, x, t, 1e-6);
      worst = std::max(worst, (f.gradient(x, t) - fd).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("built-in fields are divergence free") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(-20.0, 20.0), T(0.0, 50.0);
  for (const auto& f : builtins()) {
    for (int k = 0; k < 200; ++k) {
      const Vec3 x(U(rng), U(rng), U(rng));
      CHECK(std::abs(f.gradient(x, T(rng)).trace()) <= 1e-12);
    }
  }
}

TEST_CASE("cat's eye is independent of z and wraps only x") {
  const auto f = VelocityField::cats_eye();
  const Vec3 a(0.4, 1.3, -2.0), b(0.4, 1.3, 17.5);
  CHECK((f.velocity(a, 0.0) - f.velocity(b, 0.0)).norm() == 0.0);
  const Mat3 J = f.gradient(a, 0.0);
  CHECK(J.col(2).norm() == 0.0);
  // Third row is W'(psi) grad psi = u_z * grad psi.
  const double h = 1e-6;
  const double c = 2.0;
  const double dpsi_dx = (cats_eye_stream_function(a[0] + h, a[1], c) -
                          cats_eye_stream_function(a[0] - h, a[1], c)) / (2 * h);
  const double dpsi_dy = (cats_eye_stream_function(a[0], a[1] + h, c) -
                          cats_eye_stream_function(a[0], a[1] - h, c)) / (2 * h);
  const double uz = std::exp(cats_eye_stream_function(a[0], a[1], c));
  CHECK(J(2, 0) == doctest::Approx(uz * dpsi_dx).epsilon(1e-7));
  CHECK(J(2, 1) == doctest::Approx(uz * dpsi_dy).epsilon(1e-7));

  CHECK(f.domain().periodic[0]);
  CHECK_FALSE(f.domain().periodic[1]);
  CHECK_FALSE(f.domain().periodic[2]);
  CHECK((f.velocity(Vec3(0.5 + kTwoPi, 37.2, -4), 0) - f.velocity(Vec3(0.5, 37.2, -4), 0)).norm() <
        1e-14);
}

TEST_CASE("periodic wrapping") {
  const Domain d = Domain::torus2pi();
  CHECK(wrap_periodic(Vec3(kTwoPi + 0.1, 0, 0), d)[0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(wrap_periodic(Vec3(-0.1, 0, 0), d)[0] == doctest::Approx(kTwoPi - 0.1).epsilon(1e-14));
  const Domain cat = VelocityField::cats_eye().domain();
  const Vec3 w = wrap_periodic(Vec3(0.5, 37.2, -4), cat);
  CHECK(w == Vec3(0.5, 37.2, -4));
  CHECK(wrap_coordinate(-1e-18, 0.0, kTwoPi) >= 0.0);
  CHECK(wrap_coordinate(-1e-18, 0.0, kTwoPi) < kTwoPi);
}

TEST_CASE("input validation") {
  const auto f = VelocityField::steady_abc();
  CHECK_THROWS_AS(f.velocity(Vec3(NAN, 0, 0), 0.0), InvalidArgument);
  CHECK_THROWS_AS(f.gradient(Vec3(0, 0, 0), INFINITY), InvalidArgument);
  CHECK_THROWS_AS(VelocityField::cats_eye(0.5), InvalidArgument);
  CHECK_THROWS_AS(make_field("double_gyre", {}), InvalidArgument);
  CHECK_THROWS_AS(make_field("steady_abc", {{"c", 2.0}}), InvalidArgument);
  const auto g = make_field("aperiodic_abc", {{"k0", 0.1}});
  CHECK(g.params().k0 == 0.1);
  CHECK(g.id() == FieldId::AperiodicABC);
}
