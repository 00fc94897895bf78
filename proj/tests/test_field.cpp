#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "llb/field.hpp"
#include "test_support.hpp"

using namespace llb;
using llb::testing::random_field;
using llb::testing::random_smooth_field;
using llb::testing::sine_mode;
using std::numbers::pi;

TEST_CASE("make_grid spacing and precondition") {
  CHECK(make_grid(3).spacing() == 0.25);
  CHECK(make_grid(255).spacing() == 1.0 / 256.0);
  CHECK_THROWS_AS(make_grid(2), std::invalid_argument);
  for (int n : {3, 7, 31, 100, 127, 1000}) {
    const Grid g(n);
    CHECK(std::abs(g.spacing() * (n + 1) - 1.0) <= 1e-16);
  }
}

TEST_CASE("laplacian is exact on quadratics and linear") {
  const Grid g(255);
  FieldXd f = g.zeros();
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const double x = g.node(i);
    f(i, 1) = x * (1 - x);
  }
  const FieldXd lap = laplacian(g, f);
  CHECK((lap.col(1).array() + 2.0).abs().maxCoeff() < 1e-8);
  CHECK(lap.col(0).isZero(0.0));
  CHECK(laplacian(g, g.zeros()).isZero(0.0));
}

TEST_CASE("laplacian truncation error on sin(pi x)") {
  const Grid g(255);
  const double h = g.spacing();
  const FieldXd f = sine_mode(g, 1, 0);
  const FieldXd lap = laplacian(g, f);
  double err = 0;
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    err = std::max(err, std::abs(lap(i, 0) + pi * pi * f(i, 0)));
  }
  CHECK(err <= std::pow(pi, 4) * h * h / 12.0 * 1.01);
  CHECK(err > 0);
}

TEST_CASE("gradient on edges") {
  const Grid g(31);
  CHECK(gradient(g, g.zeros()).isZero(0.0));
  CHECK(gradient(g, g.zeros()).rows() == 32);
  FieldXd f = g.zeros();
  for (Eigen::Index i = 0; i < f.rows(); ++i) f(i, 2) = g.node(i);
  const FieldXd grad = gradient(g, f);
  // Interior and left edges see the linear profile; the right edge sees the
  // jump to the zero ghost.
  for (Eigen::Index e = 0; e < 31; ++e) CHECK(grad(e, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(grad(31, 2) == doctest::Approx(-g.node(30) / g.spacing()));
}

TEST_CASE("summation by parts holds to round-off") {
  std::mt19937_64 gen(7);
  for (int n : {31, 127, 255}) {
    const Grid g(n);
    for (int trial = 0; trial < 50; ++trial) {
      const FieldXd f = random_field(g, gen);
      const FieldXd w = random_field(g, gen);
      const double lhs = inner_l2(g, laplacian(g, f), f);
      const double rhs = -edge_inner(g, gradient(g, f), gradient(g, f));
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
      const double cross_term = inner_l2(g, laplacian(g, f), w) +
                                edge_inner(g, gradient(g, f), gradient(g, w));
      const double scale = g.spacing() * gradient(g, f).cwiseAbs()
                                             .cwiseProduct(gradient(g, w).cwiseAbs())
                                             .sum();
      CHECK(std::abs(cross_term) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("cross product") {
  const Grid g(15);
  FieldXd e1 = g.zeros(), e2 = g.zeros(), e3 = g.zeros();
  e1.col(0).setOnes();
  e2.col(1).setOnes();
  e3.col(2).setOnes();
  CHECK(cross(e1, e2) == e3);
  std::mt19937_64 gen(11);
  const FieldXd f = random_field(g, gen);
  const FieldXd h = random_field(g, gen);
  CHECK(cross(f, f).isZero(0.0));
  CHECK(cross(f, h) == -cross(h, f));
  const FieldXd fh = cross(f, h);
  CHECK(dot(fh, f).cwiseAbs().maxCoeff() <= 1e-14 * 10);
  CHECK(dot(fh, h).cwiseAbs().maxCoeff() <= 1e-14 * 10);
  CHECK_THROWS_AS(cross(f, FieldXd(FieldXd::Zero(14, 3))), std::invalid_argument);
}

TEST_CASE("pointwise orthogonality and cross identities on O(1) fields") {
  std::mt19937_64 gen(13);
  const Grid g(127);
  for (int trial = 0; trial < 100; ++trial) {
    const FieldXd f = random_smooth_field(g, gen);
    const FieldXd w = random_smooth_field(g, gen);
    const FieldXd fw = cross(f, w);
    CHECK(dot(fw, f).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(dot(fw, w).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(std::abs(inner_l2(g, fw, w)) <= 1e-12);
  }
}

TEST_CASE("inner_l2 normalization and bilinearity") {
  const Grid g(127);
  const FieldXd s = sine_mode(g, 1, 0, std::numbers::sqrt2);
  CHECK(inner_l2(g, s, s) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(inner_l2(g, s, g.zeros()) == 0.0);
  std::mt19937_64 gen(3);
  const FieldXd f = random_field(g, gen), h = random_field(g, gen),
                w = random_field(g, gen);
  const double a = 1.7, b = -0.3;
  const FieldXd comb = a * f + b * h;
  CHECK(std::abs(inner_l2(g, comb, w) -
                 (a * inner_l2(g, f, w) + b * inner_l2(g, h, w))) <= 1e-12);
  CHECK_THROWS_AS(inner_l2(g, f, FieldXd(FieldXd::Zero(3, 3))),
                  std::invalid_argument);
}

TEST_CASE("norms of the first eigenfunction") {
  const Grid g(255);
  const double h = g.spacing();
  const auto zero = norms(g, g.zeros());
  CHECK(zero.l2 == 0);
  CHECK(zero.h1_semi == 0);
  CHECK(zero.h2_semi == 0);
  CHECK(zero.linf == 0);

  const auto r = norms(g, sine_mode(g, 1, 0, std::numbers::sqrt2));
  const double tol = pi * pi * h * h / 10.0;
  CHECK(std::abs(r.l2 - 1.0) <= 1e-12);
  CHECK(std::abs(r.h1_semi / pi - 1.0) <= tol);
  CHECK(std::abs(r.h2_semi / (pi * pi) - 1.0) <= tol);
  CHECK(r.linf == doctest::Approx(std::numbers::sqrt2).epsilon(1e-4));
}

TEST_CASE("Poincare and interpolation inequalities on random fields") {
  std::mt19937_64 gen(17);
  for (int n : {7, 31, 127}) {
    const Grid g(n);
    for (int trial = 0; trial < 1000; ++trial) {
      const FieldXd f = trial % 2 ? random_field(g, gen) : random_smooth_field(g, gen);
      const auto r = norms(g, f);
      CHECK(r.l2 <= r.h1_semi);
      CHECK(r.linf * r.linf <= 2.0 * r.l2 * r.h1() * (1 + 10 * g.spacing()));
    }
  }
}

TEST_CASE("helmholtz_solve") {
  const Grid g(255);
  const double h = g.spacing();
  std::mt19937_64 gen(19);
  const FieldXd rhs = random_field(g, gen);
  CHECK(helmholtz_solve(g, rhs, 0.0) == rhs);
  CHECK_THROWS_AS(helmholtz_solve(g, rhs, -1e-3), std::invalid_argument);

  for (double c : {1e-5, 1e-3, 0.1, 10.0}) {
    const double pih2 = (2.0 - 2.0 * std::cos(pi * h)) / (h * h);
    const FieldXd s = sine_mode(g, 1, 0);
    const FieldXd w = helmholtz_solve(g, FieldXd((1 + c * pih2) * s), c);
    CHECK((w - s).cwiseAbs().maxCoeff() <= 1e-10);

    const FieldXd x = helmholtz_solve(g, rhs, c);
    const FieldXd back = x - c * laplacian(g, x);
    CHECK((back - rhs).norm() / rhs.norm() <= 1e-10);
  }
}

TEST_CASE("field operations are templated on the scalar type") {
  const Grid1D<long double> g(31);
  Field<long double> f = g.zeros();
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const long double x = g.node(i);
    f(i, 0) = x * (1 - x);
  }
  const auto lap = laplacian(g, f);
  CHECK(std::abs(double(lap(10, 0) + 2.0L)) < 1e-12);
  const auto w = helmholtz_solve(g, f, 0.5L);
  CHECK(double((w - 0.5L * laplacian(g, w) - f).norm()) < 1e-14);
}
