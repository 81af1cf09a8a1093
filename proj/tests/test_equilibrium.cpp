#include "doctest.h"
#include "dyson/dynamics.hpp"
#include "dyson/equilibrium.hpp"
#include "dyson/nash.hpp"
#include "dyson/rng.hpp"

#include <cmath>
#include <numbers>

using namespace dyson;
using doctest::Approx;
using std::numbers::pi;

namespace {

// Monte Carlo for iint 2/D^2 over the ball, sampling both points in polar
// coordinates about gamma. The Jacobian r1 r2 cancels the singularity, so the
// weighted integrand is bounded.
Estimate circumcircle_mc(const Vec2& gamma, const EquilibriumMeasure2D& mu, int n, std::uint64_t seed) {
  PhiloxStream g(seed);
  const double rho = 1 / (pi * mu.radius() * mu.radius());
  auto draw = [&](double& w) {
    const double phi = 2 * pi * g.uniform();
    const Vec2 u(std::cos(phi), std::sin(phi));
    const double reach = mu.reach(gamma, u), r = reach * g.uniform();
    w = rho * 2 * pi * reach * r;
    return Vec2(r * u);
  };
  double s = 0, s2 = 0;
  for (int k = 0; k < n; ++k) {
    double w1, w2;
    const Vec2 a = draw(w1), b = draw(w2);
    const double v = w1 * w2 * inv_sq_circumdiameter(a, b);
    s += v;
    s2 += v * v;
  }
  const double m = s / n;
  return {m, std::sqrt((s2 / n - m * m) / n)};
}

}  // namespace

TEST_CASE("semicircle closed forms") {
  const auto mu = semicircle(2);
  CHECK(mu.a() == Approx(-2));
  CHECK(mu.b() == Approx(2));
  CHECK(mu.density(0) == Approx(1 / pi).epsilon(1e-14));
  CHECK(mu.density(2.5) == 0);
  CHECK(mu.integrate([](double) { return 1.0; }) == Approx(1).epsilon(1e-12));
  CHECK(mu.integrate([](double x) { return x * x; }) == Approx(1).epsilon(1e-12));
  for (double beta : {0.5, 4.0 / 3, 2.0, 7.0}) {
    const auto m = semicircle(beta);
    CHECK(std::abs(m.quantile(0.5)) < 1e-12);
    CHECK(m.integrate([](double x) { return x * x; }) == Approx(beta / 2).epsilon(1e-12));
  }
  CHECK_THROWS_AS(semicircle(0), DomainError);
}

TEST_CASE("quantile and cdf round trip") {
  for (const auto& mu : {semicircle(2), solve_one_cut(PotentialSpec::quartic(0.1), 2)})
    for (int k = 1; k < 100; ++k) {
      const double q = k / 100.0;
      CHECK(std::abs(mu.cdf(mu.quantile(q)) - q) < 1e-10);
    }
}

TEST_CASE("Hilbert transform of the semicircle solves Euler-Lagrange") {
  for (double beta : {4.0 / 3, 2.0, 4.0}) {
    const auto mu = semicircle(beta);
    for (double t = -0.95; t <= 0.95; t += 0.05) {
      const double x = t * mu.b();
      CHECK(std::abs(beta * mu.hilbert(x) - x) < 1e-12);
      CHECK(std::abs(beta * mu.hilbert_quadrature(x) - x) < 1e-9);
    }
    CHECK(euler_lagrange_residual(mu, PotentialSpec::quadratic(), beta) < 1e-9);
  }
}

TEST_CASE("one-cut solver") {
  const auto quad = solve_one_cut(PotentialSpec::quadratic(), 2);
  const auto sc = semicircle(2);
  CHECK(quad.a() == Approx(-2).epsilon(1e-10));
  CHECK(quad.b() == Approx(2).epsilon(1e-10));
  double gap = 0;
  for (double x = -1.95; x < 1.96; x += 0.01) gap = std::max(gap, std::abs(quad.density(x) - sc.density(x)));
  CHECK(gap <= 1e-6);

  const auto V = PotentialSpec::quartic(0.1);
  const auto mu = solve_one_cut(V, 2);
  const auto fine = solve_one_cut(V, 2, 256);
  CHECK(mu.a() > -2);
  CHECK(mu.b() < 2);
  CHECK(mu.a() == Approx(-mu.b()).epsilon(1e-10));
  CHECK(mu.b() == Approx(fine.b()).epsilon(1e-9));
  CHECK(mu.integrate([](double) { return 1.0; }) == Approx(1).epsilon(1e-8));
  CHECK(euler_lagrange_residual(mu, V, 2) <= 1e-6);
  CHECK(mu.density(mu.a()) == Approx(0).epsilon(1e-12));
  CHECK(mu.density(mu.b()) == Approx(0).epsilon(1e-12));

  const auto same = equilibrium_for(PotentialSpec::quadratic(), 3);
  CHECK(same.density(0) == Approx(semicircle(3).density(0)));
}

TEST_CASE("singular statistic limits") {
  const auto mu = semicircle(2);
  CHECK(limit_singular_stat(2, 1, mu, 0.5) == Approx(2.0 / 3).epsilon(1e-12));
  CHECK(limit_singular_stat(4, 1, semicircle(4), 0.5) == Approx(2.0 / 9).epsilon(1e-12));
  CHECK(limit_singular_stat(2, 1, mu, 1) == Approx(0).epsilon(1e-12));
  CHECK(limit_singular_stat_avg(2, 1, mu) == Approx(0.5).epsilon(1e-10));
  double prev = 0;
  for (double s = 0.1; s < 1.4; s += 0.1) {
    const double v = limit_singular_stat(2, s, mu, 0.3);
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(limit_singular_stat(1, 1, mu, 0.5), DomainError);
}

TEST_CASE("product rule and free information on the semicircle") {
  for (double beta : {4.0 / 3, 2.0, 4.0}) {
    const auto mu = semicircle(beta);
    for (double t = -0.9; t <= 0.9; t += 0.1) CHECK(product_rule_gap(mu, t * mu.b()) <= 1e-4);
    CHECK(free_information_gap(mu) <= 1e-5);
  }
}

TEST_CASE("circular law") {
  // drift z/2 balances (beta/2) times the disk field rho pi z
  const auto mu = circular_law(2);
  CHECK(mu.radius() == Approx(std::sqrt(2.0)));
  CHECK(mu.density(Vec2(0.3, 0.2)) == Approx(1 / (2 * pi)));
  CHECK(mu.total_mass() == Approx(1).epsilon(1e-12));
  // potential |z|^2 gives the unit disk with density 1/pi at beta = 2
  const auto unit = circular_law(2, 2);
  CHECK(unit.radius() == Approx(1));
  CHECK(unit.density(Vec2(0.5, 0)) == Approx(1 / pi));
  CHECK(unit.density(Vec2(1.5, 0)) == 0);
  CHECK(circular_law(8, 2).radius() == Approx(2));
  for (double r : {0.2, 0.7, 1.2}) {
    const Vec2 z(r, 0);
    CHECK((2 * mu.hilbert(z) - z).norm() < 1e-12);
  }
}

TEST_CASE("circumcircle limit against a Monte Carlo oracle") {
  const auto ball = EquilibriumMeasure2D::ball(1);
  for (const Vec2& g : {Vec2(0, 0), Vec2(0.5, 0), Vec2(-0.3, 0.6)}) {
    const double v = circumcircle_limit(g, ball);
    const auto mc = circumcircle_mc(g, ball, 400000, 17);
    CHECK(v > 0);
    CHECK(std::abs(v - mc.mean) <= 4 * mc.std_error + 1e-4 * v);
  }
}

TEST_CASE("circumcircle limit symmetries") {
  const auto mu = circular_law(2);
  for (double r : {0.3, 0.8, 1.2}) {
    const double a = circumcircle_limit(Vec2(r, 0), mu), b = circumcircle_limit(Vec2(0, r), mu);
    const double c = circumcircle_limit(Vec2(-r / std::sqrt(2.0), -r / std::sqrt(2.0)), mu);
    CHECK(std::abs(a - b) <= 1e-4 * a);
    CHECK(std::abs(a - c) <= 1e-4 * a);
  }
  CHECK_THROWS_AS(circumcircle_limit(Vec2(2, 0), mu), DomainError);
}

TEST_CASE("circumcircle limit of a thin strip seen from afar") {
  // mass on a thin segment along the x axis, far to the right of gamma
  Eigen::MatrixXd d = Eigen::MatrixXd::Ones(40, 1);
  const auto strip = EquilibriumMeasure2D::grid(50, -0.0125, 0.025, d);
  CHECK(strip.total_mass() == Approx(1));
  // the integrand jumps across the diagonal, so cell subdivision converges slowly
  const double far = circumcircle_limit(Vec2(0, 0), strip, 0.1);
  CHECK(far >= 0);
  CHECK(far < 1e-3);
}
