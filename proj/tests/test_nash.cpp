#include "doctest.h"
#include "dyson/game.hpp"
#include "dyson/nash.hpp"

#include <cmath>
#include <numbers>

using namespace dyson;
using doctest::Approx;

namespace {

Config1D line(std::initializer_list<double> v) {
  Vec x(Index(v.size()));
  Index k = 0;
  for (double t : v) x[k++] = t;
  return Config1D(x);
}

GameParams params(Index n, double beta, double sigma) {
  GameParams p;
  p.n = n;
  p.beta = beta;
  p.sigma = sigma;
  return p;
}

double value_at(const Vec& x, Index i, double beta) { return value_grads_1d(Config1D(x), i, beta).value; }

}  // namespace

TEST_CASE("value function at the symmetric triple") {
  const auto g = value_grads_1d(line({-1, 0, 1}), 1, 2);
  CHECK(g.value == 0);
  CHECK(g.self_grad == 0);
  CHECK(g.cross_grads[0] == Approx(0.5));
  CHECK(g.cross_grads[1] == 0);
  CHECK(g.cross_grads[2] == Approx(-0.5));
  CHECK_THROWS_AS(value_grads_1d(line({-1, 0, 1}), 3, 2), DomainError);
}

TEST_CASE("values sum to the pair-counted potential") {
  PhiloxStream g(4);
  for (int rep = 0; rep < 50; ++rep) {
    const Index n = 2 + Index(g() % 20);
    const Config1D c(random_points_1d(g, n));
    const double beta = 0.5 + 4 * g.uniform();
    double s = 0, logs = 0;
    for (Index i = 0; i < n; ++i) s += value_grads_1d(c, i, beta).value;
    for (Index k = 0; k < n; ++k)
      for (Index l = k + 1; l < n; ++l) logs += std::log(c[l] - c[k]);
    const double oracle = c.points().squaredNorm() / 4 - beta / double(n - 1) * logs;
    CHECK(s == Approx(oracle).epsilon(1e-12).scale(1));
  }
}

TEST_CASE("analytic derivatives match finite differences") {
  PhiloxStream g(6);
  for (int rep = 0; rep < 30; ++rep) {
    const Index n = 3 + Index(g() % 8);
    const Vec x = random_points_1d(g, n);
    const double beta = 0.5 + 4 * g.uniform();
    const Index i = Index(g() % std::uint32_t(n));
    const auto vg = value_grads_1d(Config1D(x), i, beta);
    double gap = std::numeric_limits<double>::infinity();
    for (Index k = 0; k + 1 < n; ++k) gap = std::min(gap, x[k + 1] - x[k]);
    const double h = 1e-5 * gap;
    double lap = 0;
    for (Index k = 0; k < n; ++k) {
      Vec up = x, dn = x;
      up[k] += h;
      dn[k] -= h;
      const double v0 = value_at(x, i, beta), vp = value_at(up, i, beta), vm = value_at(dn, i, beta);
      const double fd = (vp - vm) / (2 * h);
      const double exact = k == i ? vg.self_grad : vg.cross_grads[k];
      CHECK(std::abs(fd - exact) <= 1e-6 * (std::abs(exact) + 1));
      // second differences need a coarser step; Richardson removes the H^2 term
      auto second = [&](double H) {
        Vec up2 = x, dn2 = x;
        up2[k] += H;
        dn2[k] -= H;
        return (value_at(up2, i, beta) - 2 * v0 + value_at(dn2, i, beta)) / (H * H);
      };
      const double H = 1e-2 * gap;
      lap += (4 * second(H) - second(2 * H)) / 3;
    }
    CHECK(lap == Approx(vg.laplacian).epsilon(1e-4));
  }
}

TEST_CASE("open-loop potential gradient matches finite differences") {
  PhiloxStream g(8);
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 2 + Index(g() % 10);
    const Vec x = random_points_1d(g, n);
    const double beta = 2;
    Vec h1, h2;
    pair_sums_all_1d(x, h1, h2);
    const Vec grad = x / 2 - beta / 2 * h1;
    for (Index k = 0; k < n; ++k) {
      double gap = std::numeric_limits<double>::infinity();
      for (Index j = 0; j + 1 < n; ++j) gap = std::min(gap, x[j + 1] - x[j]);
      const double h = 1e-5 * gap;
      Vec up = x, dn = x;
      up[k] += h;
      dn[k] -= h;
      const double fd = (potential_w_1d(Config1D(up), beta) - potential_w_1d(Config1D(dn), beta)) / (2 * h);
      CHECK(std::abs(fd - grad[k]) <= 1e-6 * (std::abs(grad[k]) + 1));
    }
  }
}

TEST_CASE("closed-loop residual vanishes at the consistent coefficient") {
  PhiloxStream g(10);
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = 2 + Index(g() % 24);
    const Config1D c(random_points_1d(g, n));
    auto p = params(n, 0.5 + 4 * g.uniform(), 0.2 + 1.3 * g.uniform());
    p.c2 = GameParams::c2_closed_1d(p.beta, p.sigma);
    const Index i = Index(g() % std::uint32_t(n));
    const auto r = residual_nash_1d(c, i, p);
    CHECK(std::abs(r.relative) <= 1e-10);
    // the cost term is affine in c2 with slope h2/(N-1)
    auto q = p;
    q.c2 += 0.1;
    const double expect = -0.1 * pair_sums_1d(c, i).h2 / double(n - 1);
    CHECK(std::abs(residual_nash_1d(c, i, q).residual - r.residual - expect) <= 1e-12 * r.scale);
  }
}

TEST_CASE("ergodic constants appear in the residual") {
  auto p = params(5, 2, 1);
  PhiloxStream g(2);
  const Config1D x(random_points_1d(g, 5));
  CHECK(residual_nash_1d(x, 0, p).terms.at("lambda") == Approx(0.5625));
  CHECK(residual_hjb_1d(x, p).terms.at("lambda") == Approx(0.3125));
  const Config2D z(random_points_2d(g, 5));
  CHECK(residual_nash_2d(z, 0, p).terms.at("lambda") == Approx(0.625));
  const Config2D z3(random_points_2d(g, 3));
  CHECK(residual_hjb_2d(z3, params(3, 2, 1)).terms.at("lambda") == Approx(0.5));
}

TEST_CASE("open-loop and planar residuals vanish") {
  PhiloxStream g(12);
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = 3 + Index(g() % 23);
    auto p = params(n, 0.5 + 4 * g.uniform(), 0.2 + 1.3 * g.uniform());
    const Config1D x(random_points_1d(g, n));
    p.c2 = GameParams::c2_open_1d(p.beta, p.sigma);
    CHECK(std::abs(residual_hjb_1d(x, p).relative) <= 1e-10);

    const Config2D z(random_points_2d(g, n));
    p.c1 = GameParams::c1_2d(p.beta);
    p.c2 = GameParams::c2_closed_2d(p.beta);
    const Index i = Index(g() % std::uint32_t(n));
    CHECK(std::abs(residual_nash_2d(z, i, p).relative) <= 1e-10);
    p.c2 = GameParams::c2_open_2d(p.beta);
    const auto open = residual_hjb_2d(z, p);
    CHECK(std::abs(open.relative) <= 1e-10);

    // closed-loop c2 in the open-loop equation: the gap is the global cost change over N
    auto q = p;
    q.c2 = GameParams::c2_closed_2d(p.beta);
    const double dF = global_cost_2d(z, q) - global_cost_2d(z, p);
    CHECK(residual_hjb_2d(z, q).residual - open.residual == Approx(-dF / double(n)).epsilon(1e-9).scale(1e-12));
    double h2 = 0;
    for (Index k = 0; k < n; ++k) h2 += pair_sums_2d(z, k).h2;
    CHECK(-dF / double(n) == Approx(-p.beta * p.beta / 16 * h2 / (double(n) * double(n - 1))).epsilon(1e-12));
  }
}

TEST_CASE("planar residual is affine in c1 and c2") {
  PhiloxStream g(14);
  const Config2D z(random_points_2d(g, 7));
  auto p = params(7, 2, 1);
  p.c1 = 0.5;
  p.c2 = 1.5;
  const double base = residual_nash_2d(z, 2, p).residual;
  auto q = p;
  q.c1 += 0.25;
  CHECK(residual_nash_2d(z, 2, q).residual - base ==
        Approx(-0.25 * circumcircle_sum_2d(z.points(), 2)).epsilon(1e-12));
  q = p;
  q.c2 -= 0.3;
  CHECK(residual_nash_2d(z, 2, q).residual - base == Approx(0.3 * pair_sums_2d(z, 2).h2 / 6).epsilon(1e-12));
}

TEST_CASE("consistency predicate at beta 2 in the plane") {
  auto p = params(4, 2, 1);
  p.c1 = 0.5;
  p.c2 = 1.5;
  CHECK(p.closed_loop_2d());
}

TEST_CASE("identity suites") {
  PhiloxStream g(16);
  for (int rep = 0; rep < 50; ++rep) {
    CHECK(identity_suite(Config1D(random_points_1d(g, 10))).worst() <= 1e-12);
    CHECK(identity_suite(Config2D(random_points_2d(g, 3 + Index(g() % 8)))).worst() <= 1e-12);
  }
  CHECK(identity_suite(line({-1, 0, 1})).worst() <= 1e-15);
}

TEST_CASE("master equation on the semicircle") {
  for (double beta : {4.0 / 3, 2.0, 4.0}) {
    const auto mu = semicircle(beta);
    for (double t = -0.95; t <= 0.95; t += 0.05) CHECK(std::abs(residual_master_1d(t * mu.b(), mu, beta).relative) <= 1e-4);
    CHECK(std::abs(residual_mean_field_hj_1d(mu, beta).relative) <= 1e-4);
  }
  CHECK_THROWS_AS(residual_master_1d(3, semicircle(2), 2), DomainError);
}

TEST_CASE("master equation away from equilibrium") {
  // the master equation holds along the flow, not only at the fixed point
  const auto mu = solve_one_cut(PotentialSpec::quartic(0.1), 2);
  for (double t = -0.9; t <= 0.9; t += 0.1) CHECK(std::abs(residual_master_1d(t * mu.b(), mu, 2).relative) <= 1e-4);
}

TEST_CASE("Coulomb master equation") {
  const auto mu = circular_law(2);
  CHECK(std::abs(residual_master_2d(Vec2(0, 0), mu, 2).relative) <= 1e-3);
  for (double r : {0.4, 0.9}) {
    const double a = residual_master_2d(Vec2(r, 0), mu, 2).residual;
    const double b = residual_master_2d(Vec2(0, -r), mu, 2).residual;
    CHECK(std::abs(a - b) <= 1e-3);
    CHECK(master_gradient_2d(Vec2(r / std::sqrt(2.0), r / std::sqrt(2.0)), mu, 2).norm() <= 1e-4);
  }
}

TEST_CASE("sweeps") {
  SweepSpec s;
  s.count = 200;
  CHECK(identity_sweep(s).worst() <= 1e-12);
  CHECK(residual_sweep(s).worst() <= 1e-10);
  s.fixed = params(2, 2, 1);
  s.fixed->c2 = 5;  // inconsistent on purpose
  CHECK(residual_sweep(s).max_relative_error.at("nash_1d") > 1e-3);
  CHECK(master_suite_1d(2, 10).worst() <= 1e-4);
}
