#include "doctest.h"
#include "dyson/core.hpp"
#include "dyson/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace dyson;
using doctest::Approx;

namespace {

Config1D line(std::initializer_list<double> v) {
  Vec x(Index(v.size()));
  Index k = 0;
  for (double t : v) x[k++] = t;
  return Config1D(x);
}

Points2 plane(std::initializer_list<std::pair<double, double>> v) {
  Points2 z(2, Index(v.size()));
  Index k = 0;
  for (auto [a, b] : v) z.col(k++) << a, b;
  return z;
}

Vec random_sorted(PhiloxStream& g, Index n) {
  Vec x(n);
  double t = 0;
  for (Index k = 0; k < n; ++k) x[k] = (t += 0.01 + g.uniform());
  return x;
}

// 1/(2R^2) with R from Heron's formula, all in long double
long double heron_inv(const Vec2& a, const Vec2& b) {
  const long double p = a.norm(), q = b.norm(), r = (a - b).norm();
  const long double s = (p + q + r) / 2;
  const long double area2 = s * (s - p) * (s - q) * (s - r);
  return 8 * area2 / (p * p * q * q * r * r);
}

}  // namespace

TEST_CASE("configurations enforce their invariants") {
  CHECK_THROWS_AS(line({1.0}), DomainError);
  CHECK_THROWS_AS(line({0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(line({1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(Config2D(plane({{0, 0}, {0, 0}})), DomainError);
  CHECK_NOTHROW(Config2D(plane({{0, 0}, {1, 0}})));
  // (1,0) sits in shell 2 for n=4 and (0,0) is first, so this order is wrong
  CHECK_THROWS_AS(Config2D(plane({{1, 0}, {0, 0}}), true), DomainError);
}

TEST_CASE("pair sums on (-1,0,1)") {
  const auto c = line({-1, 0, 1});
  const auto mid = pair_sums_1d(c, 1);
  CHECK(mid.h1 == 0);
  CHECK(mid.h2 == 1);
  CHECK(mid.h0 == 0);
  const auto top = pair_sums_1d(c, 2);
  CHECK(top.h1 == Approx(0.75).epsilon(1e-15));
  CHECK(top.h2 == Approx(0.625).epsilon(1e-15));
  CHECK(top.h0 == Approx(std::log(2.0) / 2).epsilon(1e-15));
  double s = 0;
  for (Index i = 0; i < 3; ++i) s += c[i] * pair_sums_1d(c, i).h1;
  CHECK(s == Approx(1.5).epsilon(1e-15));
  CHECK_THROWS_AS(pair_sums_1d(c, 3), DomainError);
}

TEST_CASE("planar pair sums") {
  const Config2D c(plane({{0, 0}, {1, 0}, {0, 1}}));
  const auto p = pair_sums_2d(c, 0);
  CHECK(p.h1[0] == Approx(-0.5));
  CHECK(p.h1[1] == Approx(-0.5));
  CHECK(p.h2 == Approx(1));
  const auto q = pair_sums_2d(Config2D(plane({{0, 0}, {1, 0}, {-1, 0}})), 0);
  CHECK(q.h1.norm() == 0);
}

TEST_CASE("pair sums match a long double oracle and the all-index version") {
  PhiloxStream g(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 2 + Index(g() % 30);
    const Vec x = random_sorted(g, n);
    const Eigen::Matrix<long double, Eigen::Dynamic, 1> xl = x.cast<long double>();
    Vec h1, h2;
    pair_sums_all_1d(x, h1, h2);
    for (Index i = 0; i < n; ++i) {
      const auto d = pair_sums_1d(x, i);
      const auto l = pair_sums_1d(xl, i);
      CHECK(d.h1 == Approx(double(l.h1)).epsilon(1e-12));
      CHECK(d.h2 == Approx(double(l.h2)).epsilon(1e-12));
      CHECK(h1[i] == Approx(d.h1).epsilon(1e-12));
      CHECK(h2[i] == Approx(d.h2).epsilon(1e-12));
    }
    Points2 z(2, n);
    for (Index k = 0; k < n; ++k) z.col(k) << g.normal(), g.normal();
    Points2 v1;
    Vec v2;
    pair_sums_all_2d(z, v1, v2);
    for (Index i = 0; i < n; ++i) {
      const auto d = pair_sums_2d(z, i);
      CHECK((v1.col(i) - d.h1).norm() <= 1e-12 * (1 + d.h1.norm()));
      CHECK(v2[i] == Approx(d.h2).epsilon(1e-12));
    }
  }
}

TEST_CASE("two-point pair sums are antisymmetric") {
  const auto c = line({-0.3, 1.7});
  CHECK(pair_sums_1d(c, 0).h1 == -pair_sums_1d(c, 1).h1);
  const Config2D z(plane({{0.2, 0.1}, {-1, 3}}));
  CHECK(pair_sums_2d(z, 0).h1 == -pair_sums_2d(z, 1).h1);
}

TEST_CASE("inverse squared circumdiameter") {
  CHECK(inv_sq_circumdiameter<double>({1, 0}, {0, 1}) == Approx(1).epsilon(1e-15));
  CHECK(inv_sq_circumdiameter<double>({1, 0}, {2, 0}) == 0);
  CHECK(inv_sq_circumdiameter<double>({1, 0}, {0.5, std::sqrt(3.0) / 2}) == Approx(1.5).epsilon(1e-15));
  CHECK_THROWS_AS(inv_sq_circumdiameter<double>({0, 0}, {1, 0}), DomainError);
  CHECK_THROWS_AS(inv_sq_circumdiameter<double>({1, 1}, {1, 1}), DomainError);

  PhiloxStream g(5);
  for (int k = 0; k < 1000; ++k) {
    const Vec2 a(g.normal(), g.normal()), b(g.normal(), g.normal());
    const double v = inv_sq_circumdiameter(a, b);
    // Heron loses digits on thin triangles; compare where it is well conditioned
    if (std::abs(cross2(a, b)) < 0.1 * a.norm() * b.norm()) continue;
    CHECK(v == Approx(double(heron_inv(a, b))).epsilon(1e-12));
  }
}

TEST_CASE("circumcircle double sum visits ordered pairs") {
  const Points2 z = plane({{0, 0}, {1, 0}, {0, 1}});
  CHECK(circumcircle_sum_2d(z, 0) == Approx(0.5));  // (1/4)(1 + 1)
  CHECK(circumcircle_sum_2d(plane({{0, 0}, {1, 0}, {2, 0}, {-3, 0}}), 1) == 0);
}

TEST_CASE("spiral order examples") {
  CHECK(spiral_less<double>({0, 0}, {1, 0}, 4));
  CHECK(spiral_less<double>({0.3, 0}, {0.9, 0}, 4));
  CHECK_FALSE(spiral_less<double>({1, 0}, {1, 0}, 4));
  // same shell: the angle decides, and arg = 0 counts as 2 pi
  CHECK(spiral_less<double>({0, 0.6}, {0.6, 0}, 4));
  // same shell and angle: the larger modulus comes first
  CHECK(spiral_less<double>({0.7, 0.7}, {0.6, 0.6}, 4));
}

TEST_CASE("spiral order is a strict total order") {
  PhiloxStream g(11);
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = 2 + Index(g() % 7);
    std::vector<Vec2> p;
    for (Index k = 0; k < n; ++k) {
      // snap some points onto shared rays and shells to exercise ties
      double r = g.uniform() * 2, a = std::floor(g.uniform() * 8) * std::numbers::pi / 4;
      if (g() % 2) a = g.uniform() * 2 * std::numbers::pi;
      p.emplace_back(r * std::cos(a), r * std::sin(a));
    }
    if (g() % 4 == 0) p[0].setZero();
    for (const auto& a : p)
      for (const auto& b : p) {
        if (a == b) {
          CHECK_FALSE(spiral_less(a, b, n));
          continue;
        }
        CHECK(spiral_less(a, b, n) != spiral_less(b, a, n));
        for (const auto& c : p)
          if (spiral_less(a, b, n) && spiral_less(b, c, n)) CHECK(spiral_less(a, c, n));
      }
    Points2 z(2, n);
    for (Index k = 0; k < n; ++k) z.col(k) = p[std::size_t(k)];
    const Points2 s = spiral_sorted(z);
    for (Index k = 0; k + 1 < n; ++k) CHECK_FALSE(spiral_less<double>(s.col(k + 1), s.col(k), n));
  }
}

TEST_CASE("wasserstein examples and metric properties") {
  Vec a(3), b(2), c(2), d(2), e(2);
  a << -1, 0, 1;
  b << 0, 0;
  c << 1, 1;
  d << -1, 1;
  e << -2, 2;
  CHECK(wasserstein_1d(2, a, a) == 0);
  CHECK(wasserstein_1d(1, b, c) == Approx(1));
  CHECK(wasserstein_1d(2, d, e) == Approx(1));
  CHECK_THROWS_AS(wasserstein_1d(0.5, b, c), DomainError);
  CHECK_THROWS_AS(wasserstein_1d(1, a, b), DomainError);

  PhiloxStream g(2);
  for (int rep = 0; rep < 100; ++rep) {
    Vec x(6), y(6), z(6);
    for (int k = 0; k < 6; ++k) x[k] = g.normal(), y[k] = g.normal(), z[k] = g.normal();
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::sort(z.begin(), z.end());
    for (double p : {1.0, 2.0, 3.5}) {
      CHECK(wasserstein_1d(p, x, y) == Approx(wasserstein_1d(p, y, x)));
      CHECK(wasserstein_1d(p, x, z) <= wasserstein_1d(p, x, y) + wasserstein_1d(p, y, z) + 1e-12);
      CHECK(wasserstein_1d(p, x, y) > 0);
    }
  }
}

TEST_CASE("coefficient predicates") {
  GameParams p;
  p.beta = 2;
  p.sigma = 1;
  p.c2 = GameParams::c2_closed_1d(2, 1);
  CHECK(p.c2 == 0.5);
  CHECK(p.closed_loop_1d());
  CHECK_FALSE(p.open_loop_1d());
  p.c2 = 0;
  CHECK(p.open_loop_1d());
  p.c1 = 0.5;
  p.c2 = 1.5;
  CHECK(p.closed_loop_2d());
  p.c2 = 1;
  CHECK(p.open_loop_2d());
  p.sigma = 0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p.sigma = 1;
  p.n = 1;
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("quartic potential") {
  const auto v = PotentialSpec::quartic(0.1);
  CHECK(v.V(1) == Approx(0.6));
  CHECK(v.dV(1) == Approx(1.4));
  CHECK(v.d2V(1) == Approx(2.2));
  CHECK(v.convex_on(-3, 3));
  CHECK_THROWS_AS(PotentialSpec::quartic(-1), DomainError);
}
