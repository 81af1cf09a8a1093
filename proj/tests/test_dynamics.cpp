#include "doctest.h"
#include "dyson/dynamics.hpp"
#include "dyson/ensembles.hpp"

#include <cmath>

using namespace dyson;
using doctest::Approx;

namespace {

GameParams params(Index n, double beta, double sigma) {
  GameParams p;
  p.n = n;
  p.beta = beta;
  p.sigma = sigma;
  return p;
}

Eigen::Matrix2d rotation(double a) {
  Eigen::Matrix2d r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

}  // namespace

TEST_CASE("two-particle fixed points") {
  Vec x(2);
  x << -1, 1;
  CHECK(drift_1d(x, params(2, 2, 1)).norm() < 1e-15);
  const NoiseStream ns(1, 0);
  const auto y = step_dyson_1d(Config1D(x), params(2, 2, 1e-12), 0.01, Vec::Zero(2), ns);
  CHECK((y.points() - x).norm() < 1e-15);

  // (beta/2)/(2r) = r/2 puts the planar pair at r = sqrt(beta/2)
  for (double beta : {1.0, 2.0, 5.0}) {
    const double r = std::sqrt(beta / 2);
    Points2 z(2, 2);
    z << -r, r, 0, 0;
    CHECK(drift_2d(z, params(2, beta, 1)).norm() < 1e-15);
  }
}

TEST_CASE("reflection and rotation equivariance") {
  Vec x(2), xi(2);
  x << -0.7, 0.7;
  xi << 0.4, -0.4;
  const NoiseStream ns(3, 0);
  const auto y = step_dyson_1d(Config1D(x), params(2, 2, 1), 0.01, xi, ns);
  CHECK(y[0] == Approx(-y[1]).epsilon(1e-15));

  PhiloxStream g(4);
  Points2 z(2, 6), w(2, 6);
  for (Index k = 0; k < 6; ++k) z.col(k) << g.normal(), g.normal(), w.col(k) << g.normal(), g.normal();
  const auto R = rotation(0.83);
  const auto p = params(6, 2, 1);
  const auto a = step_coulomb_2d(Config2D(z), p, 1e-4, w, NoiseStream(5, 0));
  const auto b = step_coulomb_2d(Config2D(Points2(R * z)), p, 1e-4, Points2(R * w), NoiseStream(5, 0));
  CHECK((R * a.points() - b.points()).norm() < 1e-12);
}

TEST_CASE("ordering survives a long run") {
  SdeConfig s;
  s.horizon = 100;  // 1e5 steps
  s.record_stride = 1000;
  const auto p = params(10, 2, 1);
  const auto tr = simulate(Config1D(initial_state_1d(p)), p, s);
  CHECK(tr.states.size() == 101);
  for (const auto& x : tr.states) CHECK(Config1D::admissible(x));
}

TEST_CASE("planar particles stay confined") {
  SdeConfig s;
  s.horizon = 50;
  s.record_stride = 500;
  const auto p = params(30, 2, 1);
  const auto tr = simulate(Config2D(initial_state_2d(p)), p, s);
  double far = 0;
  for (const auto& z : tr.states) far = std::max(far, z.colwise().norm().maxCoeff());
  CHECK(far < 3);
}

TEST_CASE("simulation is deterministic in the seed") {
  SdeConfig s;
  s.horizon = 2;
  s.record_stride = 10;
  s.seed = 77;
  const auto p = params(12, 2, 1);
  const Config1D x0(initial_state_1d(p));
  const auto a = simulate(x0, p, s), b = simulate(x0, p, s);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) CHECK(a.states[k] == b.states[k]);
  s.seed = 78;
  CHECK(simulate(x0, p, s).states.back() != a.states.back());
}

TEST_CASE("empty averaging window") {
  SdeConfig s;
  s.burn_in = 1;
  s.horizon = 1;
  const auto p = params(4, 2, 1);
  const auto tr = simulate(Config1D(initial_state_1d(p)), p, s, {{"one", [](const Vec&) { return 1.0; }}});
  CHECK(tr.times.size() == 1);
  CHECK(tr.integrals.at("one").back() - tr.integrals.at("one").front() == 0);
  CHECK_THROWS_AS(ergodic_average(tr, "one"), DomainError);
}

TEST_CASE("ergodic averages") {
  SdeConfig s;
  s.burn_in = 1;
  s.horizon = 21;
  s.record_stride = 10;
  const auto p = params(4, 2, 1);
  const Integrands<Vec> f{{"c", [](const Vec&) { return 2.5; }}, {"m2", [](const Vec& x) { return x.squaredNorm() / 4; }}};
  const Config1D x0(initial_state_1d(p));
  const auto tr = simulate(x0, p, s, f);
  const auto c = ergodic_average(tr, "c");
  CHECK(c.mean == Approx(2.5).epsilon(1e-12));
  CHECK(c.std_error < 1e-12);
  CHECK_THROWS_AS(ergodic_average(tr, "nope"), DomainError);

  // batch-means error shrinks like 1/sqrt(T)
  s.horizon = 201;
  std::vector<Trajectory1D> short_runs, long_runs;
  for (std::uint64_t r = 0; r < 8; ++r) {
    s.seed = derive_seed(9, r);
    s.horizon = 201;
    short_runs.push_back(simulate(x0, p, s, f));
    s.horizon = 401;
    long_runs.push_back(simulate(x0, p, s, f));
  }
  const auto a = ergodic_average(short_runs, "m2"), b = ergodic_average(long_runs, "m2");
  const double ratio = b.std_error / a.std_error;
  CHECK(ratio > 0.5 / std::sqrt(2.0));
  CHECK(ratio < 1.5 / std::sqrt(2.0));
  // the stationary second moment is beta/2 + sigma^2/(N-1)
  CHECK(std::abs(b.mean - (1 + 1.0 / 3)) < 4 * b.std_error);
}

TEST_CASE("step control") {
  SdeConfig s;
  s.max_halvings = 60;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.max_halvings = 20;
  s.dt = 0;
  CHECK_THROWS_AS(s.validate(), DomainError);

  Vec x(2), xi(2);
  x << -0.01, 0.01;
  xi << 5, -5;  // pushes the pair through each other
  const NoiseStream ns(1, 0);
  CHECK_THROWS_AS(step_dyson_1d(Config1D(x), params(2, 1, 1), 0.01, xi, ns, 0), StepError);
  const auto y = step_dyson_1d(Config1D(x), params(2, 1, 1), 0.01, xi, ns, 40, {}, 0.5);
  CHECK(y[0] < y[1]);
  CHECK_THROWS_AS(step_dyson_1d(Config1D(x), params(2, 2, 1), 0.1, Vec::Zero(3), ns), DomainError);
}

TEST_CASE("a deviating player changes only its own drift") {
  Vec x(4);
  x << -1, -0.2, 0.5, 1.4;
  const auto p = params(4, 2, 1);
  const Vec base = drift_1d(x, p);
  Feedback fb;
  fb.player = 2;
  CHECK(drift_1d(x, p, fb) == base);
  fb.additive = 0.2;
  fb.scale = 0.5;
  const Vec dev = drift_1d(x, p, fb);
  for (Index k = 0; k < 4; ++k)
    if (k != 2) CHECK(dev[k] == base[k]);
  CHECK(dev[2] == Approx(0.5 * base[2] + 0.2));
}
