#include "dyson/game.hpp"

#include "dyson/equilibrium.hpp"
#include "dyson/parallel.hpp"
#include "dyson/rng.hpp"

#include <cmath>
#include <limits>

namespace dyson {

namespace {
constexpr double nan = std::numeric_limits<double>::quiet_NaN();
}

const char* model_name(Model m) {
  switch (m) {
    case Model::closed1d: return "closed1d";
    case Model::open1d: return "open1d";
    case Model::closed2d: return "closed2d";
    case Model::open2d: return "open2d";
  }
  return "?";
}

Model parse_model(const std::string& s) {
  for (Model m : {Model::closed1d, Model::open1d, Model::closed2d, Model::open2d})
    if (s == model_name(m)) return m;
  throw DomainError("unknown model '" + s + "'");
}

double state_cost_1d(const Config1D& x, Index i, const GameParams& p) {
  const auto s = pair_sums_1d(x, i);
  return x[i] * x[i] / 8 + p.c2 * s.h2 / double(x.size() - 1);
}

double running_cost_1d(const Config1D& x, Index i, double control, const GameParams& p) {
  return state_cost_1d(x, i, p) + 0.5 * control * control;
}

double global_cost_1d(const Config1D& x, const GameParams& p) {
  Vec h1, h2;
  pair_sums_all_1d(x.points(), h1, h2);
  return x.points().squaredNorm() / 8 + p.c2 / 2 * h2.sum() / double(x.size() - 1);
}

double state_cost_2d(const Config2D& z, Index i, const GameParams& p) {
  const auto s = pair_sums_2d(z, i);
  return z[i].squaredNorm() / 8 + p.c1 * circumcircle_sum_2d(z.points(), i) + p.c2 * s.h2 / double(z.size() - 1);
}

double running_cost_2d(const Config2D& z, Index i, const Vec2& control, const GameParams& p) {
  return state_cost_2d(z, i, p) + 0.5 * control.squaredNorm();
}

double global_cost_2d(const Config2D& z, const GameParams& p) {
  Points2 h1;
  Vec h2;
  pair_sums_all_2d(z.points(), h1, h2);
  double circ = 0;
  for (Index i = 0; i < z.size(); ++i) circ += circumcircle_sum_2d(z.points(), i);
  return z.points().squaredNorm() / 8 + p.c1 / 3 * circ + p.c2 / 2 * h2.sum() / double(z.size() - 1);
}

BetaRoots beta_roots(double c2, double sigma) {
  if (!(sigma > 0)) throw DomainError("beta_roots: sigma must be positive");
  const double s2 = sigma * sigma, s4 = s2 * s2;
  BetaRoots r;
  if (s4 + 6 * c2 >= 0) r.closed = 2.0 / 3.0 * (s2 + std::sqrt(s4 + 6 * c2));
  if (s4 + 4 * c2 >= 0) r.open = s2 + std::sqrt(s4 + 4 * c2);
  return r;
}

double ergodic_constant(const GameParams& p, Model m) {
  p.validate();
  const double s2 = p.sigma * p.sigma, nm1 = double(p.n - 1);
  switch (m) {
    case Model::closed1d: return p.beta / 4 + s2 / (4 * nm1);
    case Model::open1d: return p.beta / 8 + s2 / (4 * nm1);
    case Model::closed2d: return p.beta / 4 + s2 / (2 * nm1);
    case Model::open2d: return p.beta / 8 + s2 / (2 * nm1);
  }
  return nan;
}

double avg_open_cost(double c2, double sigma, Index n) {
  const auto r = beta_roots(c2, sigma);
  const double s2 = sigma * sigma;
  if (!r.open || !(*r.open > s2)) throw DomainError("avg_open_cost: needs beta_open > sigma^2");
  if (n < 2) throw DomainError("avg_open_cost: n must be >= 2");
  const double b = *r.open;
  return b / 8 + s2 / (4 * double(n - 1)) + c2 / (4 * (b - s2));
}

double open_loop_player_proxy(double c2, double sigma, double q) {
  const auto r = beta_roots(c2, sigma);
  if (!r.open || !(*r.open > sigma * sigma)) throw DomainError("open_loop_player_proxy: needs beta_open > sigma^2");
  const double b = *r.open;
  const auto mu = semicircle(b);
  const double x = mu.quantile(q);
  const double L = limit_singular_stat(b, sigma, mu, q);
  return x * x / 8 + c2 * L + b * sigma * sigma / 8 * L;
}

LoopComparison compare_loops(const std::vector<double>& grid, double sigma, Index n) {
  if (n < 2) throw DomainError("compare_loops: n must be >= 2");
  LoopComparison lc;
  lc.sigma = sigma;
  lc.n = n;
  lc.c2_grid = grid;
  const double s2 = sigma * sigma, nm1 = double(n - 1);
  for (double c2 : grid) {
    const auto r = beta_roots(c2, sigma);
    const auto r2 = beta_roots(2 * c2, sigma);
    const double bc = r.closed.value_or(nan), bo = r.open.value_or(nan), bo2 = r2.open.value_or(nan);
    lc.beta_closed.push_back(bc);
    lc.beta_open.push_back(bo);
    lc.beta_open_2c2.push_back(bo2);
    lc.lambda_closed_avg.push_back(bc / 4 + s2 / (4 * nm1));
    lc.lambda_open_avg.push_back(bo > s2 ? avg_open_cost(c2, sigma, n) : nan);
    lc.lambda_global_opt.push_back(bo2 / 8 + s2 / (4 * nm1));
    lc.semicircle_radii.emplace_back(std::sqrt(2 * bc), std::sqrt(2 * bo));
  }
  return lc;
}

namespace {

double control_1d(const Vec& x, Index i, const GameParams& p, const Feedback& fb) {
  const auto s = pair_sums_1d(x, i);
  return fb.scale * (0.5 * (p.beta + fb.beta_shift) * s.h1 - 0.5 * p.potential.dV(x[i])) + fb.additive;
}

Vec2 control_2d(const Points2& z, Index i, const GameParams& p, const Feedback& fb) {
  const auto s = pair_sums_2d(z, i);
  return fb.scale * (0.5 * (p.beta + fb.beta_shift) * s.h1 - 0.5 * z.col(i)) + fb.additive_2d;
}

bool two_d(Model m) { return m == Model::closed2d || m == Model::open2d; }

Integrands<Vec> cost_integrand_1d(const GameParams& p, Model m, Index i, const Feedback& fb) {
  if (m == Model::closed1d)
    return {{"cost", [p, i, fb](const Vec& x) {
               const double a = control_1d(x, i, p, fb);
               const auto s = pair_sums_1d(x, i);
               return x[i] * x[i] / 8 + p.c2 * s.h2 / double(x.size() - 1) + 0.5 * a * a;
             }}};
  return {{"cost", [p](const Vec& x) {
             const double n = double(x.size());
             Vec h1, h2;
             pair_sums_all_1d(x, h1, h2);
             const Vec a = p.beta / 2 * h1 - x / 2;
             return (0.5 * a.squaredNorm() + x.squaredNorm() / 8 + p.c2 / 2 * h2.sum() / (n - 1)) / n;
           }}};
}

Integrands<Points2> cost_integrand_2d(const GameParams& p, Model m, Index i, const Feedback& fb) {
  if (m == Model::closed2d)
    return {{"cost", [p, i, fb](const Points2& z) {
               const Vec2 a = control_2d(z, i, p, fb);
               const auto s = pair_sums_2d(z, i);
               return z.col(i).squaredNorm() / 8 + p.c1 * circumcircle_sum_2d(z, i) +
                      p.c2 * s.h2 / double(z.cols() - 1) + 0.5 * a.squaredNorm();
             }}};
  return {{"cost", [p](const Points2& z) {
             const Index n = z.cols();
             Points2 h1;
             Vec h2;
             pair_sums_all_2d(z, h1, h2);
             const Points2 a = p.beta / 2 * h1 - z / 2;
             double circ = 0;
             for (Index k = 0; k < n; ++k) circ += circumcircle_sum_2d(z, k);
             const double F = z.squaredNorm() / 8 + p.c1 / 3 * circ + p.c2 / 2 * h2.sum() / double(n - 1);
             return (0.5 * a.squaredNorm() + F) / double(n);
           }}};
}

SdeConfig replica(const SdeConfig& sde, int r) {
  SdeConfig s = sde;
  s.seed = derive_seed(sde.seed, std::uint64_t(r));
  s.keep_states = false;
  return s;
}

}  // namespace

Estimate mc_player_cost(const GameParams& p, Model m, const SdeConfig& sde, Index i, const MonteCarloOptions& mc) {
  p.validate();
  if (i < 0 || i >= p.n) throw DomainError("mc_player_cost: index out of range");
  if (mc.replicas < 1) throw DomainError("mc_player_cost: replicas must be >= 1");
  if (!two_d(m) && !(p.beta > p.sigma * p.sigma)) throw DomainError("mc_player_cost: 1D needs beta > sigma^2");
  const Feedback none{};
  if (two_d(m)) {
    const Config2D z0(initial_state_2d(p));
    std::vector<Trajectory2D> reps(size_t(mc.replicas));
    parallel_for(reps.size(), mc.workers,
                 [&](size_t r) { reps[r] = simulate(z0, p, replica(sde, int(r)), cost_integrand_2d(p, m, i, none)); });
    return ergodic_average(reps, "cost", mc.batches);
  }
  const Config1D x0(initial_state_1d(p));
  std::vector<Trajectory1D> reps(size_t(mc.replicas));
  parallel_for(reps.size(), mc.workers,
               [&](size_t r) { reps[r] = simulate(x0, p, replica(sde, int(r)), cost_integrand_1d(p, m, i, none)); });
  return ergodic_average(reps, "cost", mc.batches);
}

namespace {

template <class State>
Trajectory<State> paired_delta(const Trajectory<State>& dev, const Trajectory<State>& eq) {
  Trajectory<State> d;
  d.times = eq.times;
  const auto& a = dev.integrals.at("cost");
  const auto& b = eq.integrals.at("cost");
  auto& out = d.integrals["delta"];
  for (size_t k = 0; k < a.size(); ++k) out.push_back(a[k] - b[k]);
  return d;
}

}  // namespace

Estimate deviation_experiment(const GameParams& p, Model m, const SdeConfig& sde, const Feedback& fb,
                              const MonteCarloOptions& mc) {
  p.validate();
  if (m != Model::closed1d && m != Model::closed2d)
    throw DomainError("deviation_experiment: feedback deviations probe the closed-loop models");
  if (!fb.active() || fb.player >= p.n) throw DomainError("deviation_experiment: feedback must name a valid player");
  const Index i = fb.player;
  // neutral feedback reproduces the equilibrium drift bit for bit
  const Feedback eq{i};
  if (m == Model::closed2d) {
    const Config2D z0(initial_state_2d(p));
    std::vector<Trajectory2D> reps(size_t(mc.replicas));
    parallel_for(reps.size(), mc.workers, [&](size_t r) {
      const SdeConfig s = replica(sde, int(r));
      reps[r] = paired_delta(simulate(z0, p, s, cost_integrand_2d(p, m, i, fb), fb),
                             simulate(z0, p, s, cost_integrand_2d(p, m, i, eq), eq));
    });
    return ergodic_average(reps, "delta", mc.batches);
  }
  const Config1D x0(initial_state_1d(p));
  std::vector<Trajectory1D> reps(size_t(mc.replicas));
  parallel_for(reps.size(), mc.workers, [&](size_t r) {
    const SdeConfig s = replica(sde, int(r));
    reps[r] = paired_delta(simulate(x0, p, s, cost_integrand_1d(p, m, i, fb), fb),
                           simulate(x0, p, s, cost_integrand_1d(p, m, i, eq), eq));
  });
  return ergodic_average(reps, "delta", mc.batches);
}

double epsilon_nash_2d(const GameParams& p, const Samples2D& samples, Index i) {
  const double excess = p.c2 - GameParams::c2_closed_2d(p.beta);
  if (excess < 0) throw DomainError("epsilon_nash_2d: needs c2 >= 3 beta^2/8");
  if (samples.samples.empty()) throw DomainError("epsilon_nash_2d: no samples");
  double m = 0;
  for (const auto& z : samples.samples) m += pair_sums_2d(z, i).h2 / double(z.cols() - 1);
  return excess * m / double(samples.samples.size());
}

}  // namespace dyson
