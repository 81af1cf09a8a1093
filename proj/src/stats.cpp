#include "dyson/stats.hpp"

#include "dyson/equilibrium.hpp"
#include "dyson/game.hpp"
#include "dyson/io.hpp"
#include "dyson/nash.hpp"
#include "dyson/parallel.hpp"

#include "json.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <algorithm>

namespace dyson {

Estimate trace_estimate(const std::vector<double>& trace) {
  if (trace.empty()) throw DomainError("statistic over an empty sample");
  const double n = double(trace.size());
  double m = 0;
  for (double v : trace) m += v;
  m /= n;
  double var = 0;
  for (double v : trace) var += (v - m) * (v - m);
  Estimate e{m, 0};
  if (trace.size() > 1) e.std_error = std::sqrt(var / (n - 1) * iact(trace) / n);
  return e;
}

namespace {

void require_index(Index i, Index n) {
  if (i < 0 || i >= n) throw DomainError("index out of range for the sample size");
}

}  // namespace

Estimate per_index_stat_1d(const Samples1D& s, Index i) {
  if (s.samples.empty()) throw DomainError("per_index_stat_1d: empty samples");
  std::vector<double> t;
  t.reserve(s.samples.size());
  for (const auto& x : s.samples) {
    require_index(i, x.size());
    t.push_back(pair_sums_1d(x, i).h2 / double(x.size() - 1));
  }
  return trace_estimate(t);
}

Estimate index_averaged_stat_1d(const Samples1D& s) {
  if (s.samples.empty()) throw DomainError("index_averaged_stat_1d: empty samples");
  std::vector<double> t;
  t.reserve(s.samples.size());
  Vec h1, h2;
  for (const auto& x : s.samples) {
    pair_sums_all_1d(x, h1, h2);
    t.push_back(h2.mean() / double(x.size() - 1));
  }
  return trace_estimate(t);
}

NashTermStats nash_term_stats_1d(const Samples1D& s, Index i, const GameParams& p) {
  if (s.samples.empty()) throw DomainError("nash_term_stats_1d: empty samples");
  p.validate();
  GameParams closed = p;
  closed.c2 = GameParams::c2_closed_1d(p.beta, p.sigma);
  const double nm1 = double(p.n - 1), s2 = p.sigma * p.sigma;
  std::vector<double> self, inter, diff;
  NashTermStats out;
  Vec h1, h2;
  for (const auto& x : s.samples) {
    require_index(i, x.size());
    const Config1D c(x);
    const auto g = value_grads_1d(c, i, p.beta);
    pair_sums_all_1d(x, h1, h2);
    double a = 0;
    for (Index k = 0; k < x.size(); ++k)
      if (k != i) a += (x[k] / 2 - p.beta / 2 * h1[k]) * g.cross_grads[k];
    self.push_back(g.self_grad * g.self_grad);
    inter.push_back(a);
    diff.push_back(-s2 / (2 * nm1) * g.laplacian);
    if (p.potential.kind == PotentialSpec::Kind::quadratic)
      out.max_residual = std::max(out.max_residual, std::abs(residual_nash_1d(c, i, closed).relative));
  }
  out.mean["self"] = trace_estimate(self);
  out.mean["interaction"] = trace_estimate(inter);
  out.mean["diffusion"] = trace_estimate(diff);

  const auto mu = equilibrium_for(p.potential, p.beta);
  const double gamma = mu.quantile((double(i) + 0.5) / double(p.n));
  const double m = mu.density(gamma), pi2 = std::numbers::pi * std::numbers::pi;
  const double K = pi2 * p.beta * p.beta * s2 * m * m / (12 * (p.beta - s2));
  const double dxU = gamma / 2 - p.beta / 2 * mu.hilbert(gamma);
  out.limit["self"] = K + dxU * dxU;
  out.limit["interaction"] = K;
  out.limit["diffusion"] = -2 * K;
  return out;
}

Stat2D per_index_stat_2d(const Samples2D& s, Index i) {
  if (s.samples.empty()) throw DomainError("per_index_stat_2d: empty samples");
  std::vector<double> h, c;
  for (const auto& z : s.samples) {
    require_index(i, z.cols());
    h.push_back(pair_sums_2d(z, i).h2 / double(z.cols() - 1));
    c.push_back(circumcircle_sum_2d(z, i));
  }
  return {trace_estimate(h), trace_estimate(c)};
}

const char* estimator_name(Estimator e) {
  switch (e) {
    case Estimator::h2_1d: return "h2_1d";
    case Estimator::h2_avg_1d: return "h2_avg_1d";
    case Estimator::h2_2d: return "h2_2d";
    case Estimator::circ_2d: return "circ_2d";
    case Estimator::epsilon_2d: return "epsilon_2d";
    case Estimator::constant: return "constant";
  }
  return "?";
}

Estimator parse_estimator(const std::string& s) {
  for (auto e : {Estimator::h2_1d, Estimator::h2_avg_1d, Estimator::h2_2d, Estimator::circ_2d,
                 Estimator::epsilon_2d, Estimator::constant})
    if (s == estimator_name(e)) return e;
  throw DomainError("unknown estimator: " + s);
}

bool estimator_is_2d(Estimator e) {
  return e == Estimator::h2_2d || e == Estimator::circ_2d || e == Estimator::epsilon_2d;
}

std::string IndexRule::describe(bool planar) const {
  if (!planar) return "i = ceil(" + format_number(q) + " N)";
  return "k nearest to " + format_number(q) + " exp(2 pi i " + format_number(theta) + ")";
}

Index index_1d(const IndexRule& r, Index n) {
  if (!(r.q > 0 && r.q <= 1)) throw DomainError("invariant violated: 0 < q <= 1");
  const Index i = Index(std::ceil(r.q * double(n) - 1e-12));
  return std::clamp<Index>(i, 1, n) - 1;
}

Index index_2d(const IndexRule& r, Index n) {
  if (!(r.q >= 0 && r.q < 1)) throw DomainError("invariant violated: 0 <= q < 1");
  Index rn = Index(std::sqrt(double(n)));
  while (rn * rn > n) --rn;
  const double a = 2 * std::numbers::pi * r.theta;
  const Vec2 target(r.q * std::cos(a), r.q * std::sin(a));
  Index best = 1;
  double dist = std::numeric_limits<double>::infinity();
  for (Index k = 1; k <= rn * rn; ++k) {
    const double d = (ginibre_predicted_location(k, n) - target).norm();
    if (d <= dist) {
      dist = d;
      best = k;
    }
  }
  return best - 1;
}

void ConvergenceTable::validate() const {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k && rows[k].n <= rows[k - 1].n) throw DomainError("invariant violated: n_values strictly increasing");
    if (rows[k].estimate.std_error < 0) throw DomainError("invariant violated: std_error >= 0");
  }
}

std::string ConvergenceTable::to_csv() const {
  CsvTable t({"N", "index", "x", "y", "mean", "se", "limit", "gap", "acceptance", "iact", "error"});
  for (const auto& r : rows)
    t.add({(long long)r.n, (long long)r.index, r.location.x(), r.location.y(), r.estimate.mean, r.estimate.std_error,
           r.limit, r.gap(), r.diag.acceptance_rate, r.diag.iact_estimate, r.error.empty() ? "" : "failed"});
  return t.str();
}

std::string ConvergenceTable::to_json() const {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["estimator"] = estimator;
  j["index_rule"] = index_rule;
  j["limit"] = limit ? num(*limit) : json(nullptr);
  j["rows"] = json::array();
  for (const auto& r : rows) {
    json row{{"N", r.n},
             {"index", r.index},
             {"location", {num(r.location.x()), num(r.location.y())}},
             {"mean", num(r.estimate.mean)},
             {"se", num(r.estimate.std_error)},
             {"limit", num(r.limit)},
             {"gap", num(r.gap())},
             {"acceptance", num(r.diag.acceptance_rate)},
             {"iact", num(r.diag.iact_estimate)},
             {"ess", num(r.diag.ess)}};
    if (!r.error.empty()) row["error"] = r.error;
    j["rows"].push_back(row);
  }
  return j.dump(2);
}

ConvergenceTable convergence_study(Estimator e, const std::vector<Index>& n_values, const IndexRule& rule,
                                   const GameParams& p, const ChainConfig& chain, unsigned workers) {
  const bool planar = estimator_is_2d(e);
  ConvergenceTable t;
  t.estimator = estimator_name(e);
  t.index_rule = rule.describe(planar);
  for (std::size_t k = 1; k < n_values.size(); ++k)
    if (n_values[k] <= n_values[k - 1]) throw DomainError("invariant violated: n_values strictly increasing");

  const double a = 2 * std::numbers::pi * rule.theta;
  std::optional<EquilibriumMeasure1D> mu1;
  std::optional<EquilibriumMeasure2D> mu2;
  if (planar)
    mu2 = circular_law(p.beta);
  else if (e != Estimator::constant)
    mu1 = equilibrium_for(p.potential, p.beta);

  if (e == Estimator::constant) t.limit = 1.0;
  if (e == Estimator::h2_1d) t.limit = limit_singular_stat(p.beta, p.sigma, *mu1, rule.q);
  if (e == Estimator::h2_avg_1d) t.limit = limit_singular_stat_avg(p.beta, p.sigma, *mu1);
  if (e == Estimator::circ_2d)
    t.limit = circumcircle_limit(mu2->radius() * rule.q * Vec2(std::cos(a), std::sin(a)), *mu2);

  t.rows.resize(n_values.size());
  parallel_for(n_values.size(), workers, [&](std::size_t k) {
    ConvergenceRow& row = t.rows[k];
    GameParams q = p;
    q.n = row.n = n_values[k];
    ChainConfig c = chain;
    c.seed = derive_seed(chain.seed, std::uint64_t(q.n));
    try {
      q.validate();
      if (planar) {
        row.index = index_2d(rule, q.n);
        row.location = mu2->radius() * ginibre_predicted_location(row.index + 1, q.n);
      } else {
        row.index = index_1d(rule, q.n);
        if (mu1) row.location = Vec2(mu1->quantile((double(row.index) + 0.5) / double(q.n)), 0);
      }
      switch (e) {
        case Estimator::constant:
          row.estimate = {1.0, 0.0};
          row.limit = 1.0;
          break;
        case Estimator::h2_1d: {
          const auto s = mala_chain_1d(q, c);
          row.diag = s.diag;
          row.estimate = per_index_stat_1d(s, row.index);
          row.limit = *t.limit;
          break;
        }
        case Estimator::h2_avg_1d: {
          const auto s = mala_chain_1d(q, c);
          row.diag = s.diag;
          row.estimate = index_averaged_stat_1d(s);
          row.limit = *t.limit;
          break;
        }
        case Estimator::h2_2d:
        case Estimator::circ_2d:
        case Estimator::epsilon_2d: {
          const auto s = mala_chain_2d(q, c);
          row.diag = s.diag;
          const auto st = per_index_stat_2d(s, row.index);
          if (e == Estimator::h2_2d) row.estimate = st.h2;
          if (e == Estimator::circ_2d) {
            row.estimate = st.circ;
            row.limit = circumcircle_limit(row.location, *mu2);
          }
          if (e == Estimator::epsilon_2d) {
            const double excess = q.c2 - GameParams::c2_closed_2d(q.beta);
            if (excess < 0) throw DomainError("epsilon_2d needs c2 >= 3 beta^2/8");
            row.estimate = {excess * st.h2.mean, excess * st.h2.std_error};
          }
          break;
        }
      }
    } catch (const std::exception& ex) {
      row.error = ex.what();
      row.estimate = {std::numeric_limits<double>::quiet_NaN(), 0.0};
    }
  });
  t.validate();
  return t;
}

MomentFlow second_moment_flow(const GameParams& p, double m2_0, const std::vector<double>& times,
                              const SdeConfig& sde, int replicas, unsigned workers) {
  p.validate();
  sde.validate();
  if (p.potential.kind != PotentialSpec::Kind::quadratic) throw DomainError("second_moment_flow: quadratic potential only");
  if (!(m2_0 > 0)) throw DomainError("invariant violated: m2_0 > 0");
  if (replicas < 2) throw DomainError("invariant violated: replicas >= 2");
  if (times.empty()) throw DomainError("second_moment_flow: no times");
  std::vector<std::int64_t> steps;
  std::int64_t stride = 0;
  for (double t : times) {
    const auto s = std::llround(t / sde.dt);
    if (s <= 0 || std::abs(double(s) * sde.dt - t) > 1e-9 * std::max(1.0, t))
      throw DomainError("second_moment_flow: times must be positive multiples of dt");
    steps.push_back(s);
    stride = std::gcd(stride, s);
  }

  Vec x0 = initial_state_1d(p);
  x0 *= std::sqrt(m2_0 / x0.squaredNorm() * double(p.n));

  SdeConfig run = sde;
  run.burn_in = 0;
  run.horizon = double(*std::max_element(steps.begin(), steps.end())) * sde.dt;
  run.record_stride = stride;
  run.keep_states = true;

  std::vector<std::vector<double>> m2(size_t(replicas), std::vector<double>(times.size()));
  parallel_for(size_t(replicas), workers, [&](std::size_t r) {
    SdeConfig rr = run;
    rr.seed = derive_seed(sde.seed, r);
    const auto tr = simulate(Config1D(x0), p, rr);
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const auto& x = tr.states.at(size_t(steps[k] / stride));
      m2[r][k] = x.squaredNorm() / double(p.n);
    }
  });

  MomentFlow f;
  f.times = times;
  f.replicas = replicas;
  const double eq = p.beta / 2, eqn = eq + p.sigma * p.sigma / double(p.n - 1);
  for (std::size_t k = 0; k < times.size(); ++k) {
    double m = 0, v = 0;
    for (int r = 0; r < replicas; ++r) m += m2[size_t(r)][k];
    m /= replicas;
    for (int r = 0; r < replicas; ++r) v += (m2[size_t(r)][k] - m) * (m2[size_t(r)][k] - m);
    f.mean.push_back(m);
    f.sd.push_back(std::sqrt(v / (replicas - 1)));
    const double decay = std::exp(-times[k]);
    f.mean_field.push_back(eq + (m2_0 - eq) * decay);
    f.finite_n.push_back(eqn + (m2_0 - eqn) * decay);
  }
  return f;
}

}  // namespace dyson
