#include "cli.hpp"

#include "dyson/equilibrium.hpp"
#include "dyson/io.hpp"
#include "dyson/nash.hpp"
#include "dyson/parallel.hpp"
#include "dyson/stats.hpp"

#include "json.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <numbers>
#include <numeric>

namespace dyson::cli {

namespace {

using nlohmann::json;

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json report_json(const IdentityReport& r, double tol) {
  json j;
  for (const auto& [k, v] : r.max_relative_error) j[k] = num(v);
  return {{"max_error", j}, {"tolerance", tol}, {"worst", num(r.worst())}, {"pass", r.worst() <= tol}};
}

bool planar(Model m) { return m == Model::closed2d || m == Model::open2d; }

// Collects artifacts under the output directory; one writer per file.
class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}
  void write(const std::string& name, const std::string& text) {
    write_text((std::filesystem::path(dir_) / name).string(), text);
    names_.push_back(name);
  }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::string dir_;
  std::vector<std::string> names_;
};

struct Context {
  const ExperimentConfig& c;
  Outputs& out;
  json summary;
  bool failed = false;
  std::string failure;
};

void verify_identities(Context& x) {
  SweepSpec s;
  s.seed = x.c.seed;
  s.count = x.c.configs;
  s.n_max = x.c.n_max;
  const auto r = identity_sweep(s);
  x.summary = report_json(r, 1e-12);
  x.summary["configurations"] = x.c.configs;
  x.out.write("identities.json", x.summary.dump(2) + "\n");
  if (r.worst() > 1e-12) x.failed = true, x.failure = "identity error above 1e-12";
}

void verify_nash(Context& x) {
  SweepSpec s;
  s.seed = x.c.seed;
  s.count = x.c.configs;
  s.n_max = x.c.n_max;
  s.fixed = x.c.params;
  const auto res = residual_sweep(s);
  const auto m1 = master_suite_1d(x.c.params.beta);
  const auto m2 = master_suite_2d(x.c.params.beta);
  json j;
  j["residuals"] = report_json(res, 1e-10);
  j["residuals"]["c2_closed_1d"] = x.c.params.c2;
  j["master_1d"] = report_json(m1, 1e-4);
  j["master_2d"] = report_json(m2, 1e-3);
  x.summary = j;
  x.out.write("nash.json", j.dump(2) + "\n");
  std::vector<std::string> bad;
  if (res.worst() > 1e-10) bad.push_back("residuals");
  if (m1.worst() > 1e-4) bad.push_back("master_1d");
  if (m2.worst() > 1e-3) bad.push_back("master_2d");
  if (!bad.empty()) {
    x.failed = true;
    for (const auto& b : bad) x.failure += (x.failure.empty() ? "" : ", ") + b;
    x.failure += " above tolerance";
  }
}

void simulate_cmd(Context& x) {
  const auto& c = x.c;
  const GameParams& p = c.params;
  SdeConfig one = c.sde;
  one.keep_states = true;
  if (planar(c.model)) {
    const Config2D z0(initial_state_2d(p));
    Integrands<Points2> f{{"cost", [&](const Points2& z) { return state_cost_2d(Config2D(z), c.player, p); }}};
    const auto tr = simulate(z0, p, one, f);
    CsvTable t({"t", "particle", "x", "y"});
    for (std::size_t s = 0; s < tr.times.size(); ++s)
      for (Index k = 0; k < p.n; ++k) t.add({tr.times[s], (long long)k, tr.states[s](0, k), tr.states[s](1, k)});
    x.out.write("trajectory.csv", t.str());
  } else {
    const Config1D x0(initial_state_1d(p));
    Integrands<Vec> f{{"state_cost", [&](const Vec& v) { return state_cost_1d(Config1D(v), c.player, p); }}};
    const auto tr = simulate(x0, p, one, f);
    CsvTable t({"t", "particle", "x"});
    for (std::size_t s = 0; s < tr.times.size(); ++s)
      for (Index k = 0; k < p.n; ++k) t.add({tr.times[s], (long long)k, tr.states[s][k]});
    x.out.write("trajectory.csv", t.str());
  }
  MonteCarloOptions mc{c.replicas, c.workers, c.batches};
  const auto e = mc_player_cost(p, c.model, c.sde, c.player, mc);
  const double lambda = ergodic_constant(p, c.model);
  x.summary = {{"model", model_name(c.model)}, {"player", c.player},          {"mean", num(e.mean)},
               {"std_error", num(e.std_error)}, {"lambda", lambda},             {"z", num((e.mean - lambda) / e.std_error)},
               {"replicas", c.replicas}};
  x.out.write("costs.json", x.summary.dump(2) + "\n");
}

void sample_cmd(Context& x) {
  const auto& c = x.c;
  const GameParams& p = c.params;
  ChainDiagnostics d;
  json stat;
  if (planar(c.model)) {
    const auto s = mala_chain_2d(p, c.chain);
    d = s.diag;
    CsvTable t({"sample", "particle", "x", "y"});
    for (std::size_t r = 0; r < s.samples.size(); ++r)
      for (Index k = 0; k < p.n; ++k) t.add({(long long)r, (long long)k, s.samples[r](0, k), s.samples[r](1, k)});
    x.out.write("samples.csv", t.str());
    if (p.n >= 3) {
      const auto st = per_index_stat_2d(s, c.player);
      stat = {{"index", c.player},
              {"h2", {{"mean", num(st.h2.mean)}, {"se", num(st.h2.std_error)}}},
              {"circ", {{"mean", num(st.circ.mean)}, {"se", num(st.circ.std_error)}}}};
    }
  } else {
    const auto s = mala_chain_1d(p, c.chain);
    d = s.diag;
    CsvTable t({"sample", "particle", "x"});
    for (std::size_t r = 0; r < s.samples.size(); ++r)
      for (Index k = 0; k < p.n; ++k) t.add({(long long)r, (long long)k, s.samples[r][k]});
    x.out.write("samples.csv", t.str());
    const auto st = per_index_stat_1d(s, c.player);
    stat = {{"index", c.player}, {"h2", {{"mean", num(st.mean)}, {"se", num(st.std_error)}}}};
  }
  x.summary = {{"acceptance", num(d.acceptance_rate)},
               {"iact", num(d.iact_estimate)},
               {"ess", num(d.ess)},
               {"step_size", num(d.step_size)},
               {"statistic", stat}};
  x.out.write("diagnostics.json", x.summary.dump(2) + "\n");
}

void stats_cmd(Context& x) {
  const auto& c = x.c;
  const Estimator e = parse_estimator(c.estimator);
  json tables = json::array();
  for (std::size_t k = 0; k < c.q_values.size(); ++k) {
    IndexRule rule{c.q_values[k], c.theta};
    if (estimator_is_2d(e) && !(rule.q < 1)) throw ConfigError("invariant violated: q < 1 for 2D index rules");
    const auto t = convergence_study(e, c.n_values, rule, c.params, c.chain, c.workers);
    const std::string stem = "stats_" + c.estimator + "_" + std::to_string(k);
    x.out.write(stem + ".csv", t.to_csv());
    x.out.write(stem + ".json", t.to_json() + "\n");
    for (const auto& r : t.rows)
      if (!r.error.empty()) {
        x.failed = true;
        x.failure = "sampler failed at N=" + std::to_string(r.n) + ": " + r.error;
      }
    tables.push_back({{"q", rule.q}, {"file", stem + ".csv"}});
  }
  x.summary = {{"estimator", c.estimator}, {"tables", tables}};
}

void compare_loops_cmd(Context& x) {
  const auto& c = x.c;
  const double sigma = c.params.sigma, s2 = sigma * sigma;
  const auto lc = compare_loops(c.c2_grid, sigma, c.params.n);

  CsvTable roots({"c2", "beta_closed", "beta_open", "beta_open_2c2", "residual_closed", "residual_open"});
  CsvTable costs({"c2", "lambda_closed_avg", "lambda_open_avg", "lambda_global_opt", "beta_closed_over_4"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < lc.c2_grid.size(); ++k) {
    const double c2 = lc.c2_grid[k], bc = lc.beta_closed[k], bo = lc.beta_open[k];
    const double rc = std::isfinite(bc) ? GameParams::c2_closed_1d(bc, sigma) - c2 : nan;
    const double ro = std::isfinite(bo) ? GameParams::c2_open_1d(bo, sigma) - c2 : nan;
    roots.add({c2, bc, bo, lc.beta_open_2c2[k], rc, ro});
    costs.add({c2, lc.lambda_closed_avg[k], lc.lambda_open_avg[k], lc.lambda_global_opt[k], bc / 4});
  }
  x.out.write("beta_roots.csv", roots.str());
  x.out.write("costs.csv", costs.str());

  const auto r = beta_roots(c.density_c2, sigma);
  if (!r.closed || !r.open) throw ConfigError("grid.density_c2: both roots must exist");
  auto table = [&](double beta, bool open) {
    const auto mu = semicircle(beta);
    CsvTable t({"x", "density", "q", "player_cost"});
    const int m = c.density_points;
    for (int k = 0; k < m; ++k) {
      const double xx = mu.a() + (mu.b() - mu.a()) * k / (m - 1.0);
      const double q = std::clamp(mu.cdf(xx), 0.0, 1.0);
      double cost = beta / 4 + s2 / (4 * double(c.params.n - 1));
      if (open) cost = *r.open > s2 ? open_loop_player_proxy(c.density_c2, sigma, q) : nan;
      t.add({xx, mu.density(xx), q, cost});
    }
    return t.str();
  };
  x.out.write("density_closed.csv", table(*r.closed, false));
  x.out.write("density_open.csv", table(*r.open, true));
  x.out.write("figure1.gp",
              "set datafile separator ','\n"
              "set multiplot layout 1,3\n"
              "set xlabel 'c2'\n"
              "plot 'beta_roots.csv' using 1:2 with lines title 'beta closed', '' using 1:3 with lines title 'beta open'\n"
              "plot 'costs.csv' using 1:2 with lines title 'closed', '' using 1:3 with lines title 'open', "
              "'' using 1:4 with lines title 'global optimum'\n"
              "set xlabel 'x'\n"
              "plot 'density_closed.csv' using 1:2 with lines title 'closed', 'density_open.csv' using 1:2 with lines "
              "title 'open'\n"
              "unset multiplot\n");
  x.summary = {{"rows", lc.c2_grid.size()},
               {"density_c2", c.density_c2},
               {"radius_closed", std::sqrt(2 * *r.closed)},
               {"radius_open", std::sqrt(2 * *r.open)}};
}

// the `count` heaviest circumcircles through player i
struct Circle {
  Index k, l;
  Vec2 center;
  double radius, weight;
};

std::vector<Circle> heaviest_circles(const Points2& z, Index i, std::size_t count) {
  std::vector<Circle> all;
  const Vec2 zi = z.col(i);
  for (Index k = 0; k < z.cols(); ++k)
    for (Index l = k + 1; l < z.cols(); ++l) {
      if (k == i || l == i) continue;
      const Vec2 a = z.col(k) - zi, b = z.col(l) - zi;
      const double w = 2 * inv_sq_circumdiameter<double>(a, b);
      const double d = 2 * (a.x() * b.y() - a.y() * b.x());
      Circle c{k, l, zi, std::numeric_limits<double>::infinity(), w};
      if (d != 0) {
        const Vec2 u((b.y() * a.squaredNorm() - a.y() * b.squaredNorm()) / d,
                     (a.x() * b.squaredNorm() - b.x() * a.squaredNorm()) / d);
        c.center = zi + u;
        c.radius = u.norm();
      }
      all.push_back(c);
    }
  count = std::min(count, all.size());
  std::partial_sort(all.begin(), all.begin() + std::ptrdiff_t(count), all.end(),
                    [](const Circle& a, const Circle& b) { return a.weight > b.weight; });
  all.resize(count);
  return all;
}

void coulomb_relax_cmd(Context& x) {
  const auto& c = x.c;
  const GameParams& p = c.params;
  if (p.n < 3) throw ConfigError("invariant violated: n >= 3 for circumcircles");
  // start far from equilibrium: a jittered square lattice of side 1/2
  PhiloxStream rng(c.seed, 7);
  const Index side = Index(std::ceil(std::sqrt(double(p.n))));
  Points2 z0(2, p.n);
  for (Index k = 0; k < p.n; ++k) {
    const double u = (double(k % side) + 0.5 + 0.2 * (rng.uniform() - 0.5)) / double(side);
    const double v = (double(k / side) + 0.5 + 0.2 * (rng.uniform() - 0.5)) / double(side);
    z0.col(k) = Vec2(0.5 * (u - 0.5), 0.5 * (v - 0.5));
  }
  std::vector<std::int64_t> steps;
  std::int64_t stride = 0;
  for (double t : c.times) {
    const auto s = std::llround(t / c.sde.dt);
    if (std::abs(double(s) * c.sde.dt - t) > 1e-9 * std::max(1.0, t))
      throw ConfigError("grid.times: must be multiples of sde.dt");
    steps.push_back(s);
    stride = std::gcd(stride, s);
  }
  SdeConfig run = c.sde;
  run.burn_in = 0;
  run.horizon = double(steps.back()) * c.sde.dt;
  run.record_stride = std::max<std::int64_t>(stride, 1);
  run.keep_states = true;
  const auto tr = simulate(Config2D(z0), p, run);
  const double radius = circular_law(p.beta).radius();
  json snaps = json::array();
  for (std::size_t j = 0; j < steps.size(); ++j) {
    const Points2& z = tr.states.at(std::size_t(steps[j] / run.record_stride));
    // spiral ranks for the labels
    std::vector<Index> order(std::size_t(p.n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return spiral_less<double>(z.col(a), z.col(b), p.n, radius);
    });
    std::vector<Index> rank(std::size_t(p.n));
    for (Index r = 0; r < p.n; ++r) rank[std::size_t(order[std::size_t(r)])] = r;
    CsvTable pts({"t", "particle", "spiral_rank", "x", "y", "player"});
    for (Index k = 0; k < p.n; ++k)
      pts.add({c.times[j], (long long)k, (long long)rank[std::size_t(k)], z(0, k), z(1, k), (long long)(k == c.player)});
    CsvTable circ({"t", "k", "l", "cx", "cy", "radius", "weight"});
    for (const auto& cc : heaviest_circles(z, c.player, 12))
      circ.add({c.times[j], (long long)cc.k, (long long)cc.l, cc.center.x(), cc.center.y(), cc.radius, cc.weight});
    const std::string tag = std::to_string(j);
    x.out.write("snapshot_" + tag + ".csv", pts.str());
    x.out.write("circles_" + tag + ".csv", circ.str());
    double rmax = 0;
    for (Index k = 0; k < p.n; ++k) rmax = std::max(rmax, z.col(k).norm());
    snaps.push_back({{"t", c.times[j]},
                     {"max_radius", rmax},
                     {"second_moment", z.squaredNorm() / double(p.n)},
                     {"circumcircle_sum", circumcircle_sum_2d(z, c.player)}});
  }
  x.summary = {{"equilibrium_radius", radius}, {"snapshots", snaps}, {"halvings", tr.halvings}};
  x.out.write("relax.json", x.summary.dump(2) + "\n");
}

void ginibre_cmd(Context& x) {
  const auto& c = x.c;
  const Index n = c.params.n;
  Index rn = Index(std::sqrt(double(n)));
  while (rn * rn > n) --rn;
  const double radius = circular_law(c.params.beta).radius();
  CsvTable t({"k", "shell", "x", "y", "x_scaled", "y_scaled"});
  for (Index k = 1; k <= rn * rn; ++k) {
    const Vec2 g = ginibre_predicted_location(k, n);
    Index s = 1;
    while (s * s < k) ++s;
    t.add({(long long)k, (long long)s, g.x(), g.y(), radius * g.x(), radius * g.y()});
  }
  x.out.write("ginibre_locations.csv", t.str());
  x.summary = {{"n", n}, {"covered", rn * rn}, {"radius", radius}};
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

RunResult run(const ExperimentConfig& c) {
  c.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(c.output, ec);
  if (ec || !fs::is_directory(c.output)) throw ConfigError("invariant violated: output directory writable (" + c.output + ")");

  const auto started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  Outputs out(c.output);
  Context x{c, out, json::object(), false, {}};
  if (c.command == "verify-identities") verify_identities(x);
  else if (c.command == "verify-nash") verify_nash(x);
  else if (c.command == "simulate") simulate_cmd(x);
  else if (c.command == "sample") sample_cmd(x);
  else if (c.command == "stats") stats_cmd(x);
  else if (c.command == "compare-loops") compare_loops_cmd(x);
  else if (c.command == "coulomb-relax") coulomb_relax_cmd(x);
  else if (c.command == "ginibre-locations") ginibre_cmd(x);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunResult r;
  r.outputs = out.names();
  const bool verify = c.command.rfind("verify-", 0) == 0;
  const std::string status = !x.failed ? "ok" : verify ? "acceptance_failure" : "numerical_failure";
  json manifest{{"command", c.command},
                {"config", json::parse(config_json(c))},
                {"seed", c.seed},
                {"versions",
                 {{"dyson", version},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                  {"compiler", __VERSION__},
                  {"cplusplus", __cplusplus}}},
                {"outputs", r.outputs},
                {"summary", x.summary},
                {"status", status}};
  write_text((fs::path(c.output) / "manifest.json").string(), manifest.dump(2) + "\n");
  write_text((fs::path(c.output) / "timing.json").string(),
             json{{"started", started}, {"wall_seconds", wall}, {"workers", c.workers}}.dump(2) + "\n");
  r.outputs.push_back("manifest.json");
  r.outputs.push_back("timing.json");
  if (x.failed) {
    if (verify) throw AcceptanceFailure(x.failure);
    throw NumericalError(x.failure);
  }
  return r;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e) || dynamic_cast<const IoError*>(&e))
    return 2;
  if (dynamic_cast<const AcceptanceFailure*>(&e)) return 4;
  return 3;
}

std::string error_json(const std::exception& e) {
  const int code = exit_code_for(e);
  const char* kind = code == 2 ? "config" : code == 4 ? "acceptance" : "numerical";
  return json{{"error", {{"kind", kind}, {"message", e.what()}, {"exit_code", code}}}}.dump();
}

}  // namespace dyson::cli
