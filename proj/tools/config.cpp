#include "cli.hpp"

#include "dyson/io.hpp"
#include "dyson/stats.hpp"

#include "json.hpp"
#include "toml.hpp"

#include <set>
#include <sstream>

namespace dyson::cli {

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"verify-identities", "verify-nash", "simulate",        "sample",
                                              "stats",             "compare-loops", "coulomb-relax", "ginibre-locations"};
  return names;
}

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what); }

double number(const toml::node& n, const std::string& key) {
  if (auto v = n.value<double>(); v && (n.is_floating_point() || n.is_integer())) return *v;
  bad(key, "expected a number");
}

std::int64_t integer(const toml::node& n, const std::string& key) {
  if (!n.is_integer()) bad(key, "expected an integer");
  return *n.value<std::int64_t>();
}

std::string text(const toml::node& n, const std::string& key) {
  if (!n.is_string()) bad(key, "expected a string");
  return *n.value<std::string>();
}

std::vector<double> numbers(const toml::node& n, const std::string& key) {
  const auto* a = n.as_array();
  if (!a) bad(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : *a) out.push_back(number(e, key));
  return out;
}

std::vector<Index> integers(const toml::node& n, const std::string& key) {
  const auto* a = n.as_array();
  if (!a) bad(key, "expected an array of integers");
  std::vector<Index> out;
  for (const auto& e : *a) out.push_back(Index(integer(e, key)));
  return out;
}

struct Range {
  double lo = -0.1, hi = 1.0;
  std::int64_t points = 45;
  bool given = false;
};

struct State {
  ExperimentConfig c;
  Range range;
  std::string potential = "quadratic";
};

using Node = const toml::node&;
using Key = const std::string&;
using Setter = void (*)(State&, Node, Key);

const std::map<std::string, Setter>& schema() {
  static const std::map<std::string, Setter> s{
      {"run.command", [](State& st, Node n, Key k) { st.c.command = text(n, k); }},
      {"run.output", [](State& st, Node n, Key k) { st.c.output = text(n, k); }},
      {"run.seed",
       [](State& st, Node n, Key k) {
         const auto v = integer(n, k);
         if (v < 0) bad(k, "invariant violated: seed >= 0");
         st.c.seed = std::uint64_t(v);
       }},
      {"run.workers",
       [](State& st, Node n, Key k) {
         const auto v = integer(n, k);
         if (v < 1) bad(k, "invariant violated: workers >= 1");
         st.c.workers = unsigned(v);
       }},
      {"run.model",
       [](State& st, Node n, Key k) {
         try {
           st.c.model = parse_model(text(n, k));
         } catch (const DomainError& e) {
           bad(k, e.what());
         }
       }},
      {"run.player", [](State& st, Node n, Key k) { st.c.player = Index(integer(n, k)); }},
      {"run.replicas", [](State& st, Node n, Key k) { st.c.replicas = int(integer(n, k)); }},
      {"run.batches", [](State& st, Node n, Key k) { st.c.batches = int(integer(n, k)); }},
      {"run.configs", [](State& st, Node n, Key k) { st.c.configs = int(integer(n, k)); }},
      {"run.estimator", [](State& st, Node n, Key k) { st.c.estimator = text(n, k); }},

      {"game.n", [](State& st, Node n, Key k) { st.c.params.n = Index(integer(n, k)); }},
      {"game.beta", [](State& st, Node n, Key k) { st.c.params.beta = number(n, k); }},
      {"game.sigma", [](State& st, Node n, Key k) { st.c.params.sigma = number(n, k); }},
      {"game.c1", [](State& st, Node n, Key k) { st.c.params.c1 = number(n, k); }},
      {"game.c2", [](State& st, Node n, Key k) { st.c.params.c2 = number(n, k); }},
      {"game.potential", [](State& st, Node n, Key k) { st.potential = text(n, k); }},
      {"game.quartic", [](State& st, Node n, Key k) { st.c.quartic = number(n, k); }},

      {"sde.dt", [](State& st, Node n, Key k) { st.c.sde.dt = number(n, k); }},
      {"sde.max_halvings", [](State& st, Node n, Key k) { st.c.sde.max_halvings = int(integer(n, k)); }},
      {"sde.gap_tolerance", [](State& st, Node n, Key k) { st.c.sde.gap_tolerance = number(n, k); }},
      {"sde.burn_in", [](State& st, Node n, Key k) { st.c.sde.burn_in = number(n, k); }},
      {"sde.horizon", [](State& st, Node n, Key k) { st.c.sde.horizon = number(n, k); }},
      {"sde.record_stride", [](State& st, Node n, Key k) { st.c.sde.record_stride = Index(integer(n, k)); }},

      {"chain.step_size", [](State& st, Node n, Key k) { st.c.chain.step_size = number(n, k); }},
      {"chain.n_burn", [](State& st, Node n, Key k) { st.c.chain.n_burn = Index(integer(n, k)); }},
      {"chain.n_keep", [](State& st, Node n, Key k) { st.c.chain.n_keep = Index(integer(n, k)); }},
      {"chain.thin", [](State& st, Node n, Key k) { st.c.chain.thin = Index(integer(n, k)); }},
      {"chain.target_acceptance", [](State& st, Node n, Key k) { st.c.chain.target_acceptance = number(n, k); }},

      {"grid.c2", [](State& st, Node n, Key k) { st.c.c2_grid = numbers(n, k); }},
      {"grid.c2_min", [](State& st, Node n, Key k) { st.range.lo = number(n, k), st.range.given = true; }},
      {"grid.c2_max", [](State& st, Node n, Key k) { st.range.hi = number(n, k), st.range.given = true; }},
      {"grid.c2_points", [](State& st, Node n, Key k) { st.range.points = integer(n, k), st.range.given = true; }},
      {"grid.n_values", [](State& st, Node n, Key k) { st.c.n_values = integers(n, k); }},
      {"grid.q", [](State& st, Node n, Key k) { st.c.q_values = numbers(n, k); }},
      {"grid.theta", [](State& st, Node n, Key k) { st.c.theta = number(n, k); }},
      {"grid.n_max", [](State& st, Node n, Key k) { st.c.n_max = Index(integer(n, k)); }},
      {"grid.times", [](State& st, Node n, Key k) { st.c.times = numbers(n, k); }},
      {"grid.density_c2", [](State& st, Node n, Key k) { st.c.density_c2 = number(n, k); }},
      {"grid.density_points", [](State& st, Node n, Key k) { st.c.density_points = int(integer(n, k)); }},
  };
  return s;
}

void apply_override(toml::table& root, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + item + "': expected section.key=value");
  const std::string path = item.substr(0, eq), value = item.substr(eq + 1);
  const auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
    throw ConfigError("override '" + item + "': expected section.key=value");
  const std::string section = path.substr(0, dot), key = path.substr(dot + 1);
  toml::table parsed;
  try {
    parsed = toml::parse("v = " + value);
  } catch (const toml::parse_error&) {
    parsed.insert_or_assign("v", value);  // bare word
  }
  if (!root.contains(section)) root.insert_or_assign(section, toml::table{});
  auto* t = root[section].as_table();
  if (!t) throw ConfigError(section + ": expected a table");
  t->insert_or_assign(key, *parsed["v"].node());
}

double consistent_c2(Model m, double beta, double sigma) {
  switch (m) {
    case Model::closed1d: return GameParams::c2_closed_1d(beta, sigma);
    case Model::open1d: return GameParams::c2_open_1d(beta, sigma);
    case Model::closed2d: return GameParams::c2_closed_2d(beta);
    case Model::open2d: return GameParams::c2_open_2d(beta);
  }
  return 0;
}

bool planar(Model m) { return m == Model::closed2d || m == Model::open2d; }

}  // namespace

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const std::string& invariant) {
    if (!ok) throw ConfigError("invariant violated: " + invariant);
  };
  const auto& cmds = commands();
  if (std::find(cmds.begin(), cmds.end(), command) == cmds.end())
    throw ConfigError("run.command: unknown command '" + command + "'");
  need(!output.empty(), "output directory is non-empty");
  need(workers >= 1, "workers >= 1");
  need(replicas >= 1, "replicas >= 1");
  need(batches >= 2, "batches >= 2");
  need(configs >= 1, "configs >= 1");
  try {
    params.validate();
    sde.validate();
    chain.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  need(params.beta > 0, "beta > 0");
  need(player >= 0 && player < params.n, "0 <= player < n");
  need(!planar(model) || params.potential.kind == PotentialSpec::Kind::quadratic, "2D models use the quadratic potential");
  for (std::size_t k = 0; k < n_values.size(); ++k) {
    need(n_values[k] >= 2, "n_values >= 2");
    need(k == 0 || n_values[k] > n_values[k - 1], "n_values strictly increasing");
  }
  for (double q : q_values) need(q > 0 && q <= 1, "0 < q <= 1");
  need(n_max >= 3, "n_max >= 3");
  need(density_points >= 2, "density_points >= 2");
  for (std::size_t k = 0; k < times.size(); ++k) {
    need(times[k] >= 0, "times >= 0");
    need(k == 0 || times[k] > times[k - 1], "times strictly increasing");
  }
  try {
    parse_estimator(estimator);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("run.estimator: ") + e.what());
  }
}

ExperimentConfig parse_config(const std::string& toml_text, const std::vector<std::string>& overrides,
                              const std::optional<std::string>& command) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream s;
    s << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(s.str());
  }
  for (const auto& o : overrides) apply_override(root, o);

  State st;
  ExperimentConfig& c = st.c;
  Range& range = st.range;
  std::string& potential = st.potential;
  // CLI defaults that differ from the library ones
  c.params.n = 8;
  c.sde.horizon = 10;
  c.sde.burn_in = 1;
  c.sde.record_stride = 10;
  c.sde.gap_tolerance = 0.1;

  const auto& s = schema();
  std::set<std::string> given;
  for (const auto& [section, node] : root) {
    const std::string sec(section.str());
    const auto* t = node.as_table();
    if (!t) throw ConfigError("unknown key '" + sec + "' (settings live in [run], [game], [sde], [chain], [grid])");
    for (const auto& [key, value] : *t) {
      const std::string full = sec + "." + std::string(key.str());
      const auto it = s.find(full);
      if (it == s.end()) throw ConfigError("unknown key '" + full + "'");
      it->second(st, value, full);
      given.insert(full);
    }
  }
  if (command) c.command = *command;
  if (c.command.empty()) throw ConfigError("run.command: no command given");

  if (potential == "quartic")
    c.params.potential = PotentialSpec::quartic(c.quartic);
  else if (potential != "quadratic")
    throw ConfigError("game.potential: expected \"quadratic\" or \"quartic\"");
  if (c.quartic != 0 && potential != "quartic") throw ConfigError("game.quartic: only meaningful with potential = \"quartic\"");

  c.sde.seed = c.chain.seed = c.seed;

  if (!given.count("grid.c2")) {
    if (!(range.points >= 2)) throw ConfigError("invariant violated: c2_points >= 2");
    if (!(range.hi > range.lo)) throw ConfigError("invariant violated: c2_max > c2_min");
    const double m = double(range.points - 1);
    for (std::int64_t k = 0; k < range.points; ++k)
      c.c2_grid.push_back((range.lo * (m - double(k)) + range.hi * double(k)) / m);
  } else if (range.given) {
    throw ConfigError("grid.c2: give either the list or c2_min/c2_max/c2_points");
  }

  static const std::set<std::string> uses_coefficients{"verify-nash", "simulate", "sample", "stats", "coulomb-relax"};
  if (uses_coefficients.count(c.command)) {
    // a planar estimator implies the planar game of the same information model
    Model m = c.model;
    if (c.command == "stats" && !planar(m) && estimator_is_2d(parse_estimator(c.estimator)))
      m = m == Model::closed1d ? Model::closed2d : Model::open2d;
    if (!given.count("game.c2")) {
      c.params.c2 = consistent_c2(m, c.params.beta, c.params.sigma);
      c.auto_filled["game.c2"] = c.params.c2;
    }
    if (planar(m) && !given.count("game.c1")) {
      c.params.c1 = GameParams::c1_2d(c.params.beta);
      c.auto_filled["game.c1"] = c.params.c1;
    }
  }
  c.validate();
  return c;
}

ExperimentConfig parse_config_file(const std::string& path, const std::vector<std::string>& overrides,
                                   const std::optional<std::string>& command) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, overrides, command);
}

std::string config_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json j;
  j["run"] = {{"command", c.command}, {"output", c.output},   {"seed", c.seed},         {"workers", c.workers},
              {"model", model_name(c.model)}, {"player", c.player}, {"replicas", c.replicas}, {"batches", c.batches},
              {"configs", c.configs}, {"estimator", c.estimator}};
  j["game"] = {{"n", c.params.n},
               {"beta", c.params.beta},
               {"sigma", c.params.sigma},
               {"c1", c.params.c1},
               {"c2", c.params.c2},
               {"potential", c.params.potential.kind == PotentialSpec::Kind::quadratic ? "quadratic" : "quartic"},
               {"quartic", c.quartic}};
  j["sde"] = {{"dt", c.sde.dt},           {"max_halvings", c.sde.max_halvings}, {"gap_tolerance", c.sde.gap_tolerance},
              {"burn_in", c.sde.burn_in}, {"horizon", c.sde.horizon},           {"record_stride", c.sde.record_stride}};
  j["chain"] = {{"step_size", c.chain.step_size},
                {"n_burn", c.chain.n_burn},
                {"n_keep", c.chain.n_keep},
                {"thin", c.chain.thin},
                {"target_acceptance", c.chain.target_acceptance}};
  j["grid"] = {{"c2", c.c2_grid},       {"n_values", c.n_values},     {"q", c.q_values},
               {"theta", c.theta},      {"n_max", c.n_max},           {"times", c.times},
               {"density_c2", c.density_c2}, {"density_points", c.density_points}};
  j["auto_filled"] = c.auto_filled;
  return j.dump(2);
}

}  // namespace dyson::cli
