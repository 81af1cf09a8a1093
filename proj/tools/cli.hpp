#pragma once

#include "dyson/core.hpp"
#include "dyson/dynamics.hpp"
#include "dyson/ensembles.hpp"
#include "dyson/game.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dyson::cli {

inline constexpr const char* version = "0.1.0";

const std::vector<std::string>& commands();

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by verify-* commands when a check exceeds its tolerance.
struct AcceptanceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string command;
  std::string output = "out";
  std::uint64_t seed = 1;
  unsigned workers = 1;
  Model model = Model::closed1d;
  Index player = 0;  // 0-based
  int replicas = 4;
  int batches = 20;
  int configs = 1000;
  std::string estimator = "h2_1d";

  GameParams params;
  double quartic = 0;  // V = x^2/2 + quartic x^4 when the potential is "quartic"
  SdeConfig sde;
  ChainConfig chain;

  std::vector<double> c2_grid;
  std::vector<Index> n_values{50, 100, 200};
  std::vector<double> q_values{0.5};
  double theta = 0;
  Index n_max = 25;
  std::vector<double> times{0, 0.5, 1, 2, 5};
  double density_c2 = 0;
  int density_points = 201;

  // keys filled from other values rather than given, with the value used
  std::map<std::string, double> auto_filled;

  void validate() const;
};

// TOML text with tables [run], [game], [sde], [chain], [grid]; each override is
// "section.key=value" with a TOML value (bare words are taken as strings).
// Overrides win over the file; `command`, when given, wins over run.command.
ExperimentConfig parse_config(const std::string& toml_text, const std::vector<std::string>& overrides = {},
                              const std::optional<std::string>& command = {});
ExperimentConfig parse_config_file(const std::string& path, const std::vector<std::string>& overrides = {},
                                   const std::optional<std::string>& command = {});

// resolved configuration as JSON text
std::string config_json(const ExperimentConfig& c);

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> outputs;  // paths relative to the output directory
};

// Runs the command and writes its artifacts plus manifest.json and timing.json.
// Throws ConfigError, AcceptanceFailure, or module errors.
RunResult run(const ExperimentConfig& c);

// Maps an exception to the exit code and a one-line JSON error document.
int exit_code_for(const std::exception& e);
std::string error_json(const std::exception& e);

}  // namespace dyson::cli
