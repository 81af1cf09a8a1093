#pragma once

#include "dyson/core.hpp"
#include "dyson/dynamics.hpp"
#include "dyson/ensembles.hpp"

#include <optional>
#include <vector>

namespace dyson {

enum class Model { closed1d, open1d, closed2d, open2d };

const char* model_name(Model m);
Model parse_model(const std::string& s);

// F^{N,i} = (x^i)^2/8 + c2 h2/(N-1); running cost adds control^2/2
double state_cost_1d(const Config1D& x, Index i, const GameParams& p);
double running_cost_1d(const Config1D& x, Index i, double control, const GameParams& p);
// F^N = |x|^2/8 + (c2/2) sum_i h2_i/(N-1)
double global_cost_1d(const Config1D& x, const GameParams& p);

// F^{N,i} = |z^i|^2/8 + c1 circ_i + c2 h2/(N-1)
double state_cost_2d(const Config2D& z, Index i, const GameParams& p);
double running_cost_2d(const Config2D& z, Index i, const Vec2& control, const GameParams& p);
// |z|^2/8 + (c1/3) sum_i circ_i + (c2/2) sum_i h2_i/(N-1)
double global_cost_2d(const Config2D& z, const GameParams& p);

// Larger roots of c2 = beta(3beta/2 - 2 sigma^2)/4 and c2 = beta(beta - 2 sigma^2)/4;
// empty where the discriminant is negative.
struct BetaRoots {
  std::optional<double> closed, open;
};
BetaRoots beta_roots(double c2, double sigma);

double ergodic_constant(const GameParams& p, Model m);

// lambda^N at beta_open(c2) plus c2/(4(beta_open - sigma^2))
double avg_open_cost(double c2, double sigma, Index n);

// Large-N cost of the player at quantile q in the open-loop equilibrium:
// (gamma^q)^2/8 + c2 L(q) + (beta sigma^2/8) L(q), L = limit_singular_stat.
// Its average over q is avg_open_cost without the 1/N correction.
double open_loop_player_proxy(double c2, double sigma, double q);

struct LoopComparison {
  double sigma = 1;
  Index n = 100;
  std::vector<double> c2_grid;
  std::vector<double> beta_closed, beta_open, beta_open_2c2;  // NaN where undefined
  std::vector<double> lambda_closed_avg;   // beta_closed/4 + sigma^2/(4(N-1))
  std::vector<double> lambda_open_avg;     // avg_open_cost
  std::vector<double> lambda_global_opt;   // lambda^N at beta_open(2 c2)
  std::vector<std::pair<double, double>> semicircle_radii;  // (closed, open)
};

LoopComparison compare_loops(const std::vector<double>& c2_grid, double sigma, Index n);

struct MonteCarloOptions {
  int replicas = 4;
  unsigned workers = 1;
  int batches = 20;
};

// Time-averaged running cost of player i along the equilibrium dynamics.
// Closed models track f^{N,i}; open models track the per-player global
// average (|alpha|^2/2 + F^N)/N, whose ergodic value is lambda^N.
Estimate mc_player_cost(const GameParams& p, Model m, const SdeConfig& sde, Index i,
                        const MonteCarloOptions& mc = {});

// Paired estimate of J^i(deviation) - J^i(equilibrium), common random numbers.
Estimate deviation_experiment(const GameParams& p, Model m, const SdeConfig& sde, const Feedback& fb,
                              const MonteCarloOptions& mc = {});

// (c2 - 3beta^2/8) times the sample mean of h2_i/(N-1)
double epsilon_nash_2d(const GameParams& p, const Samples2D& samples, Index i);

}  // namespace dyson
