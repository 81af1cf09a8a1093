#pragma once

#include "dyson/core.hpp"
#include "dyson/dynamics.hpp"
#include "dyson/ensembles.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dyson {

// mean and IACT-deflated standard error of a chain trace
Estimate trace_estimate(const std::vector<double>& trace);

// (h2 * mu^{N,i})(X^i)/(N-1) over the samples
Estimate per_index_stat_1d(const Samples1D& s, Index i);
// the same statistic averaged over all indices, per sample
Estimate index_averaged_stat_1d(const Samples1D& s);

struct NashTermStats {
  // self (d_i v)^2, interaction sum_k d_k v^k d_k v^i, diffusion -(sigma^2/(2(N-1))) lap v
  std::map<std::string, Estimate> mean;
  std::map<std::string, double> limit;
  // largest |relative| closed-loop residual over the samples
  double max_residual = 0;
};

// Limits use K = pi^2 beta^2 sigma^2 m(gamma)^2 / (12 (beta - sigma^2)):
// self -> K + (d_x U)^2, interaction -> K, diffusion -> -2K, at gamma = x_q of the
// index fraction q = (i + 1/2)/N.
NashTermStats nash_term_stats_1d(const Samples1D& s, Index i, const GameParams& p);

struct Stat2D {
  Estimate h2, circ;
};

// h2 statistic and the leave-one-out circumcircle double sum at index i
Stat2D per_index_stat_2d(const Samples2D& s, Index i);

enum class Estimator { h2_1d, h2_avg_1d, h2_2d, circ_2d, epsilon_2d, constant };
const char* estimator_name(Estimator e);
Estimator parse_estimator(const std::string& s);
bool estimator_is_2d(Estimator e);

// 1D: i = ceil(qN) (1-based). 2D: among eligible k <= floor(sqrt N)^2 the one whose
// predicted unit-disk location is closest to q e^{2 pi i theta}, largest k on ties.
struct IndexRule {
  double q = 0.5;
  double theta = 0;
  std::string describe(bool planar) const;
};

Index index_1d(const IndexRule& r, Index n);  // 0-based
Index index_2d(const IndexRule& r, Index n);  // 0-based spiral position

struct ConvergenceRow {
  Index n = 0;
  Index index = 0;       // 0-based
  Vec2 location{0, 0};   // equilibrium quantile (1D) or scaled predicted location (2D)
  Estimate estimate;
  double limit = std::numeric_limits<double>::quiet_NaN();
  ChainDiagnostics diag;
  std::string error;     // non-empty when the sampler failed at this N

  double gap() const { return (estimate.mean - limit) / limit; }
};

struct ConvergenceTable {
  std::string estimator;
  std::string index_rule;
  std::optional<double> limit;  // asymptotic value at the target location, when known
  std::vector<ConvergenceRow> rows;

  void validate() const;
  std::string to_csv() const;
  std::string to_json() const;
};

// Samples each N with seed derive_seed(chain.seed, N); per-N runs go through
// parallel_for. Sampler failures are recorded in the row and the study goes on.
ConvergenceTable convergence_study(Estimator e, const std::vector<Index>& n_values, const IndexRule& rule,
                                   const GameParams& p, const ChainConfig& chain, unsigned workers = 1);

struct MomentFlow {
  std::vector<double> times;
  std::vector<double> mean, sd;          // over replicas; sd is per path
  std::vector<double> mean_field;        // beta/2 + (m2(0) - beta/2) e^{-t}
  std::vector<double> finite_n;          // the same with beta/2 replaced by beta/2 + sigma^2/(N-1)
  int replicas = 0;
};

// Second empirical moment along Dyson BM for a quadratic potential. The initial
// state is the equilibrium quantile configuration rescaled to second moment m2_0.
MomentFlow second_moment_flow(const GameParams& p, double m2_0, const std::vector<double>& times,
                              const SdeConfig& sde, int replicas, unsigned workers = 1);

}  // namespace dyson
