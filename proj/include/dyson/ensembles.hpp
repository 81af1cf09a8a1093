#pragma once

#include "dyson/core.hpp"

#include <cstdint>
#include <vector>

namespace dyson {

struct ChainConfig {
  double step_size = 1e-3;  // initial Langevin time step, adapted during burn-in
  Index n_burn = 2000;
  Index n_keep = 1000;
  Index thin = 1;
  std::uint64_t seed = 1;
  double target_acceptance = 0.57;

  void validate() const;
};

struct ChainDiagnostics {
  double acceptance_rate = 0;
  double iact_estimate = 1;  // of the log-density trace
  double ess = 0;
  double step_size = 0;      // frozen value after burn-in
};

struct SamplerError : NumericalError {
  using NumericalError::NumericalError;
};

// (beta/sigma^2) sum_{k<l} log|x^l - x^k| - ((N-1)/sigma^2) sum V(x^i)
double log_density_1d(const Config1D& x, const GameParams& p);
double log_density_2d(const Config2D& z, const GameParams& p);

struct Samples1D {
  std::vector<Vec> samples;
  ChainDiagnostics diag;
};

struct Samples2D {
  std::vector<Points2> samples;  // spiral-sorted
  double spiral_scale = 1;
  ChainDiagnostics diag;
};

// Metropolis-adjusted Langevin, preconditioned so that a proposal is one
// Euler-Maruyama step of the generalized dynamics with time step `step_size`.
Samples1D mala_chain_1d(const GameParams& p, const ChainConfig& c);
Samples1D mala_chain_1d(const GameParams& p, const ChainConfig& c, const Vec& start);
Samples2D mala_chain_2d(const GameParams& p, const ChainConfig& c);
Samples2D mala_chain_2d(const GameParams& p, const ChainConfig& c, const Points2& start);

// Meckes-Meckes predicted location of the k-th point (1-based), unit disk.
Vec2 ginibre_predicted_location(Index k, Index n);

// 1D chains start at equilibrium quantiles (i - 1/2)/N; 2D chains at the
// predicted locations scaled to the equilibrium radius, Fibonacci layout past coverage.
Vec initial_state_1d(const GameParams& p);
Points2 initial_state_2d(const GameParams& p);

// Geyer initial positive sequence
double iact(const std::vector<double>& trace);

}  // namespace dyson
