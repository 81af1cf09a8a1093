#pragma once

#include "dyson/core.hpp"
#include "dyson/rng.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace dyson {

struct SdeConfig {
  double dt = 1e-3;
  int max_halvings = 54;
  // a step is also split when some gap changes by more than this fraction
  double gap_tolerance = 0.5;
  double burn_in = 0;
  double horizon = 1;
  std::uint64_t seed = 1;
  Index record_stride = 1;
  bool keep_states = true;

  void validate() const;
};

struct StepError : NumericalError {
  StepError(const std::string& what, double offending_gap, double at_time = 0)
      : NumericalError(what), gap(offending_gap), time(at_time) {}
  double gap, time;
};

// One player's deviation from the equilibrium feedback
//   a_p = scale * ((beta + beta_shift)/2 h1_p - V'(x_p)/2) + additive
struct Feedback {
  Index player = -1;
  double additive = 0;
  double scale = 1;
  double beta_shift = 0;
  Vec2 additive_2d = Vec2::Zero();

  bool active() const { return player >= 0; }
};

// Normals for Brownian-bridge refinement of a rejected step. Node ids form a
// binary tree (root 1); base increments use node 0. Counter word a carries the
// step in its low 40 bits and the node's high bits above, so ids stay distinct
// down to depth 55.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t step) : gen_(seed), step_(step) {}

  std::pair<double, double> at(std::uint64_t node, Index particle) const {
    return gen_.pair(step_ | ((node >> 32) << 40), static_cast<std::uint32_t>(particle),
                     static_cast<std::uint32_t>(node));
  }
  Vec base_1d(Index n) const;
  Points2 base_2d(Index n) const;

 private:
  CounterNormals gen_;
  std::uint64_t step_;
};

// drift of the generalized dynamics, with an optional one-player deviation
Vec drift_1d(const Vec& x, const GameParams& p, const Feedback& fb = {});
Points2 drift_2d(const Points2& z, const GameParams& p, const Feedback& fb = {});

// Euler-Maruyama with rejection: on a constraint violation the step is split
// into two halves whose Brownian increments are bridge samples summing to the
// original one. `noise` holds standard normals for the full step. Steps that
// move some gap by more than gap_tolerance times its size are split as well,
// except at the last level; infinity turns that control off.
Config1D step_dyson_1d(const Config1D& state, const GameParams& p, double dt, const Vec& noise,
                       const NoiseStream& bridge, int max_halvings = 20, const Feedback& fb = {},
                       double gap_tolerance = std::numeric_limits<double>::infinity());
Config2D step_coulomb_2d(const Config2D& state, const GameParams& p, double dt, const Points2& noise,
                         const NoiseStream& bridge, int max_halvings = 20, const Feedback& fb = {},
                         double gap_tolerance = std::numeric_limits<double>::infinity());

constexpr double collision_floor_2d = 1e-9;

template <class State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::map<std::string, std::vector<double>> integrals;  // accumulated, aligned with times
  long halvings = 0;
};

using Trajectory1D = Trajectory<Vec>;
using Trajectory2D = Trajectory<Points2>;

template <class State>
using Integrands = std::map<std::string, std::function<double(const State&)>>;

// Records on [burn_in, horizon] every record_stride steps; integrals run
// from t = 0 with left-endpoint quadrature.
Trajectory1D simulate(const Config1D& initial, const GameParams& p, const SdeConfig& sde,
                      const Integrands<Vec>& integrands = {}, const Feedback& fb = {});
Trajectory2D simulate(const Config2D& initial, const GameParams& p, const SdeConfig& sde,
                      const Integrands<Points2>& integrands = {}, const Feedback& fb = {});

struct Estimate {
  double mean = 0;
  double std_error = 0;
};

// (I(T) - I(t0))/(T - t0) over the recorded window, batch-means error
template <class State>
Estimate ergodic_average(const Trajectory<State>& traj, const std::string& name, int batches = 20);

// pooled over independent replicas: grand mean, error from per-replica batch means
template <class State>
Estimate ergodic_average(const std::vector<Trajectory<State>>& reps, const std::string& name, int batches = 20);

}  // namespace dyson
