#pragma once

#include "dyson/core.hpp"
#include "dyson/equilibrium.hpp"
#include "dyson/rng.hpp"

#include <map>
#include <optional>
#include <string>

namespace dyson {

// v^{N,i} and its derivatives at the closed-form solution
struct ValueGrad1D {
  double value = 0;
  double self_grad = 0;
  Vec cross_grads;  // entry k is d/dx^k v^{N,i}; entry i is 0
  double laplacian = 0;
};

struct ValueGrad2D {
  double value = 0;
  Vec2 self_grad = Vec2::Zero();
  Points2 cross_grads;  // column i is 0
  double laplacian = 0;
};

ValueGrad1D value_grads_1d(const Config1D& x, Index i, double beta);
ValueGrad2D value_grads_2d(const Config2D& z, Index i, double beta);

// W = |x|^2/4 - beta/(2(N-1)) sum_{k<l} log|x^l - x^k|, the open-loop potential
double potential_w_1d(const Config1D& x, double beta);
double potential_w_2d(const Config2D& z, double beta);

struct ResidualReport {
  double residual = 0;
  double scale = 0;     // max |term|
  double relative = 0;  // residual/scale, 0 if scale is 0
  std::map<std::string, double> terms;

  // sums the terms and sets scale and relative
  void assemble();
};

// Closed-loop i-th equation; c2 is taken from p as given.
ResidualReport residual_nash_1d(const Config1D& x, Index i, const GameParams& p);
// Open-loop ergodic HJB for W.
ResidualReport residual_hjb_1d(const Config1D& x, const GameParams& p);
ResidualReport residual_nash_2d(const Config2D& z, Index i, const GameParams& p);
ResidualReport residual_hjb_2d(const Config2D& z, const GameParams& p);

// Master equation at (x, mu) with U = x^2/4 - beta/2 log*mu and lambda = beta/4.
// Holds for any mu with a smooth Hilbert transform, not only the equilibrium.
ResidualReport residual_master_1d(double x, const EquilibriumMeasure1D& mu, double beta);
// Integrated Hamilton-Jacobi form for the open-loop potential, lambda = beta/8.
ResidualReport residual_mean_field_hj_1d(const EquilibriumMeasure1D& mu, double beta);
// Coulomb master equation with the circumcircle coupling, lambda = beta/4.
ResidualReport residual_master_2d(const Vec2& z, const EquilibriumMeasure2D& mu, double beta, double rtol = 1e-4);

// z/2 - (beta/2) Hmu(z)
Vec2 master_gradient_2d(const Vec2& z, const EquilibriumMeasure2D& mu, double beta);

// pi^2 m^2 = (Hm)^2 - 2 H[m Hm] at x, all transforms by quadrature; returns |lhs - rhs|
double product_rule_gap(const EquilibriumMeasure1D& mu, double x);
// |int (Hmu)^2 dmu - (pi^2/3) int m^3|
double free_information_gap(const EquilibriumMeasure1D& mu);

struct IdentityReport {
  std::map<std::string, double> max_relative_error;
  double worst() const;
};

// 1D: sum x h1 = N/2, sum h2/(N-1) = sum h1^2, and the double-sum cancellation.
IdentityReport identity_suite(const Config1D& x);
// 2D: the circumcircle identity over every triple containing each point.
IdentityReport identity_suite(const Config2D& z);

// Random admissible configurations: exponential gaps at a random scale (1D),
// Gaussian clouds at a random scale (2D).
Vec random_points_1d(PhiloxStream& rng, Index n);
Points2 random_points_2d(PhiloxStream& rng, Index n);

struct SweepSpec {
  std::uint64_t seed = 1;
  int count = 1000;
  Index n_min = 3, n_max = 25;
  // beta and sigma drawn per configuration unless fixed; with `fixed`, its c2
  // drives the closed 1D suite and the other suites use their own coefficients
  std::optional<GameParams> fixed;
};

// identities: sum_x_h1, sum_h2_vs_h1_sq, double_sum_cancellation, circumcircle
IdentityReport identity_sweep(const SweepSpec& spec);
// residuals: nash_1d, hjb_1d, nash_2d, hjb_2d (|relative| maxima)
IdentityReport residual_sweep(const SweepSpec& spec);

// On the semicircle(beta): master_1d (max |relative| over `points` interior
// points), mean_field_hj_1d, product_rule and free_information (absolute gaps).
IdentityReport master_suite_1d(double beta, int points = 50);
// On circular_law(beta): master_2d, max |relative| over `points` interior points.
IdentityReport master_suite_2d(double beta, int points = 20);

}  // namespace dyson
