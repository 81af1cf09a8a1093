#pragma once

#include "dyson/core.hpp"

#include <functional>
#include <optional>
#include <string>

namespace dyson {

struct SolverError : NumericalError {
  SolverError(const std::string& what, double last_residual)
      : NumericalError(what), residual(last_residual) {}
  double residual;
};

struct QuadratureError : NumericalError {
  QuadratureError(const std::string& what, double est, double last_gap)
      : NumericalError(what), estimate(est), gap(last_gap) {}
  double estimate, gap;
};

using Fn = std::function<double(double)>;

// One-interval measure with square-root edges: m(t) = sqrt((t-a)(b-t)) s(t).
// Integrals against m use Gauss-Chebyshev of the second kind, which absorbs
// the edge behaviour exactly.
class EquilibriumMeasure1D {
 public:
  struct ClosedForms {
    Fn cdf;      // optional
    Fn hilbert;  // optional, valid on [a,b]
  };

  EquilibriumMeasure1D(double a, double b, Fn smooth, ClosedForms closed = {}, std::string label = "");

  double a() const { return a_; }
  double b() const { return b_; }
  double center() const { return 0.5 * (a_ + b_); }
  double half_width() const { return 0.5 * (b_ - a_); }
  const std::string& label() const { return label_; }

  double smooth_factor(double x) const { return s_(x); }
  double density(double x) const;
  double cdf(double x) const;
  double quantile(double q) const;

  // Hmu(x) = PV int m(t)/(x-t) dt
  double hilbert(double x) const;
  // always by quadrature, ignoring closed forms
  double hilbert_quadrature(double x) const { return hilbert_of([](double) { return 1.0; }, x); }
  // PV int g(t) m(t)/(x-t) dt; g must be smooth on [a,b]
  double hilbert_of(const Fn& g, double x) const;

  double integrate(const Fn& g) const;  // int g dmu
  double integrate_m3() const;          // int m^3
  double mean() const;

  void set_nodes(int n);
  int nodes() const { return n_; }

 private:
  double a_, b_;
  Fn s_;
  ClosedForms closed_;
  std::string label_;
  int n_ = 400;
};

// m(x) = sqrt(2 beta - x^2)/(pi beta)
EquilibriumMeasure1D semicircle(double beta);

// Tricomi inversion of beta Hmu = V' on a single interval.
EquilibriumMeasure1D solve_one_cut(const PotentialSpec& V, double beta, int nodes = 128);

// semicircle for the quadratic potential, Tricomi inversion otherwise
EquilibriumMeasure1D equilibrium_for(const PotentialSpec& V, double beta);

// sup over an interior grid of |beta Hmu - V'|, Hmu by quadrature
double euler_lagrange_residual(const EquilibriumMeasure1D& mu, const PotentialSpec& V, double beta, int npts = 101);

// pi^2 beta / (3 (beta - sigma^2)) m(gamma^q)^2
double limit_singular_stat(double beta, double sigma, const EquilibriumMeasure1D& mu, double q);
// the same constant times int m^3 (index-averaged version)
double limit_singular_stat_avg(double beta, double sigma, const EquilibriumMeasure1D& mu);

// ---------------------------------------------------------------------------

class EquilibriumMeasure2D {
 public:
  enum class Kind { uniform_ball, custom_grid };

  static EquilibriumMeasure2D ball(double radius);
  // cell-centred grid; densities are renormalised to unit mass
  static EquilibriumMeasure2D grid(double x0, double y0, double h, const Eigen::MatrixXd& density);

  Kind kind() const { return kind_; }
  double radius() const { return radius_; }
  double density(const Vec2& z) const;
  double total_mass() const;
  bool in_support(const Vec2& z) const;

  // int (z-w)/|z-w|^2 dmu(w)
  Vec2 hilbert(const Vec2& z) const;

  // ball: distance from z to the boundary along direction u
  double reach(const Vec2& z, const Vec2& u) const;

  // grid access
  double h() const { return h_; }
  Vec2 cell_center(Index ix, Index iy) const { return {x0_ + (ix + 0.5) * h_, y0_ + (iy + 0.5) * h_}; }
  const Eigen::MatrixXd& cells() const { return grid_; }

 private:
  Kind kind_ = Kind::uniform_ball;
  double radius_ = 1, rho_ = 1 / std::numbers::pi;
  double x0_ = 0, y0_ = 0, h_ = 0;
  Eigen::MatrixXd grid_;
};

// Equilibrium of V(z) = curvature |z|^2/2: density curvature/(pi beta) on B(sqrt(beta/curvature)).
EquilibriumMeasure2D circular_law(double beta, double curvature = 1.0);

// iint_{w != u} 2/D^2(gamma - w, gamma - u) dmu(w) dmu(u)
double circumcircle_limit(const Vec2& gamma, const EquilibriumMeasure2D& mu, double rtol = 1e-4);

}  // namespace dyson
