#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace dyson {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;
using Points2 = Eigen::Matrix2Xd;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Anything that fails for numerical reasons (step, solver, sampler, quadrature).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// configurations

template <typename Scalar>
class BasicConfig1D {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit BasicConfig1D(Vector points) : x_(std::move(points)) {
    if (x_.size() < 2) throw DomainError("Config1D needs at least 2 points");
    if (!admissible(x_)) throw DomainError("Config1D points must be strictly increasing");
  }

  template <typename Derived>
  static bool admissible(const Eigen::MatrixBase<Derived>& x) {
    for (Index k = 0; k + 1 < x.size(); ++k)
      if (!(x[k] < x[k + 1])) return false;
    return true;
  }

  const Vector& points() const { return x_; }
  Index size() const { return x_.size(); }
  Scalar operator[](Index k) const { return x_[k]; }

 private:
  Vector x_;
};

using Config1D = BasicConfig1D<double>;

template <typename Scalar>
bool spiral_less(const Eigen::Matrix<Scalar, 2, 1>& w, const Eigen::Matrix<Scalar, 2, 1>& z, Index n,
                 Scalar scale = Scalar(1));

template <typename Scalar>
class BasicConfig2D {
 public:
  using Points = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;
  using Point = Eigen::Matrix<Scalar, 2, 1>;

  explicit BasicConfig2D(Points points, bool ordered = false, Scalar spiral_scale = Scalar(1))
      : z_(std::move(points)), ordered_(ordered), scale_(spiral_scale) {
    if (z_.cols() < 2) throw DomainError("Config2D needs at least 2 points");
    for (Index k = 0; k < z_.cols(); ++k)
      for (Index l = k + 1; l < z_.cols(); ++l)
        if (z_.col(k) == z_.col(l)) throw DomainError("Config2D points must be pairwise distinct");
    if (ordered_) {
      const Index n = z_.cols();
      for (Index k = 0; k + 1 < n; ++k)
        if (!spiral_less<Scalar>(z_.col(k), z_.col(k + 1), n, scale_))
          throw DomainError("Config2D flagged ordered but violates the spiral order");
    }
  }

  const Points& points() const { return z_; }
  Index size() const { return z_.cols(); }
  Point operator[](Index k) const { return z_.col(k); }
  bool ordered() const { return ordered_; }
  Scalar spiral_scale() const { return scale_; }

 private:
  Points z_;
  bool ordered_;
  Scalar scale_;
};

using Config2D = BasicConfig2D<double>;

// ---------------------------------------------------------------------------
// potential and game coefficients

struct PotentialSpec {
  enum class Kind { quadratic, custom };

  Kind kind = Kind::quadratic;
  std::string name = "quadratic";
  std::function<double(double)> value, grad, hess;
  double convexity = 1.0;  // c_V

  static PotentialSpec quadratic() { return {}; }

  // V(x) = x^2/2 + a x^4, a >= 0
  static PotentialSpec quartic(double a);

  double V(double x) const { return kind == Kind::quadratic ? 0.5 * x * x : value(x); }
  double dV(double x) const { return kind == Kind::quadratic ? x : grad(x); }
  double d2V(double x) const { return kind == Kind::quadratic ? 1.0 : hess(x); }

  // V'' >= c_V on a grid of [a,b]
  bool convex_on(double a, double b, int n = 201) const;
};

struct GameParams {
  Index n = 2;
  double beta = 2.0;
  double sigma = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
  PotentialSpec potential{};

  void validate() const;

  static double c2_closed_1d(double beta, double sigma) { return beta * (1.5 * beta - 2 * sigma * sigma) / 4; }
  static double c2_open_1d(double beta, double sigma) { return beta * (beta - 2 * sigma * sigma) / 4; }
  static double c1_2d(double beta) { return beta * beta / 8; }
  static double c2_closed_2d(double beta) { return 3 * beta * beta / 8; }
  static double c2_open_2d(double beta) { return beta * beta / 4; }

  bool closed_loop_1d() const;
  bool open_loop_1d() const;
  bool closed_loop_2d() const;
  bool open_loop_2d() const;
};

// ---------------------------------------------------------------------------
// leave-one-out transforms, weight 1/(N-1)

template <typename Scalar>
struct PairSums1D {
  Scalar h0, h1, h2;
};

template <typename Scalar>
struct PairSums2D {
  Scalar h0;
  Eigen::Matrix<Scalar, 2, 1> h1;
  Scalar h2;
};

template <typename Derived>
PairSums1D<typename Derived::Scalar> pair_sums_1d(const Eigen::MatrixBase<Derived>& x, Index i) {
  using S = typename Derived::Scalar;
  const Index n = x.size();
  if (i < 0 || i >= n) throw DomainError("pair_sums_1d: index out of range");
  S h0(0), h1(0), h2(0);
  for (Index k = 0; k < n; ++k) {
    if (k == i) continue;
    const S d = x[i] - x[k];
    h0 += std::log(std::abs(d));
    h1 += S(1) / d;
    h2 += S(1) / (d * d);
  }
  const S w = S(1) / S(n - 1);
  return {h0 * w, h1 * w, h2 * w};
}

inline PairSums1D<double> pair_sums_1d(const Config1D& c, Index i) { return pair_sums_1d(c.points(), i); }

template <typename Derived>
PairSums2D<typename Derived::Scalar> pair_sums_2d(const Eigen::MatrixBase<Derived>& z, Index i) {
  using S = typename Derived::Scalar;
  const Index n = z.cols();
  if (i < 0 || i >= n) throw DomainError("pair_sums_2d: index out of range");
  S h0(0), h2(0);
  Eigen::Matrix<S, 2, 1> h1 = Eigen::Matrix<S, 2, 1>::Zero();
  for (Index k = 0; k < n; ++k) {
    if (k == i) continue;
    const Eigen::Matrix<S, 2, 1> d = z.col(i) - z.col(k);
    const S r2 = d.squaredNorm();
    h0 += S(0.5) * std::log(r2);
    h1 += d / r2;
    h2 += S(1) / r2;
  }
  const S w = S(1) / S(n - 1);
  return {h0 * w, h1 * w, h2 * w};
}

inline PairSums2D<double> pair_sums_2d(const Config2D& c, Index i) { return pair_sums_2d(c.points(), i); }

// h1 and h2 for every index at once, exploiting pair antisymmetry.
template <typename Derived>
void pair_sums_all_1d(const Eigen::MatrixBase<Derived>& x, Vec& h1, Vec& h2) {
  const Index n = x.size();
  h1.setZero(n);
  h2.setZero(n);
  for (Index i = 0; i < n; ++i) {
    const double xi = x[i];
    double a1 = 0, a2 = 0;
    for (Index k = i + 1; k < n; ++k) {
      const double r = 1.0 / (xi - x[k]);
      a1 += r;
      a2 += r * r;
      h1[k] -= r;
      h2[k] += r * r;
    }
    h1[i] += a1;
    h2[i] += a2;
  }
  const double w = 1.0 / double(n - 1);
  h1 *= w;
  h2 *= w;
}

template <typename Derived>
void pair_sums_all_2d(const Eigen::MatrixBase<Derived>& z, Points2& h1, Vec& h2) {
  const Index n = z.cols();
  h1.setZero(2, n);
  h2.setZero(n);
  for (Index i = 0; i < n; ++i) {
    const double xi = z(0, i), yi = z(1, i);
    double ax = 0, ay = 0, a2 = 0;
    for (Index k = i + 1; k < n; ++k) {
      const double dx = xi - z(0, k), dy = yi - z(1, k);
      const double q = 1.0 / (dx * dx + dy * dy);
      ax += dx * q;
      ay += dy * q;
      a2 += q;
      h1(0, k) -= dx * q;
      h1(1, k) -= dy * q;
      h2[k] += q;
    }
    h1(0, i) += ax;
    h1(1, i) += ay;
    h2[i] += a2;
  }
  const double w = 1.0 / double(n - 1);
  h1 *= w;
  h2 *= w;
}

// ---------------------------------------------------------------------------
// circumcircle geometry

template <typename Scalar>
Scalar cross2(const Eigen::Matrix<Scalar, 2, 1>& a, const Eigen::Matrix<Scalar, 2, 1>& b) {
  return a[0] * b[1] - a[1] * b[0];
}

// 2/D^2 for the triangle (0, xi, eta); D is its circumdiameter.
template <typename Scalar>
Scalar inv_sq_circumdiameter(const Eigen::Matrix<Scalar, 2, 1>& xi, const Eigen::Matrix<Scalar, 2, 1>& eta) {
  const Eigen::Matrix<Scalar, 2, 1> d = xi - eta;
  const Scalar a = xi.squaredNorm(), b = eta.squaredNorm(), c = d.squaredNorm();
  if (a == Scalar(0) || b == Scalar(0) || c == Scalar(0))
    throw DomainError("inv_sq_circumdiameter: degenerate triangle");
  const Scalar x = cross2(xi, eta);
  return Scalar(2) * x * x / (a * b * c);
}

// (1/(N-1)^2) sum_{j != i} sum_{k != i,j} 2/D^2(z^i - z^j, z^i - z^k)
template <typename Derived>
typename Derived::Scalar circumcircle_sum_2d(const Eigen::MatrixBase<Derived>& z, Index i) {
  using S = typename Derived::Scalar;
  const Index n = z.cols();
  if (i < 0 || i >= n) throw DomainError("circumcircle_sum_2d: index out of range");
  S acc(0);
  for (Index j = 0; j < n; ++j) {
    if (j == i) continue;
    const Eigen::Matrix<S, 2, 1> a = z.col(i) - z.col(j);
    for (Index k = j + 1; k < n; ++k) {
      if (k == i) continue;
      acc += inv_sq_circumdiameter<S>(a, z.col(i) - z.col(k));
    }
  }
  return S(2) * acc / (S(n - 1) * S(n - 1));
}

// ---------------------------------------------------------------------------
// spiral order: shells floor(sqrt(n)|z|/scale), then arg in (0, 2pi], then |w| >= |z|

template <typename Scalar>
Scalar arg_0_2pi(const Eigen::Matrix<Scalar, 2, 1>& z) {
  Scalar a = std::atan2(z[1], z[0]);
  if (a <= Scalar(0)) a += Scalar(2) * std::numbers::pi_v<Scalar>;
  return a;
}

template <typename Scalar>
bool spiral_less(const Eigen::Matrix<Scalar, 2, 1>& w, const Eigen::Matrix<Scalar, 2, 1>& z, Index n,
                 Scalar scale) {
  if (n < 1) throw DomainError("spiral_less: n must be >= 1");
  if (w == z) return false;
  const bool w0 = w.isZero(0), z0 = z.isZero(0);
  if (w0 || z0) return w0;
  const Scalar rn = std::sqrt(Scalar(n)) / scale;
  const Scalar rw = w.norm(), rz = z.norm();
  const auto sw = std::floor(rn * rw), sz = std::floor(rn * rz);
  if (sw != sz) return sw < sz;
  const Scalar aw = arg_0_2pi(w), az = arg_0_2pi(z);
  if (aw != az) return aw < az;
  return rw >= rz;
}

// Stable spiral sort of columns.
Points2 spiral_sorted(const Points2& z, double scale = 1.0);

// ---------------------------------------------------------------------------

// Exact d_p between equal-weight empirical measures given as sorted samples.
template <typename D1, typename D2>
double wasserstein_1d(double p, const Eigen::MatrixBase<D1>& xs, const Eigen::MatrixBase<D2>& ys) {
  if (p < 1) throw DomainError("wasserstein_1d: order must be >= 1");
  if (xs.size() != ys.size() || xs.size() == 0) throw DomainError("wasserstein_1d: length mismatch");
  double acc = 0;
  for (Index k = 0; k < xs.size(); ++k) acc += std::pow(std::abs(double(xs[k] - ys[k])), p);
  return std::pow(acc / double(xs.size()), 1.0 / p);
}

}  // namespace dyson
