#include "dyson/equilibrium.hpp"

#include "dyson/quadrature.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace dyson {

namespace {

constexpr double pi = std::numbers::pi;

const Rule& gl64() {
  static const Rule r = gauss_legendre(64);
  return r;
}

}  // namespace

EquilibriumMeasure1D::EquilibriumMeasure1D(double a, double b, Fn smooth, ClosedForms closed, std::string label)
    : a_(a), b_(b), s_(std::move(smooth)), closed_(std::move(closed)), label_(std::move(label)) {
  if (!(a < b)) throw DomainError("EquilibriumMeasure1D: empty support");
}

void EquilibriumMeasure1D::set_nodes(int n) {
  if (n < 8) throw DomainError("EquilibriumMeasure1D: too few nodes");
  n_ = n;
}

double EquilibriumMeasure1D::density(double x) const {
  if (x <= a_ || x >= b_) return 0.0;
  return std::sqrt((x - a_) * (b_ - x)) * s_(x);
}

double EquilibriumMeasure1D::integrate(const Fn& g) const {
  const double c = center(), d = half_width();
  double acc = 0;
  for (int k = 1; k <= n_; ++k) {
    const double th = k * pi / (n_ + 1);
    const double sn = std::sin(th);
    const double t = c + d * std::cos(th);
    acc += sn * sn * s_(t) * g(t);
  }
  return d * d * pi / (n_ + 1) * acc;
}

double EquilibriumMeasure1D::integrate_m3() const {
  const double c = center(), d = half_width();
  double acc = 0;
  for (int k = 1; k <= n_; ++k) {
    const double th = k * pi / (n_ + 1);
    const double sn = std::sin(th);
    const double t = c + d * std::cos(th);
    const double st = s_(t);
    acc += sn * sn * (d * d * sn * sn) * st * st * st;
  }
  return d * d * pi / (n_ + 1) * acc;
}

double EquilibriumMeasure1D::mean() const {
  return integrate([](double t) { return t; });
}

double EquilibriumMeasure1D::hilbert(double x) const {
  if (closed_.hilbert && x >= a_ && x <= b_) return closed_.hilbert(x);
  return hilbert_quadrature(x);
}

double EquilibriumMeasure1D::hilbert_of(const Fn& g, double x) const {
  const double c = center(), d = half_width();
  const double scale = d * d * pi / (n_ + 1);
  if (x < a_ || x > b_) {
    double acc = 0;
    for (int k = 1; k <= n_; ++k) {
      const double th = k * pi / (n_ + 1);
      const double sn = std::sin(th);
      const double t = c + d * std::cos(th);
      acc += sn * sn * g(t) * s_(t) / (x - t);
    }
    return scale * acc;
  }
  // subtract the singularity; PV int sqrt((t-a)(b-t))/(x-t) dt = pi (x - c)
  auto gs = [&](double t) { return g(t) * s_(t); };
  const double gx = gs(x);
  double acc = 0;
  for (int k = 1; k <= n_; ++k) {
    const double th = k * pi / (n_ + 1);
    const double sn = std::sin(th);
    const double t = c + d * std::cos(th);
    double q;
    if (std::abs(x - t) < 1e-9 * d) {
      const double del = 1e-5 * d;
      q = -(gs(t + del) - gs(t - del)) / (2 * del);
    } else {
      q = (gs(t) - gx) / (x - t);
    }
    acc += sn * sn * q;
  }
  return scale * acc + gx * pi * (x - c);
}

double EquilibriumMeasure1D::cdf(double x) const {
  if (x <= a_) return 0.0;
  if (x >= b_) return 1.0;
  if (closed_.cdf) return closed_.cdf(x);
  // t = c - d cos(theta): m dt = d^2 sin^2(theta) s(t) dtheta
  const double c = center(), d = half_width();
  const double tx = std::acos(std::clamp((c - x) / d, -1.0, 1.0));
  const Rule r = mapped(gl64(), 0.0, tx);
  double acc = 0;
  for (Index k = 0; k < r.x.size(); ++k) {
    const double sn = std::sin(r.x[k]);
    acc += r.w[k] * sn * sn * s_(c - d * std::cos(r.x[k]));
  }
  return d * d * acc;
}

double EquilibriumMeasure1D::quantile(double q) const {
  if (!(q >= 0 && q <= 1)) throw DomainError("quantile: q must lie in [0,1]");
  if (q == 0) return a_;
  if (q == 1) return b_;
  double lo = a_, hi = b_;
  double x = std::clamp(mean(), a_ + 1e-3 * (b_ - a_), b_ - 1e-3 * (b_ - a_));
  for (int it = 0; it < 60; ++it) {
    const double f = cdf(x) - q;
    if (std::abs(f) < 1e-14) return x;
    (f > 0 ? hi : lo) = x;
    const double m = density(x);
    double nx = m > 0 ? x - f / m : 0.5 * (lo + hi);
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (std::abs(nx - x) < 1e-16 * (b_ - a_)) return nx;
    x = nx;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (b_ - a_); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) > q ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

EquilibriumMeasure1D semicircle(double beta) {
  if (!(beta > 0)) throw DomainError("semicircle: beta must be positive");
  const double r = std::sqrt(2 * beta);
  EquilibriumMeasure1D::ClosedForms cf;
  cf.cdf = [r](double x) {
    const double u = std::clamp(x / r, -1.0, 1.0);
    return 0.5 + (u * std::sqrt(1 - u * u) + std::asin(u)) / pi;
  };
  cf.hilbert = [beta](double x) { return x / beta; };
  const double s = 1 / (pi * beta);
  return EquilibriumMeasure1D(-r, r, [s](double) { return s; }, std::move(cf), "semicircle");
}

EquilibriumMeasure1D solve_one_cut(const PotentialSpec& V, double beta, int nodes) {
  if (!(beta > 0)) throw DomainError("solve_one_cut: beta must be positive");
  const int m = nodes;
  std::vector<double> cs(m);
  for (int k = 0; k < m; ++k) cs[k] = std::cos((k + 0.5) * pi / m);

  // (1/pi) int_0^pi F(c + d cos th) dth by Gauss-Chebyshev
  auto avg = [&](auto&& F, double c, double d) {
    double s = 0;
    for (double u : cs) s += F(c + d * u, u);
    return s / m;
  };
  auto eqs = [&](double c, double d) -> Vec2 {
    const double e1 = avg([&](double t, double) { return V.dV(t) / beta; }, c, d);
    const double e2 = avg([&](double t, double u) { return d * u * V.dV(t) / beta; }, c, d) - 1;
    return {e1, e2};
  };

  // start from the quadratic approximation around the minimiser of V
  double c = 0;
  for (int it = 0; it < 100; ++it) {
    const double step = V.dV(c) / V.d2V(c);
    c -= step;
    if (std::abs(step) < 1e-15) break;
  }
  double d = std::sqrt(2 * beta / V.d2V(c));

  Vec2 f = eqs(c, d);
  int it = 0;
  for (; it < 200 && f.norm() > 1e-14; ++it) {
    const double hc = 1e-7 * std::max(1.0, std::abs(c)), hd = 1e-7 * d;
    Eigen::Matrix2d J;
    J.col(0) = (eqs(c + hc, d) - eqs(c - hc, d)) / (2 * hc);
    J.col(1) = (eqs(c, d + hd) - eqs(c, d - hd)) / (2 * hd);
    Vec2 step = J.fullPivLu().solve(f);
    double lam = 1;
    while (d - lam * step[1] <= 0 && lam > 1e-6) lam *= 0.5;
    Vec2 nf = eqs(c - lam * step[0], d - lam * step[1]);
    while (nf.norm() > f.norm() && lam > 1e-6) {
      lam *= 0.5;
      nf = eqs(c - lam * step[0], d - lam * step[1]);
    }
    c -= lam * step[0];
    d -= lam * step[1];
    if (nf.norm() >= f.norm() && nf.norm() > 1e-12) {
      f = nf;
      break;
    }
    f = nf;
  }
  if (!(f.norm() <= 1e-12)) throw SolverError("solve_one_cut: endpoint conditions did not converge", f.norm());

  // m(x) = (1/pi^2) sqrt((x-a)(b-x)) int_0^pi (f(t) - f(x))/(t - x) dth
  auto smooth = [V, beta, c, d, cs](double x) {
    const double fx = V.dV(x) / beta;
    double s = 0;
    for (double u : cs) {
      const double t = c + d * u;
      s += std::abs(t - x) < 1e-9 * d ? V.d2V(x) / beta : (V.dV(t) / beta - fx) / (t - x);
    }
    return s / (pi * double(cs.size()));
  };
  EquilibriumMeasure1D::ClosedForms cf;
  cf.hilbert = [V, beta](double x) { return V.dV(x) / beta; };
  EquilibriumMeasure1D mu(c - d, c + d, smooth, std::move(cf), "one-cut:" + V.name);

  for (int k = 0; k <= 200; ++k) {
    const double x = c - d + 2 * d * k / 200.0;
    if (smooth(x) < -1e-12)
      throw SolverError("solve_one_cut: negative density, support is not a single interval", smooth(x));
  }
  return mu;
}

EquilibriumMeasure1D equilibrium_for(const PotentialSpec& V, double beta) {
  return V.kind == PotentialSpec::Kind::quadratic ? semicircle(beta) : solve_one_cut(V, beta);
}

double euler_lagrange_residual(const EquilibriumMeasure1D& mu, const PotentialSpec& V, double beta, int npts) {
  double worst = 0;
  for (int k = 1; k <= npts; ++k) {
    const double x = mu.a() + (mu.b() - mu.a()) * k / (npts + 1.0);
    worst = std::max(worst, std::abs(beta * mu.hilbert_quadrature(x) - V.dV(x)));
  }
  return worst;
}

double limit_singular_stat(double beta, double sigma, const EquilibriumMeasure1D& mu, double q) {
  const double s2 = sigma * sigma;
  if (!(sigma > 0) || !(beta > s2)) throw DomainError("limit_singular_stat: needs beta > sigma^2 > 0");
  const double m = mu.density(mu.quantile(q));
  return pi * pi * beta / (3 * (beta - s2)) * m * m;
}

double limit_singular_stat_avg(double beta, double sigma, const EquilibriumMeasure1D& mu) {
  const double s2 = sigma * sigma;
  if (!(sigma > 0) || !(beta > s2)) throw DomainError("limit_singular_stat_avg: needs beta > sigma^2 > 0");
  return pi * pi * beta / (3 * (beta - s2)) * mu.integrate_m3();
}

// ---------------------------------------------------------------------------

EquilibriumMeasure2D EquilibriumMeasure2D::ball(double radius) {
  if (!(radius > 0)) throw DomainError("ball: radius must be positive");
  EquilibriumMeasure2D m;
  m.kind_ = Kind::uniform_ball;
  m.radius_ = radius;
  m.rho_ = 1 / (pi * radius * radius);
  return m;
}

EquilibriumMeasure2D EquilibriumMeasure2D::grid(double x0, double y0, double h, const Eigen::MatrixXd& density) {
  if (!(h > 0) || density.size() == 0) throw DomainError("grid: empty grid");
  if ((density.array() < 0).any()) throw DomainError("grid: negative density");
  const double mass = density.sum() * h * h;
  if (!(mass > 0)) throw DomainError("grid: zero mass");
  EquilibriumMeasure2D m;
  m.kind_ = Kind::custom_grid;
  m.x0_ = x0;
  m.y0_ = y0;
  m.h_ = h;
  m.grid_ = density / mass;
  m.radius_ = 0;
  for (Index i = 0; i < density.rows(); ++i)
    for (Index j = 0; j < density.cols(); ++j)
      if (m.grid_(i, j) > 0) m.radius_ = std::max(m.radius_, m.cell_center(i, j).norm() + h);
  return m;
}

bool EquilibriumMeasure2D::in_support(const Vec2& z) const { return density(z) > 0; }

double EquilibriumMeasure2D::density(const Vec2& z) const {
  if (kind_ == Kind::uniform_ball) return z.norm() <= radius_ ? rho_ : 0.0;
  const Index ix = Index(std::floor((z[0] - x0_) / h_)), iy = Index(std::floor((z[1] - y0_) / h_));
  if (ix < 0 || iy < 0 || ix >= grid_.rows() || iy >= grid_.cols()) return 0.0;
  return grid_(ix, iy);
}

double EquilibriumMeasure2D::total_mass() const {
  if (kind_ == Kind::custom_grid) return grid_.sum() * h_ * h_;
  const Rule r = mapped(gl64(), 0.0, radius_);
  double acc = 0;
  for (Index k = 0; k < r.x.size(); ++k) acc += r.w[k] * r.x[k] * rho_;
  return 2 * pi * acc;
}

double EquilibriumMeasure2D::reach(const Vec2& z, const Vec2& u) const {
  const double p = z.dot(u);
  return -p + std::sqrt(std::max(0.0, p * p + radius_ * radius_ - z.squaredNorm()));
}

Vec2 EquilibriumMeasure2D::hilbert(const Vec2& z) const {
  if (kind_ == Kind::custom_grid) {
    Vec2 acc = Vec2::Zero();
    for (Index i = 0; i < grid_.rows(); ++i)
      for (Index j = 0; j < grid_.cols(); ++j) {
        if (grid_(i, j) == 0) continue;
        const Vec2 d = z - cell_center(i, j);
        const double r2 = d.squaredNorm();
        if (r2 > 1e-24) acc += grid_(i, j) * h_ * h_ * d / r2;
      }
    return acc;
  }
  if (z.norm() >= radius_) return z / z.squaredNorm();
  // polar coordinates around z: (z-w)/|z-w|^2 dA = u dr dphi
  const int m = 256;
  Vec2 acc = Vec2::Zero();
  for (int k = 0; k < m; ++k) {
    const double ph = 2 * pi * k / m;
    const Vec2 u(std::cos(ph), std::sin(ph));
    acc += u * reach(z, -u);
  }
  return rho_ * (2 * pi / m) * acc;
}

EquilibriumMeasure2D circular_law(double beta, double curvature) {
  if (!(beta > 0)) throw DomainError("circular_law: beta must be positive");
  if (!(curvature > 0)) throw DomainError("circular_law: curvature must be positive");
  return EquilibriumMeasure2D::ball(std::sqrt(beta / curvature));
}

namespace {

// Ball case in polar coordinates around gamma. The radial integral over u is
// done in closed form, leaving a kink at equal angles that sits on a grid node;
// Richardson in the angular step removes the leading h^2 term.
double circ_ball(const Vec2& g, const EquilibriumMeasure2D& mu, int nphi, int nr, int nd) {
  const int mult = nd / nphi;
  std::vector<double> reach(nd);
  std::vector<Vec2> dir(nd);
  for (int j = 0; j < nd; ++j) {
    const double ph = 2 * pi * j / nd;
    dir[j] = Vec2(std::cos(ph), std::sin(ph));
    reach[j] = mu.reach(g, dir[j]);
  }
  std::vector<double> sd(nd), cd(nd);
  for (int j = 0; j < nd; ++j) {
    sd[j] = std::abs(std::sin(2 * pi * j / nd));
    cd[j] = std::cos(2 * pi * j / nd);
  }
  const Rule t = mapped(gauss_legendre(nr), 0.0, 1.0);
  double total = 0;
  for (int i = 0; i < nphi; ++i) {
    const int i0 = i * mult;
    const double l1 = reach[i0];
    double ri = 0;
    for (int q = 0; q < nr; ++q) {
      const double tt = t.x[q];
      const double r1 = l1 * tt * tt;
      const double wr = t.w[q] * 2 * l1 * tt * r1;
      double inner = 0;
      for (int j = 1; j < nd; ++j) {
        const double s = sd[j], c = cd[j];
        if (s < 1e-300) continue;
        const double l2 = reach[(i0 + j) % nd];
        const double arg = (l2 * l2 - 2 * r1 * c * l2 + r1 * r1) / (r1 * r1);
        inner += s * s * std::log(arg) + 2 * s * c * (std::atan((l2 - r1 * c) / (r1 * s)) + std::atan(c / s));
      }
      ri += wr * inner * (2 * pi / nd);
    }
    total += ri * (2 * pi / nphi);
  }
  const double rho = 1 / (pi * mu.radius() * mu.radius());
  return rho * rho * total;
}

double circ_grid(const Vec2& g, const EquilibriumMeasure2D& mu, int sub) {
  std::vector<Vec2> pts;
  std::vector<double> mass;
  const auto& cells = mu.cells();
  const double h = mu.h(), hs = h / sub;
  for (Index i = 0; i < cells.rows(); ++i)
    for (Index j = 0; j < cells.cols(); ++j) {
      if (cells(i, j) == 0) continue;
      const Vec2 lo = mu.cell_center(i, j) - Vec2(0.5 * h, 0.5 * h);
      for (int a = 0; a < sub; ++a)
        for (int b = 0; b < sub; ++b) {
          pts.push_back(lo + Vec2((a + 0.5) * hs, (b + 0.5) * hs));
          mass.push_back(cells(i, j) * hs * hs);
        }
    }
  double acc = 0;
  for (size_t p = 0; p < pts.size(); ++p) {
    const Vec2 a = g - pts[p];
    if (a.squaredNorm() == 0) continue;
    for (size_t q = p + 1; q < pts.size(); ++q) {
      const Vec2 b = g - pts[q];
      if (b.squaredNorm() == 0) continue;
      acc += mass[p] * mass[q] * inv_sq_circumdiameter<double>(a, b);
    }
  }
  return 2 * acc;
}

}  // namespace

double circumcircle_limit(const Vec2& gamma, const EquilibriumMeasure2D& mu, double rtol) {
  if (mu.kind() == EquilibriumMeasure2D::Kind::uniform_ball) {
    if (gamma.norm() > mu.radius() * (1 + 1e-12)) throw DomainError("circumcircle_limit: gamma outside support");
    double prev = std::nan(""), gap = std::nan("");
    for (int lvl = 0; lvl < 6; ++lvl) {
      const int nphi = 16 << lvl, nr = 12 << lvl, nd = 4 * nphi;
      const double coarse = circ_ball(gamma, mu, nphi, nr, nd);
      const double fine = circ_ball(gamma, mu, nphi, nr, 2 * nd);
      const double est = (4 * fine - coarse) / 3;
      if (lvl > 0) {
        gap = std::abs(est - prev);
        if (gap <= rtol * std::abs(est)) return est;
      }
      prev = est;
    }
    throw QuadratureError("circumcircle_limit: refinement did not converge", prev, gap);
  }
  double prev = circ_grid(gamma, mu, 1), gap = 0;
  for (int sub = 2; sub <= 8; sub *= 2) {
    const double est = circ_grid(gamma, mu, sub);
    gap = std::abs(est - prev);
    if (gap <= rtol * std::abs(est) + 1e-12) return est;
    prev = est;
  }
  throw QuadratureError("circumcircle_limit: refinement did not converge", prev, gap);
}

}  // namespace dyson
