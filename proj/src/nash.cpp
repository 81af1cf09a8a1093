#include "dyson/nash.hpp"

#include "dyson/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace dyson {

namespace {

constexpr double pi = std::numbers::pi;

double sum_log_gaps_1d(const Vec& x) {
  double s = 0;
  for (Index k = 0; k < x.size(); ++k)
    for (Index l = k + 1; l < x.size(); ++l) s += std::log(x[l] - x[k]);
  return s;
}

void require_quadratic(const GameParams& p) {
  p.validate();
  if (p.potential.kind != PotentialSpec::Kind::quadratic)
    throw DomainError("closed-form solutions exist for the quadratic potential only");
}

}  // namespace

void ResidualReport::assemble() {
  residual = 0;
  scale = 0;
  for (const auto& [name, v] : terms) {
    residual += v;
    scale = std::max(scale, std::abs(v));
  }
  relative = scale > 0 ? residual / scale : 0.0;
}

ValueGrad1D value_grads_1d(const Config1D& c, Index i, double beta) {
  const Vec& x = c.points();
  const Index n = x.size();
  const auto s = pair_sums_1d(x, i);
  ValueGrad1D g;
  g.value = x[i] * x[i] / 4 - beta / 2 * s.h0;
  g.self_grad = x[i] / 2 - beta / 2 * s.h1;
  g.cross_grads = Vec::Zero(n);
  const double w = beta / (2.0 * double(n - 1));
  for (Index k = 0; k < n; ++k)
    if (k != i) g.cross_grads[k] = w / (x[i] - x[k]);
  // d_ii v = 1/2 + (beta/2) h2 and sum_k d_kk v = (beta/2) h2
  g.laplacian = 0.5 + beta * s.h2;
  return g;
}

ValueGrad2D value_grads_2d(const Config2D& c, Index i, double beta) {
  const Points2& z = c.points();
  const Index n = z.cols();
  const auto s = pair_sums_2d(z, i);
  ValueGrad2D g;
  g.value = z.col(i).squaredNorm() / 4 - beta / 2 * s.h0;
  g.self_grad = z.col(i) / 2 - beta / 2 * s.h1;
  g.cross_grads = Points2::Zero(2, n);
  const double w = beta / (2.0 * double(n - 1));
  for (Index k = 0; k < n; ++k) {
    if (k == i) continue;
    const Vec2 d = z.col(i) - z.col(k);
    g.cross_grads.col(k) = w * d / d.squaredNorm();
  }
  g.laplacian = 1.0;  // log is harmonic off the diagonal
  return g;
}

double potential_w_1d(const Config1D& c, double beta) {
  const Vec& x = c.points();
  return x.squaredNorm() / 4 - beta / (2.0 * double(x.size() - 1)) * sum_log_gaps_1d(x);
}

double potential_w_2d(const Config2D& c, double beta) {
  const Points2& z = c.points();
  const Index n = z.cols();
  double s = 0;
  for (Index k = 0; k < n; ++k)
    for (Index l = k + 1; l < n; ++l) s += 0.5 * std::log((z.col(k) - z.col(l)).squaredNorm());
  return z.squaredNorm() / 4 - beta / (2.0 * double(n - 1)) * s;
}

ResidualReport residual_nash_1d(const Config1D& c, Index i, const GameParams& p) {
  require_quadratic(p);
  const Vec& x = c.points();
  const Index n = x.size();
  const double nm1 = double(n - 1), s2 = p.sigma * p.sigma;
  const auto g = value_grads_1d(c, i, p.beta);
  Vec h1, h2;
  pair_sums_all_1d(x, h1, h2);
  double inter = 0;
  for (Index k = 0; k < n; ++k)
    if (k != i) inter += (x[k] / 2 - p.beta / 2 * h1[k]) * g.cross_grads[k];
  ResidualReport r;
  r.terms["diffusion"] = -s2 / (2 * nm1) * g.laplacian;
  r.terms["interaction"] = inter;
  r.terms["self"] = 0.5 * g.self_grad * g.self_grad;
  r.terms["cost"] = -(x[i] * x[i] / 8 + p.c2 * h2[i] / nm1);
  r.terms["lambda"] = p.beta / 4 + s2 / (4 * nm1);
  r.assemble();
  return r;
}

ResidualReport residual_hjb_1d(const Config1D& c, const GameParams& p) {
  require_quadratic(p);
  const Vec& x = c.points();
  const double n = double(x.size()), nm1 = n - 1, s2 = p.sigma * p.sigma;
  Vec h1, h2;
  pair_sums_all_1d(x, h1, h2);
  const Vec grad = x / 2 - p.beta / 2 * h1;
  const double lap = n / 2 + p.beta / 2 * h2.sum();
  const double global_cost = x.squaredNorm() / 8 + p.c2 / 2 * h2.sum() / nm1;
  ResidualReport r;
  r.terms["diffusion"] = -s2 / (2 * n * nm1) * lap;
  r.terms["self"] = grad.squaredNorm() / (2 * n);
  r.terms["cost"] = -global_cost / n;
  r.terms["lambda"] = p.beta / 8 + s2 / (4 * nm1);
  r.assemble();
  return r;
}

ResidualReport residual_nash_2d(const Config2D& c, Index i, const GameParams& p) {
  require_quadratic(p);
  const Points2& z = c.points();
  const Index n = z.cols();
  const double nm1 = double(n - 1), s2 = p.sigma * p.sigma;
  const auto g = value_grads_2d(c, i, p.beta);
  Points2 h1;
  Vec h2;
  pair_sums_all_2d(z, h1, h2);
  double inter = 0;
  for (Index k = 0; k < n; ++k)
    if (k != i) inter += (z.col(k) / 2 - p.beta / 2 * h1.col(k)).dot(g.cross_grads.col(k));
  ResidualReport r;
  r.terms["diffusion"] = -s2 / (2 * nm1) * g.laplacian;
  r.terms["interaction"] = inter;
  r.terms["self"] = 0.5 * g.self_grad.squaredNorm();
  r.terms["cost"] = -(z.col(i).squaredNorm() / 8 + p.c1 * circumcircle_sum_2d(z, i) + p.c2 * h2[i] / nm1);
  r.terms["lambda"] = p.beta / 4 + s2 / (2 * nm1);
  r.assemble();
  return r;
}

ResidualReport residual_hjb_2d(const Config2D& c, const GameParams& p) {
  require_quadratic(p);
  const Points2& z = c.points();
  const Index n = z.cols();
  const double dn = double(n), nm1 = dn - 1, s2 = p.sigma * p.sigma;
  Points2 h1;
  Vec h2;
  pair_sums_all_2d(z, h1, h2);
  const Points2 grad = z / 2 - p.beta / 2 * h1;
  double circ = 0;
  for (Index i = 0; i < n; ++i) circ += circumcircle_sum_2d(z, i);
  const double global_cost = z.squaredNorm() / 8 + p.c1 / 3 * circ + p.c2 / 2 * h2.sum() / nm1;
  ResidualReport r;
  r.terms["diffusion"] = -s2 / (2 * dn * nm1) * dn;  // Laplacian of W is N
  r.terms["self"] = grad.squaredNorm() / (2 * dn);
  r.terms["cost"] = -global_cost / dn;
  r.terms["lambda"] = p.beta / 8 + s2 / (2 * nm1);
  r.assemble();
  return r;
}

ResidualReport residual_master_1d(double x, const EquilibriumMeasure1D& mu, double beta) {
  if (!(x > mu.a() && x < mu.b())) throw DomainError("residual_master_1d: x must be interior to the support");
  auto dxU = [&](double t) { return t / 2 - beta / 2 * mu.hilbert(t); };
  const double m = mu.density(x);
  ResidualReport r;
  r.terms["interaction"] = beta / 2 * mu.hilbert_of(dxU, x);
  const double g = dxU(x);
  r.terms["self"] = 0.5 * g * g;
  r.terms["cost"] = -(x * x / 8 + pi * pi * beta * beta / 8 * m * m);
  r.terms["lambda"] = beta / 4;
  r.assemble();
  return r;
}

ResidualReport residual_mean_field_hj_1d(const EquilibriumMeasure1D& mu, double beta) {
  auto dU = [&](double t) {
    const double g = t / 2 - beta / 2 * mu.hilbert(t);
    return g * g;
  };
  ResidualReport r;
  r.terms["self"] = 0.5 * mu.integrate(dU);
  r.terms["cost"] = -(mu.integrate([](double t) { return t * t / 8; }) + pi * pi * beta * beta / 24 * mu.integrate_m3());
  r.terms["lambda"] = beta / 8;
  r.assemble();
  return r;
}

Vec2 master_gradient_2d(const Vec2& z, const EquilibriumMeasure2D& mu, double beta) {
  return z / 2 - beta / 2 * mu.hilbert(z);
}

ResidualReport residual_master_2d(const Vec2& z, const EquilibriumMeasure2D& mu, double beta, double rtol) {
  if (!mu.in_support(z)) throw DomainError("residual_master_2d: z must lie in the support");
  auto g = [&](const Vec2& w) { return master_gradient_2d(w, mu, beta); };
  double inter = 0;
  if (mu.kind() == EquilibriumMeasure2D::Kind::uniform_ball) {
    // polar around z: (z-w)/|z-w|^2 dA = -u drho dphi
    const Rule gl = gauss_legendre(24);
    const int m = 96;
    const double rho = mu.density(z);
    for (int k = 0; k < m; ++k) {
      const double ph = 2 * pi * (k + 0.5) / m;
      const Vec2 u(std::cos(ph), std::sin(ph));
      const Rule r = mapped(gl, 0.0, mu.reach(z, u));
      for (Index q = 0; q < r.x.size(); ++q) inter -= r.w[q] * u.dot(g(z + r.x[q] * u));
    }
    inter *= rho * 2 * pi / m;
  } else {
    const auto& cells = mu.cells();
    const double area = mu.h() * mu.h();
    for (Index ix = 0; ix < cells.rows(); ++ix)
      for (Index iy = 0; iy < cells.cols(); ++iy) {
        if (cells(ix, iy) == 0) continue;
        const Vec2 w = mu.cell_center(ix, iy), d = z - w;
        const double r2 = d.squaredNorm();
        if (r2 > 0.25 * area) inter += cells(ix, iy) * area * d.dot(g(w)) / r2;
      }
  }
  const Vec2 gz = g(z);
  ResidualReport r;
  r.terms["interaction"] = beta / 2 * inter;
  r.terms["self"] = 0.5 * gz.squaredNorm();
  r.terms["cost"] = -(z.squaredNorm() / 8 + beta * beta / 8 * circumcircle_limit(z, mu, rtol));
  r.terms["lambda"] = beta / 4;
  r.assemble();
  return r;
}

double product_rule_gap(const EquilibriumMeasure1D& mu, double x) {
  const double hm = mu.hilbert_quadrature(x);
  const double hmhm = mu.hilbert_of([&](double t) { return mu.hilbert_quadrature(t); }, x);
  const double m = mu.density(x);
  return std::abs(pi * pi * m * m - (hm * hm - 2 * hmhm));
}

double free_information_gap(const EquilibriumMeasure1D& mu) {
  const double lhs = mu.integrate([&](double t) {
    const double h = mu.hilbert_quadrature(t);
    return h * h;
  });
  return std::abs(lhs - pi * pi / 3 * mu.integrate_m3());
}

double IdentityReport::worst() const {
  double w = 0;
  for (const auto& [k, v] : max_relative_error) w = std::max(w, v);
  return w;
}

IdentityReport identity_suite(const Config1D& c) {
  const Vec& x = c.points();
  const Index n = x.size();
  const double nm1 = double(n - 1);
  Vec h1, h2;
  pair_sums_all_1d(x, h1, h2);
  IdentityReport rep;

  // errors are measured against the largest summand, which is what roundoff scales with
  {
    double s = 0, mag = double(n) / 2;
    for (Index i = 0; i < n; ++i) {
      const auto p = pair_sums_1d(x, i);
      s += x[i] * p.h1;
      mag = std::max(mag, std::abs(x[i] * p.h1));
    }
    rep.max_relative_error["sum_x_h1"] = std::abs(s - double(n) / 2) / mag;
  }
  {
    const double lhs = h2.sum() / nm1, rhs = h1.squaredNorm();
    rep.max_relative_error["sum_h2_vs_h1_sq"] = std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
  }
  double worst = 0;
  for (Index i = 0; i < n; ++i) {
    double a = 0, b = 0, d = 0, mag = 0;
    for (Index k = 0; k < n; ++k) {
      if (k == i) continue;
      for (Index l = 0; l < n; ++l) {
        if (l == i || l == k) continue;
        const double ta = 2 / ((x[k] - x[l]) * (x[i] - x[k]));
        const double tb = 1 / (x[k] - x[l]) * (1 / (x[i] - x[k]) - 1 / (x[i] - x[l]));
        const double td = 1 / ((x[i] - x[k]) * (x[i] - x[l]));
        a += ta;
        b += tb;
        d += td;
        mag = std::max({mag, std::abs(ta), std::abs(tb), std::abs(td)});
      }
    }
    if (mag > 0) worst = std::max({worst, std::abs(a - b) / mag, std::abs(a - d) / mag});
  }
  rep.max_relative_error["double_sum_cancellation"] = worst;
  return rep;
}

IdentityReport identity_suite(const Config2D& c) {
  const Points2& z = c.points();
  const Index n = z.cols();
  auto q = [](const Vec2& a, const Vec2& b) -> Vec2 { return (a - b) / (a - b).squaredNorm(); };
  double worst = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = j + 1; k < n; ++k) {
        if (j == i || k == i) continue;
        const Vec2 zi = z.col(i), w = z.col(j), u = z.col(k);
        const double t1 = q(zi, w).dot(q(zi, u)), t2 = q(zi, w).dot(q(w, u)), t3 = q(zi, u).dot(q(u, w));
        const double rhs = inv_sq_circumdiameter<double>(zi - w, zi - u);
        const double mag = std::max({std::abs(t1), std::abs(t2), std::abs(t3), rhs});
        worst = std::max(worst, std::abs(t1 - t2 - t3 - rhs) / mag);
      }
  IdentityReport rep;
  rep.max_relative_error["circumcircle"] = worst;
  return rep;
}

Vec random_points_1d(PhiloxStream& rng, Index n) {
  const double scale = std::exp(3 * rng.uniform() - 1.5);
  Vec x(n);
  double t = 0;
  for (Index k = 0; k < n; ++k) {
    t += -std::log(1 - rng.uniform()) * scale;
    x[k] = t;
  }
  x.array() -= x.mean();
  return x;
}

Points2 random_points_2d(PhiloxStream& rng, Index n) {
  const double scale = std::exp(3 * rng.uniform() - 1.5);
  Points2 z(2, n);
  for (Index k = 0; k < n; ++k) z.col(k) = scale * Vec2(rng.normal(), rng.normal());
  return z;
}

namespace {

void check_spec(const SweepSpec& s) {
  if (s.count < 1) throw DomainError("invariant violated: count >= 1");
  if (s.n_min < 3 || s.n_max < s.n_min) throw DomainError("invariant violated: 3 <= n_min <= n_max");
  if (s.fixed) s.fixed->validate();
}

Index draw_n(PhiloxStream& rng, const SweepSpec& s) {
  return s.n_min + std::min<Index>(Index(rng.uniform() * double(s.n_max - s.n_min + 1)), s.n_max - s.n_min);
}

void keep_max(IdentityReport& into, const std::string& name, double v) {
  auto [it, fresh] = into.max_relative_error.emplace(name, v);
  if (!fresh) it->second = std::max(it->second, v);
}

}  // namespace

IdentityReport identity_sweep(const SweepSpec& spec) {
  check_spec(spec);
  PhiloxStream rng(spec.seed, 1);
  IdentityReport out;
  for (int r = 0; r < spec.count; ++r) {
    const Index n = draw_n(rng, spec);
    for (const auto& [k, v] : identity_suite(Config1D(random_points_1d(rng, n))).max_relative_error) keep_max(out, k, v);
    for (const auto& [k, v] : identity_suite(Config2D(random_points_2d(rng, n))).max_relative_error) keep_max(out, k, v);
  }
  return out;
}

IdentityReport residual_sweep(const SweepSpec& spec) {
  check_spec(spec);
  PhiloxStream rng(spec.seed, 2);
  IdentityReport out;
  for (int r = 0; r < spec.count; ++r) {
    GameParams p;
    if (spec.fixed) {
      p = *spec.fixed;
    } else {
      p.beta = 0.5 + 4.5 * rng.uniform();
      p.sigma = 0.2 + 1.3 * rng.uniform();
      p.c2 = GameParams::c2_closed_1d(p.beta, p.sigma);
    }
    p.potential = PotentialSpec::quadratic();
    p.n = draw_n(rng, spec);
    const Index i = std::min<Index>(Index(rng.uniform() * double(p.n)), p.n - 1);
    const Config1D x(random_points_1d(rng, p.n));
    const Config2D z(random_points_2d(rng, p.n));

    keep_max(out, "nash_1d", std::abs(residual_nash_1d(x, i, p).relative));
    GameParams q = p;
    q.c2 = GameParams::c2_open_1d(p.beta, p.sigma);
    keep_max(out, "hjb_1d", std::abs(residual_hjb_1d(x, q).relative));
    q.c1 = GameParams::c1_2d(p.beta);
    q.c2 = GameParams::c2_closed_2d(p.beta);
    keep_max(out, "nash_2d", std::abs(residual_nash_2d(z, i, q).relative));
    q.c2 = GameParams::c2_open_2d(p.beta);
    keep_max(out, "hjb_2d", std::abs(residual_hjb_2d(z, q).relative));
  }
  return out;
}

IdentityReport master_suite_1d(double beta, int points) {
  if (points < 1) throw DomainError("invariant violated: points >= 1");
  const auto mu = semicircle(beta);
  IdentityReport out;
  double master = 0, product = 0;
  for (int k = 0; k < points; ++k) {
    const double x = mu.center() + 0.98 * mu.half_width() * (2 * (k + 0.5) / points - 1);
    master = std::max(master, std::abs(residual_master_1d(x, mu, beta).relative));
    product = std::max(product, product_rule_gap(mu, x));
  }
  out.max_relative_error["master_1d"] = master;
  out.max_relative_error["mean_field_hj_1d"] = std::abs(residual_mean_field_hj_1d(mu, beta).relative);
  out.max_relative_error["product_rule"] = product;
  out.max_relative_error["free_information"] = free_information_gap(mu);
  return out;
}

IdentityReport master_suite_2d(double beta, int points) {
  if (points < 2) throw DomainError("invariant violated: points >= 2");
  const auto mu = circular_law(beta);
  const double golden = std::numbers::pi * (3 - std::sqrt(5.0));
  double worst = 0;
  for (int k = 0; k < points; ++k) {
    const double r = mu.radius() * (0.05 + 0.85 * k / (points - 1.0));
    const Vec2 z(r * std::cos(golden * k), r * std::sin(golden * k));
    worst = std::max(worst, std::abs(residual_master_2d(z, mu, beta).relative));
  }
  IdentityReport out;
  out.max_relative_error["master_2d"] = worst;
  return out;
}

}  // namespace dyson
