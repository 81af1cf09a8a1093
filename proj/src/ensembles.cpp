#include "dyson/ensembles.hpp"

#include "dyson/equilibrium.hpp"
#include "dyson/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dyson {

void ChainConfig::validate() const {
  if (!(step_size > 0)) throw DomainError("invariant violated: step_size > 0");
  if (n_burn < 0 || n_keep < 1) throw DomainError("invariant violated: n_burn >= 0, n_keep >= 1");
  if (thin < 1) throw DomainError("invariant violated: thin >= 1");
  if (!(target_acceptance > 0 && target_acceptance < 1)) throw DomainError("invariant violated: 0 < target_acceptance < 1");
}

namespace {

// accumulate log of a long product without overflow
struct LogProduct {
  double sum = 0, prod = 1;
  void mul(double g) {
    prod *= g;
    if (prod < 1e-150 || prod > 1e150) {
      sum += std::log(prod);
      prod = 1;
    }
  }
  double value() const { return sum + std::log(prod); }
};

// log target and Langevin drift b = (beta/2) h1 - V'/2 in one sweep
double eval_1d(const Vec& x, const GameParams& p, Vec& b) {
  const Index n = x.size();
  const double s2 = p.sigma * p.sigma;
  b.setZero(n);
  LogProduct lp;
  for (Index i = 0; i < n; ++i) {
    double a = 0;
    const double xi = x[i];
    for (Index k = i + 1; k < n; ++k) {
      const double g = x[k] - xi;
      lp.mul(g);
      const double r = 1.0 / g;
      a -= r;
      b[k] += r;
    }
    b[i] += a;
  }
  const double w = 0.5 * p.beta / double(n - 1);
  double vsum = 0;
  for (Index i = 0; i < n; ++i) {
    b[i] = w * b[i] - 0.5 * p.potential.dV(x[i]);
    vsum += p.potential.V(x[i]);
  }
  return p.beta / s2 * lp.value() - double(n - 1) / s2 * vsum;
}

double eval_2d(const Points2& z, const GameParams& p, Points2& b) {
  const Index n = z.cols();
  const double s2 = p.sigma * p.sigma;
  b.setZero(2, n);
  LogProduct lp;
  for (Index i = 0; i < n; ++i) {
    double ax = 0, ay = 0;
    for (Index k = i + 1; k < n; ++k) {
      const double dx = z(0, i) - z(0, k), dy = z(1, i) - z(1, k);
      const double r2 = dx * dx + dy * dy;
      lp.mul(r2);
      const double q = 1.0 / r2;
      ax += dx * q;
      ay += dy * q;
      b(0, k) -= dx * q;
      b(1, k) -= dy * q;
    }
    b(0, i) += ax;
    b(1, i) += ay;
  }
  const double w = 0.5 * p.beta / double(n - 1);
  b = w * b - 0.5 * z;
  return p.beta / s2 * 0.5 * lp.value() - double(n - 1) / s2 * 0.5 * z.squaredNorm();
}

bool distinct_2d(const Points2& z) {
  if (!z.allFinite()) return false;
  for (Index i = 0; i < z.cols(); ++i)
    for (Index k = i + 1; k < z.cols(); ++k)
      if (z(0, i) == z(0, k) && z(1, i) == z(1, k)) return false;
  return true;
}

double min_gap(const Vec& x) {
  double g = std::numeric_limits<double>::infinity();
  for (Index k = 0; k + 1 < x.size(); ++k) g = std::min(g, x[k + 1] - x[k]);
  return g;
}

double min_gap(const Points2& z) {
  double g = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < z.cols(); ++i)
    for (Index k = i + 1; k < z.cols(); ++k) g = std::min(g, (z.col(i) - z.col(k)).squaredNorm());
  return std::sqrt(g);
}

// Shared MALA loop; State is Vec or Points2.
//
// The step shrinks near collisions, tau(x) = tau0 g^2/(g^2 + l^2) with g the
// smallest gap and l twice the typical proposal displacement. A fixed step
// adapted to the bulk almost never proposes moves into small gaps, which
// starves the heavy tail of 1/gap^2 statistics. The proposal normalisation
// enters the Hastings ratio since tau depends on the state.
template <class State, class Eval, class Valid, class Keep>
ChainDiagnostics mala(State x, const GameParams& p, const ChainConfig& c, Eval&& eval, Valid&& valid, Keep&& keep) {
  c.validate();
  p.validate();
  const Index n = p.n;
  const double s = p.sigma / std::sqrt(double(n - 1));
  const double dim = double(x.size());
  PhiloxStream rng(c.seed);
  State b, bp;
  double lp = eval(x, b);
  double tau0 = c.step_size;
  auto local = [&](const State& z) {
    const double g = min_gap(z), l2 = 4 * s * s * tau0;
    return tau0 * g * g / (g * g + l2);
  };
  double tx = local(x);
  std::vector<double> energy;
  energy.reserve(size_t(c.n_keep));
  long acc_post = 0, prop_post = 0, win_acc = 0, win_prop = 0;
  const Index total = c.n_burn + c.n_keep * c.thin;
  for (Index t = 0; t < total; ++t) {
    State xi = x;
    for (Index k = 0; k < xi.size(); ++k) xi.data()[k] = rng.normal();
    State y = x + tx * b + (s * std::sqrt(tx)) * xi;
    double alpha = 0, lq = 0, ty = 0;
    if (valid(y)) {
      lq = eval(y, bp);
      ty = local(y);
      // log q(x|y) - log q(y|x)
      const State back = x - y - ty * bp;
      const double log_q = -back.squaredNorm() / (2 * s * s * ty) - 0.5 * dim * std::log(ty) +
                           0.5 * xi.squaredNorm() + 0.5 * dim * std::log(tx);
      const double log_ratio = lq - lp + log_q;
      alpha = log_ratio >= 0 ? 1.0 : std::exp(log_ratio);
    }
    const bool accept = alpha > 0 && rng.uniform() < alpha;
    if (accept) {
      x.swap(y);
      b.swap(bp);
      lp = lq;
      tx = ty;
    }
    if (t < c.n_burn) {
      const double gain = 1.0 / std::pow(double(t) + 10.0, 0.6);
      tau0 *= std::exp(gain * (alpha - c.target_acceptance));
      tx = local(x);
    } else {
      ++prop_post;
      ++win_prop;
      acc_post += accept;
      win_acc += accept;
      if (win_prop == 10000) {
        if (win_acc < 100) throw SamplerError("acceptance collapsed below 1% after burn-in");
        win_prop = win_acc = 0;
      }
      if ((t - c.n_burn + 1) % c.thin == 0) {
        keep(x);
        energy.push_back(lp);
      }
    }
  }
  ChainDiagnostics d;
  d.acceptance_rate = prop_post ? double(acc_post) / double(prop_post) : 0.0;
  d.iact_estimate = iact(energy);
  d.ess = double(energy.size()) / d.iact_estimate;
  d.step_size = tau0;
  return d;
}

}  // namespace

double log_density_1d(const Config1D& x, const GameParams& p) {
  Vec b;
  return eval_1d(x.points(), p, b);
}

double log_density_2d(const Config2D& z, const GameParams& p) {
  if (p.potential.kind != PotentialSpec::Kind::quadratic) throw DomainError("2D ensembles support the quadratic potential only");
  Points2 b;
  return eval_2d(z.points(), p, b);
}

Samples1D mala_chain_1d(const GameParams& p, const ChainConfig& c) { return mala_chain_1d(p, c, initial_state_1d(p)); }

Samples1D mala_chain_1d(const GameParams& p, const ChainConfig& c, const Vec& start) {
  if (start.size() != p.n || !Config1D::admissible(start)) throw DomainError("mala_chain_1d: invalid start");
  Samples1D out;
  out.samples.reserve(size_t(c.n_keep));
  out.diag = mala<Vec>(
      start, p, c, [&](const Vec& x, Vec& b) { return eval_1d(x, p, b); },
      [](const Vec& y) { return Config1D::admissible(y); }, [&](const Vec& x) { out.samples.push_back(x); });
  return out;
}

Samples2D mala_chain_2d(const GameParams& p, const ChainConfig& c) { return mala_chain_2d(p, c, initial_state_2d(p)); }

Samples2D mala_chain_2d(const GameParams& p, const ChainConfig& c, const Points2& start) {
  if (p.potential.kind != PotentialSpec::Kind::quadratic) throw DomainError("2D ensembles support the quadratic potential only");
  if (start.cols() != p.n || !distinct_2d(start)) throw DomainError("mala_chain_2d: invalid start");
  Samples2D out;
  out.spiral_scale = circular_law(p.beta).radius();
  out.samples.reserve(size_t(c.n_keep));
  out.diag = mala<Points2>(
      start, p, c, [&](const Points2& z, Points2& b) { return eval_2d(z, p, b); }, distinct_2d,
      [&](const Points2& z) { out.samples.push_back(spiral_sorted(z, out.spiral_scale)); });
  return out;
}

Vec2 ginibre_predicted_location(Index k, Index n) {
  if (n < 1) throw DomainError("ginibre_predicted_location: n must be >= 1");
  Index rn = Index(std::sqrt(double(n)));
  while (rn * rn > n) --rn;
  while ((rn + 1) * (rn + 1) <= n) ++rn;
  if (k < 1 || k > rn * rn) throw DomainError("ginibre_predicted_location: k outside the covered range");
  Index s = Index(std::ceil(std::sqrt(double(k))));
  while (s * s < k) ++s;
  while ((s - 1) * (s - 1) >= k) --s;
  const double r = double(s - 1) / std::sqrt(double(n));
  const double a = 2 * std::numbers::pi * double(k - (s - 1) * (s - 1)) / double(2 * s - 1);
  return {r * std::cos(a), r * std::sin(a)};
}

Vec initial_state_1d(const GameParams& p) {
  const auto mu = equilibrium_for(p.potential, p.beta);
  Vec x(p.n);
  for (Index i = 0; i < p.n; ++i) x[i] = mu.quantile((double(i) + 0.5) / double(p.n));
  return x;
}

Points2 initial_state_2d(const GameParams& p) {
  const double radius = circular_law(p.beta).radius();
  const Index n = p.n;
  Index rn = Index(std::sqrt(double(n)));
  while (rn * rn > n) --rn;
  const Index covered = rn * rn, m = n - covered;
  Points2 z(2, n);
  for (Index k = 1; k <= covered; ++k) z.col(k - 1) = radius * ginibre_predicted_location(k, n);
  const double golden = std::numbers::pi * (3 - std::sqrt(5.0));
  for (Index j = 0; j < m; ++j) {
    const double r = radius * std::sqrt((double(covered) + double(j) + 0.5) / double(n));
    z.col(covered + j) = Vec2(r * std::cos(golden * double(j)), r * std::sin(golden * double(j)));
  }
  return z;
}

double iact(const std::vector<double>& trace) {
  const size_t n = trace.size();
  if (n < 4) return 1.0;
  double m = 0;
  for (double v : trace) m += v;
  m /= double(n);
  auto gamma = [&](size_t k) {
    double s = 0;
    for (size_t t = 0; t + k < n; ++t) s += (trace[t] - m) * (trace[t + k] - m);
    return s / double(n);
  };
  const double g0 = gamma(0);
  if (!(g0 > 0)) return 1.0;
  double sum = 0;
  for (size_t k = 0; 2 * k + 1 < n; ++k) {
    const double G = gamma(2 * k) + gamma(2 * k + 1);
    if (G <= 0) break;
    sum += G;
  }
  return std::max(1.0, (-g0 + 2 * sum) / g0);
}

}  // namespace dyson
