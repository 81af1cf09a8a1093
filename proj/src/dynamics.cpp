#include "dyson/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dyson {

void SdeConfig::validate() const {
  if (!(dt > 0)) throw DomainError("invariant violated: dt > 0");
  if (!(burn_in >= 0)) throw DomainError("invariant violated: burn_in >= 0");
  if (!(horizon >= burn_in)) throw DomainError("invariant violated: horizon >= burn_in");
  if (max_halvings < 0 || max_halvings > 54) throw DomainError("invariant violated: 0 <= max_halvings <= 54");
  if (!(gap_tolerance > 0)) throw DomainError("invariant violated: gap_tolerance > 0");
  if (record_stride < 1) throw DomainError("invariant violated: record_stride >= 1");
  if (horizon / dt > 1e12) throw DomainError("invariant violated: too many steps");
}

Vec NoiseStream::base_1d(Index n) const {
  Vec out(n);
  for (Index k = 0; k < n; ++k) out[k] = at(0, k).first;
  return out;
}

Points2 NoiseStream::base_2d(Index n) const {
  Points2 out(2, n);
  for (Index k = 0; k < n; ++k) {
    const auto [a, b] = at(0, k);
    out(0, k) = a;
    out(1, k) = b;
  }
  return out;
}

Vec drift_1d(const Vec& x, const GameParams& p, const Feedback& fb) {
  const Index n = x.size();
  Vec h1 = Vec::Zero(n);
  for (Index i = 0; i < n; ++i) {
    double a = 0;
    const double xi = x[i];
    for (Index k = i + 1; k < n; ++k) {
      const double r = 1.0 / (xi - x[k]);
      a += r;
      h1[k] -= r;
    }
    h1[i] += a;
  }
  h1 /= double(n - 1);
  Vec b(n);
  for (Index i = 0; i < n; ++i) b[i] = 0.5 * p.beta * h1[i] - 0.5 * p.potential.dV(x[i]);
  if (fb.active()) {
    const Index i = fb.player;
    b[i] = fb.scale * (0.5 * (p.beta + fb.beta_shift) * h1[i] - 0.5 * p.potential.dV(x[i])) + fb.additive;
  }
  return b;
}

Points2 drift_2d(const Points2& z, const GameParams& p, const Feedback& fb) {
  if (p.potential.kind != PotentialSpec::Kind::quadratic)
    throw DomainError("2D dynamics support the quadratic potential only");
  const Index n = z.cols();
  Points2 h1 = Points2::Zero(2, n);
  for (Index i = 0; i < n; ++i) {
    double ax = 0, ay = 0;
    for (Index k = i + 1; k < n; ++k) {
      const double dx = z(0, i) - z(0, k), dy = z(1, i) - z(1, k);
      const double q = 1.0 / (dx * dx + dy * dy);
      ax += dx * q;
      ay += dy * q;
      h1(0, k) -= dx * q;
      h1(1, k) -= dy * q;
    }
    h1(0, i) += ax;
    h1(1, i) += ay;
  }
  h1 /= double(n - 1);
  Points2 b = 0.5 * p.beta * h1 - 0.5 * z;
  if (fb.active()) {
    const Index i = fb.player;
    b.col(i) = fb.scale * (0.5 * (p.beta + fb.beta_shift) * h1.col(i) - 0.5 * z.col(i)) + fb.additive_2d;
  }
  return b;
}

namespace {

double min_gap_1d(const Vec& x) {
  double g = std::numeric_limits<double>::infinity();
  for (Index k = 0; k + 1 < x.size(); ++k) g = std::min(g, x[k + 1] - x[k]);
  return g;
}

double min_dist_2d(const Points2& z) {
  double g = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < z.cols(); ++i)
    for (Index k = i + 1; k < z.cols(); ++k) g = std::min(g, (z.col(i) - z.col(k)).squaredNorm());
  return std::sqrt(g);
}

// every adjacent gap moves by at most tol times its old value
bool gaps_controlled_1d(const Vec& x, const Vec& y, double tol) {
  if (!std::isfinite(tol)) return true;
  for (Index k = 0; k + 1 < x.size(); ++k) {
    const double g = x[k + 1] - x[k];
    if (std::abs((y[k + 1] - y[k]) - g) > tol * g) return false;
  }
  return true;
}

bool gaps_controlled_2d(const Points2& z, const Points2& y, double tol) {
  if (!std::isfinite(tol)) return true;
  const double lo = tol < 1 ? (1 - tol) * (1 - tol) : 0.0, hi = (1 + tol) * (1 + tol);
  for (Index i = 0; i < z.cols(); ++i)
    for (Index k = i + 1; k < z.cols(); ++k) {
      const double g = (z.col(i) - z.col(k)).squaredNorm(), h = (y.col(i) - y.col(k)).squaredNorm();
      if (h < lo * g || h > hi * g) return false;
    }
  return true;
}

// Returns the number of halvings used.
long advance_1d(Vec& x, const GameParams& p, double dt, const Vec& dw, const NoiseStream& bridge, std::uint64_t node,
                int depth, int max_depth, double tol, const Feedback& fb) {
  const double s = p.sigma / std::sqrt(double(x.size() - 1));
  Vec y = x + dt * drift_1d(x, p, fb) + s * dw;
  const bool ok = Config1D::admissible(y);
  if (ok && (depth >= max_depth || gaps_controlled_1d(x, y, tol))) {
    x.swap(y);
    return 0;
  }
  if (depth >= max_depth) throw StepError("step_dyson_1d: ordering violated after max halvings", min_gap_1d(y));
  Vec eta(x.size());
  for (Index k = 0; k < x.size(); ++k) eta[k] = bridge.at(node, k).first;
  const Vec dw1 = 0.5 * dw + 0.5 * std::sqrt(dt) * eta;
  const Vec dw2 = dw - dw1;
  long h = 1;
  h += advance_1d(x, p, 0.5 * dt, dw1, bridge, 2 * node, depth + 1, max_depth, tol, fb);
  h += advance_1d(x, p, 0.5 * dt, dw2, bridge, 2 * node + 1, depth + 1, max_depth, tol, fb);
  return h;
}

long advance_2d(Points2& z, const GameParams& p, double dt, const Points2& dw, const NoiseStream& bridge,
                std::uint64_t node, int depth, int max_depth, double tol, const Feedback& fb) {
  const double s = p.sigma / std::sqrt(double(z.cols() - 1));
  Points2 y = z + dt * drift_2d(z, p, fb) + s * dw;
  const double g = min_dist_2d(y);
  const bool ok = g >= collision_floor_2d && y.allFinite();
  if (ok && (depth >= max_depth || gaps_controlled_2d(z, y, tol))) {
    z.swap(y);
    return 0;
  }
  if (depth >= max_depth) throw StepError("step_coulomb_2d: collision floor violated after max halvings", g);
  Points2 eta(2, z.cols());
  for (Index k = 0; k < z.cols(); ++k) {
    const auto [a, b] = bridge.at(node, k);
    eta(0, k) = a;
    eta(1, k) = b;
  }
  const Points2 dw1 = 0.5 * dw + 0.5 * std::sqrt(dt) * eta;
  const Points2 dw2 = dw - dw1;
  long h = 1;
  h += advance_2d(z, p, 0.5 * dt, dw1, bridge, 2 * node, depth + 1, max_depth, tol, fb);
  h += advance_2d(z, p, 0.5 * dt, dw2, bridge, 2 * node + 1, depth + 1, max_depth, tol, fb);
  return h;
}

}  // namespace

Config1D step_dyson_1d(const Config1D& state, const GameParams& p, double dt, const Vec& noise,
                       const NoiseStream& bridge, int max_halvings, const Feedback& fb, double gap_tolerance) {
  if (noise.size() != state.size()) throw DomainError("step_dyson_1d: noise length mismatch");
  if (max_halvings < 0 || max_halvings > 54) throw DomainError("step_dyson_1d: max_halvings outside [0, 54]");
  Vec x = state.points();
  advance_1d(x, p, dt, std::sqrt(dt) * noise, bridge, 1, 0, max_halvings, gap_tolerance, fb);
  return Config1D(std::move(x));
}

Config2D step_coulomb_2d(const Config2D& state, const GameParams& p, double dt, const Points2& noise,
                         const NoiseStream& bridge, int max_halvings, const Feedback& fb, double gap_tolerance) {
  if (noise.cols() != state.size()) throw DomainError("step_coulomb_2d: noise length mismatch");
  if (max_halvings < 0 || max_halvings > 54) throw DomainError("step_coulomb_2d: max_halvings outside [0, 54]");
  Points2 z = state.points();
  advance_2d(z, p, dt, std::sqrt(dt) * noise, bridge, 1, 0, max_halvings, gap_tolerance, fb);
  return Config2D(std::move(z));
}

namespace {

template <class State, class Advance, class Base>
Trajectory<State> run(State x, const SdeConfig& sde, const Integrands<State>& integrands, Advance&& advance,
                      Base&& base) {
  sde.validate();
  const auto nsteps = static_cast<std::uint64_t>(std::llround(sde.horizon / sde.dt));
  const auto burn = static_cast<std::uint64_t>(std::llround(sde.burn_in / sde.dt));
  Trajectory<State> tr;
  std::vector<double> acc(integrands.size(), 0.0);
  auto record = [&](std::uint64_t s) {
    tr.times.push_back(double(s) * sde.dt);
    if (sde.keep_states) tr.states.push_back(x);
    size_t j = 0;
    for (const auto& kv : integrands) tr.integrals[kv.first].push_back(acc[j++]);
  };
  for (const auto& kv : integrands) tr.integrals[kv.first];
  for (std::uint64_t s = 0; s < nsteps; ++s) {
    if (s >= burn && (s - burn) % std::uint64_t(sde.record_stride) == 0) record(s);
    size_t j = 0;
    for (const auto& kv : integrands) acc[j++] += kv.second(x) * sde.dt;
    const NoiseStream ns(sde.seed, s);
    try {
      tr.halvings += advance(x, ns, base(ns));
    } catch (const StepError& e) {
      throw StepError(e.what(), e.gap, double(s) * sde.dt);
    }
  }
  if (nsteps >= burn && (tr.times.empty() || tr.times.back() < double(nsteps) * sde.dt)) record(nsteps);
  return tr;
}

}  // namespace

Trajectory1D simulate(const Config1D& initial, const GameParams& p, const SdeConfig& sde,
                      const Integrands<Vec>& integrands, const Feedback& fb) {
  p.validate();
  const Index n = initial.size();
  if (p.n != n) throw DomainError("simulate: params.n does not match the configuration");
  const double sq = std::sqrt(sde.dt);
  return run<Vec>(
      initial.points(), sde, integrands,
      [&](Vec& x, const NoiseStream& ns, const Vec& xi) {
        return advance_1d(x, p, sde.dt, sq * xi, ns, 1, 0, sde.max_halvings, sde.gap_tolerance, fb);
      },
      [n](const NoiseStream& ns) { return ns.base_1d(n); });
}

Trajectory2D simulate(const Config2D& initial, const GameParams& p, const SdeConfig& sde,
                      const Integrands<Points2>& integrands, const Feedback& fb) {
  p.validate();
  const Index n = initial.size();
  if (p.n != n) throw DomainError("simulate: params.n does not match the configuration");
  const double sq = std::sqrt(sde.dt);
  return run<Points2>(
      initial.points(), sde, integrands,
      [&](Points2& z, const NoiseStream& ns, const Points2& xi) {
        return advance_2d(z, p, sde.dt, sq * xi, ns, 1, 0, sde.max_halvings, sde.gap_tolerance, fb);
      },
      [n](const NoiseStream& ns) { return ns.base_2d(n); });
}

namespace {

template <class State>
std::vector<double> batch_means(const Trajectory<State>& traj, const std::string& name, int batches) {
  const auto it = traj.integrals.find(name);
  if (it == traj.integrals.end()) throw DomainError("ergodic_average: unknown integral '" + name + "'");
  const auto& I = it->second;
  const auto& t = traj.times;
  if (t.size() < 2 || !(t.back() > t.front())) throw DomainError("ergodic_average: empty averaging window");
  if (batches < 2 || t.size() < size_t(batches) + 1) throw DomainError("ergodic_average: too few records for batching");
  std::vector<double> out;
  size_t prev = 0;
  for (int b = 1; b <= batches; ++b) {
    const double tb = t.front() + (t.back() - t.front()) * b / batches;
    size_t k = size_t(std::lower_bound(t.begin(), t.end(), tb - 1e-9 * (t.back() - t.front())) - t.begin());
    k = std::min(k, t.size() - 1);
    if (k <= prev) throw DomainError("ergodic_average: batches too fine for the record stride");
    out.push_back((I[k] - I[prev]) / (t[k] - t[prev]));
    prev = k;
  }
  return out;
}

double sd_of(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= double(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size() - 1));
}

}  // namespace

template <class State>
Estimate ergodic_average(const Trajectory<State>& traj, const std::string& name, int batches) {
  const auto bm = batch_means(traj, name, batches);
  const auto& I = traj.integrals.at(name);
  Estimate e;
  e.mean = (I.back() - I.front()) / (traj.times.back() - traj.times.front());
  e.std_error = sd_of(bm) / std::sqrt(double(bm.size()));
  return e;
}

template <class State>
Estimate ergodic_average(const std::vector<Trajectory<State>>& reps, const std::string& name, int batches) {
  if (reps.empty()) throw DomainError("ergodic_average: no replicas");
  std::vector<double> pooled;
  double m = 0;
  for (const auto& r : reps) {
    const auto bm = batch_means(r, name, batches);
    pooled.insert(pooled.end(), bm.begin(), bm.end());
    m += ergodic_average(r, name, batches).mean;
  }
  return {m / double(reps.size()), sd_of(pooled) / std::sqrt(double(pooled.size()))};
}

template Estimate ergodic_average(const Trajectory<Vec>&, const std::string&, int);
template Estimate ergodic_average(const Trajectory<Points2>&, const std::string&, int);
template Estimate ergodic_average(const std::vector<Trajectory<Vec>>&, const std::string&, int);
template Estimate ergodic_average(const std::vector<Trajectory<Points2>>&, const std::string&, int);

}  // namespace dyson
