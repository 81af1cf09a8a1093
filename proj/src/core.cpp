#include "dyson/core.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace dyson {

PotentialSpec PotentialSpec::quartic(double a) {
  if (a < 0) throw DomainError("quartic potential needs a >= 0");
  PotentialSpec v;
  v.kind = Kind::custom;
  v.name = "quartic";
  v.value = [a](double x) { return 0.5 * x * x + a * x * x * x * x; };
  v.grad = [a](double x) { return x + 4 * a * x * x * x; };
  v.hess = [a](double x) { return 1 + 12 * a * x * x; };
  v.convexity = 1.0;
  return v;
}

bool PotentialSpec::convex_on(double a, double b, int n) const {
  for (int k = 0; k < n; ++k) {
    const double x = a + (b - a) * k / (n - 1);
    if (d2V(x) < convexity) return false;
  }
  return true;
}

void GameParams::validate() const {
  if (n < 2) throw DomainError("invariant violated: n_players >= 2");
  if (!(sigma > 0)) throw DomainError("invariant violated: sigma > 0");
  if (!std::isfinite(beta) || !std::isfinite(c1) || !std::isfinite(c2))
    throw DomainError("invariant violated: finite coefficients");
}

namespace {
bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }
}  // namespace

bool GameParams::closed_loop_1d() const { return same(c2, c2_closed_1d(beta, sigma)); }
bool GameParams::open_loop_1d() const { return same(c2, c2_open_1d(beta, sigma)); }
bool GameParams::closed_loop_2d() const { return same(c1, c1_2d(beta)) && same(c2, c2_closed_2d(beta)); }
bool GameParams::open_loop_2d() const { return same(c1, c1_2d(beta)) && same(c2, c2_open_2d(beta)); }

Points2 spiral_sorted(const Points2& z, double scale) {
  const Index n = z.cols();
  std::vector<Index> idx(n);
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    return spiral_less<double>(z.col(a), z.col(b), n, scale);
  });
  Points2 out(2, n);
  for (Index k = 0; k < n; ++k) out.col(k) = z.col(idx[k]);
  return out;
}

}  // namespace dyson
