#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>

namespace dyson {

struct Rule {
  Eigen::VectorXd x, w;
};

// Gauss-Legendre on [-1, 1] by Newton on P_n.
inline Rule gauss_legendre(int n) {
  Rule r{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2 * k - 1) * z * p1 - (k - 1) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2 / ((1 - z * z) * dp * dp);
  }
  return r;
}

// Map a [-1,1] rule onto [a,b].
inline Rule mapped(const Rule& r, double a, double b) {
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  return {(c + h * r.x.array()).matrix(), (h * r.w.array()).matrix()};
}

}  // namespace dyson
