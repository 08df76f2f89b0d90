#pragma once

// Independent reference computations used by the tests. Nothing here calls into the library
// beyond plain Eigen types.

#include <cmath>
#include <utility>
#include <vector>

namespace oracle {

// Gauss-Legendre nodes and weights on [0, 1], Newton iteration on P_n.
inline std::vector<std::pair<double, double>> gauss_legendre01(int n) {
  std::vector<std::pair<double, double>> out;
  const double pi = std::acos(-1.0);
  for (int i = 1; i <= n; ++i) {
    double x = std::cos(pi * (i - 0.25) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    out.push_back({0.5 * (1.0 - x), 0.5 * w});
  }
  return out;
}

inline double shannon(const std::vector<double>& p) {
  double s = 0.0;
  for (double x : p)
    if (x > 0) s -= x * std::log(x);
  return s;
}

inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0) s += p[i] * (std::log(p[i]) - std::log(q[i]));
  return s;
}

// (x - y) / (log x - log y) straight from the definition, with the diagonal limit.
inline double logmean(double x, double y) {
  if (std::abs(x - y) <= 1e-13 * std::max(x, y)) return 0.5 * (x + y);
  return (x - y) / (std::log(x) - std::log(y));
}

// Two-point transport distance for the depolarizing qubit on diagonal states (p, 1-p):
// d = |int_a^b sqrt(2 / logmean(p, 1-p)) dp|, midpoint rule on m cells.
inline double two_point_distance(double a, double b, int m) {
  double lo = std::min(a, b), hi = std::max(a, b), h = (hi - lo) / m, s = 0.0;
  for (int k = 0; k < m; ++k) {
    double p = lo + (k + 0.5) * h;
    s += std::sqrt(2.0 / logmean(p, 1.0 - p)) * h;
  }
  return s;
}

}  // namespace oracle
