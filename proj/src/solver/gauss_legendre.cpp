#include "umblt/solver/gauss_legendre.hpp"

#include <cmath>
#include <numbers>

#include "umblt/core/errors.hpp"

namespace umblt {

namespace {
// Legendre P_n and its derivative at x.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0, dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}
}  // namespace

GaussLegendre::GaussLegendre(int n) : order(n), node(n), weight(n) {
  if (n < 1 || n > 32) throw ValidationError("Gauss-Legendre order must be in [1, 32]");
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, p, dp);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(n, x, p, dp);
    node[n - 1 - i] = x;
    weight[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  if (n == 1) node[0] = 0.0, weight[0] = 2.0;
  auto lagrange = [&](int k, double x) {
    double r = 1.0;
    for (int m = 0; m < n; ++m)
      if (m != k) r *= (x - node[m]) / (node[k] - node[m]);
    return r;
  };
  partial.assign(n, std::vector<double>(n, 0.0));
  for (int s = 0; s < n; ++s) {
    const double half = 0.5 * (node[s] + 1.0);
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int m = 0; m < n; ++m) acc += weight[m] * lagrange(k, -1.0 + half * (node[m] + 1.0));
      partial[s][k] = half * acc;
    }
  }
}

}  // namespace umblt
