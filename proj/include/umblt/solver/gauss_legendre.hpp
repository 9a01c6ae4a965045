#pragma once

#include <vector>

namespace umblt {

/// Gauss–Legendre rule on [−1, 1] with the spectral integration matrix
/// P[s][k] = ∫_{−1}^{ξ_s} ℓ_k, so partial integrals up to each node are exact
/// for polynomials of degree < order.
struct GaussLegendre {
  explicit GaussLegendre(int order);
  int order;
  std::vector<double> node, weight;
  std::vector<std::vector<double>> partial;
};

}  // namespace umblt
