#pragma once

#include <vector>

#include "umblt/core/fields.hpp"
#include "umblt/solver/gauss_legendre.hpp"

namespace umblt {

struct RaySample {
  double t = 0.0;
  double weight = 0.0;  ///< quadrature weight in t
  double atten = 1.0;   ///< exp(−∫_0^t σ(x − sθ) ds)
  Stencil st;
};

/// Quadrature along backward characteristics x − tθ. The segment is cut at
/// every grid line and every piece of length > h is split evenly, so each piece
/// lies in one cell, where the bilinear interpolant is a polynomial in t.
class RayIntegrator {
 public:
  RayIntegrator(const ScalarField& sigma, int order);

  /// Samples on t ∈ [0, L]; returns exp(−∫_0^L σ).
  double trace(Vec2 x, Vec2 theta, double L, std::vector<RaySample>& out) const;
  /// exp(−∫_0^t σ(x − sθ) ds).
  double attenuation(Vec2 x, Vec2 theta, double t) const;

 private:
  void pieces(Vec2 x, Vec2 theta, double L, std::vector<double>& cuts) const;

  const ScalarField& sigma_;
  const SpatialGrid& grid_;
  GaussLegendre gl_;
  bool constant_;
  double sigma0_;
};

}  // namespace umblt
