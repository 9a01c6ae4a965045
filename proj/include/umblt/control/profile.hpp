#pragma once

#include <functional>
#include <vector>

#include "umblt/core/quadrature.hpp"

namespace umblt {

/// Target values h(θ_i) on a DirectionSet.
struct AngularProfile {
  std::vector<double> h;

  static AngularProfile from_function(const DirectionSet& dirs, const std::function<double(double)>& f);
  int size() const { return static_cast<int>(h.size()); }
  /// Σ_i w_i |h_i|.
  double l1(const DirectionSet& dirs) const;
  double linf() const;
  /// Profile in the reversed labeling, h'(θ) = h(−θ).
  AngularProfile reversed(const DirectionSet& dirs) const;
  void require_finite() const;
};

/// Raised cosine (1 + cos(2π(θ − θ₀)/width))/2 on |θ − θ₀| < width/2,
/// renormalized to quadrature mass 1. width is the support length; it must be
/// at least two direction spacings.
AngularProfile bump_profile(const DirectionSet& dirs, double theta0, double width);

/// Default bump width: four direction spacings.
double default_bump_width(const DirectionSet& dirs);

}  // namespace umblt
