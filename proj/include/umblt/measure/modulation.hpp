#pragma once

#include <vector>

#include "umblt/core/medium.hpp"

namespace umblt {

/// Acoustic standing wave m(x) = 1 + ε cos(q·x + φ), φ ∈ {0, π/2}.
struct PlaneWave {
  Vec2 q;
  double phi = 0.0;
  double eps = 0.0;

  double pattern(Vec2 x) const;
  bool is_sine() const;
  /// Throws ValidationError unless 0 ≤ ε < 1 and φ is 0 or π/2.
  void validate() const;
};

/// cos(q·x_a + φ) at the active nodes.
std::vector<double> modulation_pattern(const SpatialGrid& grid, const PlaneWave& wave);

/// σ, S and the kernel amplitude multiplied pointwise by 1 + ε cos(q·x + φ).
/// The angular profile of the kernel is left alone.
OpticalMedium modulate(const OpticalMedium& medium, const PlaneWave& wave);

}  // namespace umblt
