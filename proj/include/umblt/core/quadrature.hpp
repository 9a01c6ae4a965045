#pragma once

#include <vector>

#include "umblt/core/vec2.hpp"

namespace umblt {

/// Equispaced directions t_i = 2πi/n on the unit circle with weights 2π/n.
class DirectionSet {
 public:
  DirectionSet() = default;
  /// n must be even and at least 4.
  static DirectionSet uniform(int n);

  int size() const { return static_cast<int>(angle_.size()); }
  double angle(int i) const { return angle_[i]; }
  Vec2 direction(int i) const { return dir_[i]; }
  double weight(int i) const { return weight_[i]; }
  double spacing() const { return spacing_; }
  /// Index of −θ_i.
  int opposite(int i) const { return (i + size() / 2) % size(); }
  /// Cyclic index offset between θ_i and θ_j, as used by circulant kernels.
  int offset(int i, int j) const { return ((i - j) % size() + size()) % size(); }

 private:
  std::vector<double> angle_;
  std::vector<Vec2> dir_;
  std::vector<double> weight_;
  double spacing_ = 0.0;
};

DirectionSet build_quadrature(int n_dir);

}  // namespace umblt
