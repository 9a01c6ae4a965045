#include "umblt/core/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "umblt/core/errors.hpp"

namespace umblt {

DirectionSet DirectionSet::uniform(int n) {
  if (n < 4 || n % 2 != 0) throw ValidationError("direction count must be even and at least 4");
  DirectionSet s;
  s.spacing_ = 2.0 * std::numbers::pi / n;
  for (int i = 0; i < n; ++i) {
    double t = s.spacing_ * i;
    s.angle_.push_back(t);
    s.dir_.push_back({std::cos(t), std::sin(t)});
    s.weight_.push_back(s.spacing_);
  }
  // Exact opposites and axis directions, so reversal maps rays onto rays.
  for (int i = 0; i < n / 2; ++i) s.dir_[i + n / 2] = -s.dir_[i];
  if (n % 4 == 0) {
    s.dir_[0] = {1, 0};
    s.dir_[n / 4] = {0, 1};
    s.dir_[n / 2] = {-1, 0};
    s.dir_[3 * n / 4] = {0, -1};
  }
  return s;
}

DirectionSet build_quadrature(int n_dir) { return DirectionSet::uniform(n_dir); }

}  // namespace umblt
