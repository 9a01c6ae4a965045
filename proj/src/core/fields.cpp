#include "umblt/core/fields.hpp"

#include <algorithm>
#include <cmath>

#include "umblt/core/errors.hpp"

namespace umblt {

ScalarField::ScalarField(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), v_(std::move(values)) {
  if (static_cast<int>(v_.size()) != grid_->active_count())
    throw ValidationError("scalar field size does not match the grid");
}

ScalarField ScalarField::sample(GridPtr grid, const std::function<double(Vec2)>& f) {
  ScalarField s(grid);
  for (int a = 0; a < grid->active_count(); ++a) s.v_[a] = f(grid->node(a));
  return s;
}

double ScalarField::interpolate(Vec2 y) const {
  Stencil s = grid_->stencil(y);
  double r = 0.0;
  for (int k = 0; k < s.count; ++k) r += s.weight[k] * v_[s.node[k]];
  return r;
}

double ScalarField::min() const { return *std::min_element(v_.begin(), v_.end()); }
double ScalarField::max() const { return *std::max_element(v_.begin(), v_.end()); }
double ScalarField::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}
bool ScalarField::is_constant() const {
  return std::all_of(v_.begin(), v_.end(), [&](double x) { return x == v_.front(); });
}
void ScalarField::require_finite(const char* what) const {
  for (double x : v_)
    if (!std::isfinite(x)) throw ValidationError(std::string(what) + ": non-finite value");
}

double AngularField::interpolate(int dir, Vec2 y) const {
  Stencil s = grid_->stencil(y);
  const double* p = v_.data() + static_cast<size_t>(dir) * n_nodes();
  double r = 0.0;
  for (int k = 0; k < s.count; ++k) r += s.weight[k] * p[s.node[k]];
  return r;
}

double AngularField::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

void AngularField::require_finite(const char* what) const {
  for (double x : v_)
    if (!std::isfinite(x)) throw NumericalError(std::string(what) + ": non-finite value");
}

AngularField AngularField::reversed() const {
  AngularField r(grid_, n_dir_);
  const int half = n_dir_ / 2;
  for (int d = 0; d < n_dir_; ++d) {
    auto src = direction((d + half) % n_dir_);
    std::copy(src.begin(), src.end(), r.direction(d).begin());
  }
  return r;
}

double max_abs_diff(const AngularField& a, const AngularField& b) {
  if (a.size() != b.size()) throw ValidationError("angular fields differ in shape");
  double m = 0.0;
  for (size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  if (a.size() != b.size()) throw ValidationError("scalar fields differ in shape");
  double m = 0.0;
  for (int k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace umblt
