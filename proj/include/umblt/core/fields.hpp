#pragma once

#include <functional>
#include <span>
#include <vector>

#include "umblt/core/grid.hpp"

namespace umblt {

/// One value per active grid node.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridPtr grid, double value = 0.0)
      : grid_(std::move(grid)), v_(grid_->active_count(), value) {}
  ScalarField(GridPtr grid, std::vector<double> values);
  static ScalarField sample(GridPtr grid, const std::function<double(Vec2)>& f);

  const GridPtr& grid() const { return grid_; }
  int size() const { return static_cast<int>(v_.size()); }
  double& operator[](int a) { return v_[a]; }
  double operator[](int a) const { return v_[a]; }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  double interpolate(Vec2 y) const;
  double min() const;
  double max() const;
  double max_abs() const;
  bool is_constant() const;
  /// Throws ValidationError on NaN/Inf.
  void require_finite(const char* what) const;

 private:
  GridPtr grid_;
  std::vector<double> v_;
};

/// Values at (active node, direction), direction-major.
class AngularField {
 public:
  AngularField() = default;
  AngularField(GridPtr grid, int n_dir, double value = 0.0)
      : grid_(std::move(grid)), n_dir_(n_dir),
        v_(static_cast<size_t>(grid_->active_count()) * n_dir, value) {}

  const GridPtr& grid() const { return grid_; }
  int n_dir() const { return n_dir_; }
  int n_nodes() const { return grid_->active_count(); }
  size_t size() const { return v_.size(); }

  double& at(int dir, int a) { return v_[static_cast<size_t>(dir) * n_nodes() + a]; }
  double at(int dir, int a) const { return v_[static_cast<size_t>(dir) * n_nodes() + a]; }
  std::span<double> direction(int d) {
    return {v_.data() + static_cast<size_t>(d) * n_nodes(), static_cast<size_t>(n_nodes())};
  }
  std::span<const double> direction(int d) const {
    return {v_.data() + static_cast<size_t>(d) * n_nodes(), static_cast<size_t>(n_nodes())};
  }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  double interpolate(int dir, Vec2 y) const;
  double max_abs() const;
  void require_finite(const char* what) const;

  /// Field with each direction replaced by its opposite: v(x, θ) ↦ v(x, −θ).
  AngularField reversed() const;

 private:
  GridPtr grid_;
  int n_dir_ = 0;
  std::vector<double> v_;
};

/// max |a − b| over all entries.
double max_abs_diff(const AngularField& a, const AngularField& b);
double max_abs_diff(const ScalarField& a, const ScalarField& b);

}  // namespace umblt
