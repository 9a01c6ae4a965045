#pragma once

#include <memory>
#include <vector>

#include "umblt/core/domain.hpp"
#include "umblt/core/quadrature.hpp"

namespace umblt {

/// One straight chord of the domain in a fixed direction.
struct BoundaryRay {
  double offset = 0.0;  ///< signed distance of the line from the domain center, along θ⊥
  Vec2 entry;           ///< on Γ−
  Vec2 exit;            ///< on Γ+
  double length = 0.0;
  double arc_entry = 0.0;  ///< unwrapped arc coordinate of entry
  double arc_exit = 0.0;
};

/// Linear interpolation between two samples of one direction.
struct TraceLerp {
  int j0 = 0, j1 = 0;
  double w0 = 1.0, w1 = 0.0;
};

/// Boundary samples: for each direction, parallel chords at midpoint offsets
/// with perpendicular spacing ≤ the requested spacing. Entry points sample Γ−,
/// exit points sample Γ+, and weight(d) = w_d·Δs_d is the quadrature weight of
/// ∫_{Γ±} f |θ·n| ds dθ.
///
/// Offsets are symmetric about the center, so ray j of −θ_d is ray n−1−j of θ_d reversed.
class BoundarySampling {
 public:
  static std::shared_ptr<const BoundarySampling> build(const Domain& domain, const DirectionSet& dirs,
                                                       double spacing);

  const Domain& domain() const { return domain_; }
  const DirectionSet& directions() const { return dirs_; }
  int n_dir() const { return dirs_.size(); }
  int rays(int d) const { return start_[d + 1] - start_[d]; }
  int start(int d) const { return start_[d]; }
  int total() const { return start_.back(); }
  const BoundaryRay& ray(int d, int j) const { return rays_[start_[d] + j]; }
  double weight(int d) const { return weight_[d]; }
  double spacing(int d) const { return ds_[d]; }
  double requested_spacing() const { return spacing_; }

  /// Interpolation in arc length along Γ− (entry) or Γ+ (exit) of direction d.
  TraceLerp locate(int d, BoundarySide side, Vec2 p) const;

  /// Same geometry (used to check that traces are comparable).
  bool same_as(const BoundarySampling& o) const;

 private:
  BoundarySampling(const Domain& d, const DirectionSet& dirs) : domain_(d), dirs_(dirs) {}
  Domain domain_;
  DirectionSet dirs_;
  double spacing_ = 0.0;
  std::vector<int> start_;
  std::vector<BoundaryRay> rays_;
  std::vector<double> weight_, ds_;
};

using SamplingPtr = std::shared_ptr<const BoundarySampling>;

/// Values on the Γ− or Γ+ samples of a BoundarySampling.
class BoundaryTrace {
 public:
  BoundaryTrace() = default;
  BoundaryTrace(BoundarySide side, SamplingPtr s, double value = 0.0)
      : side_(side), s_(std::move(s)), v_(s_->total(), value) {}
  /// Value depends on direction only.
  static BoundaryTrace angular(BoundarySide side, SamplingPtr s, const std::vector<double>& per_dir);

  BoundarySide side() const { return side_; }
  const SamplingPtr& sampling() const { return s_; }
  int size() const { return static_cast<int>(v_.size()); }
  double& at(int d, int j) { return v_[s_->start(d) + j]; }
  double at(int d, int j) const { return v_[s_->start(d) + j]; }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  Vec2 point(int d, int j) const;
  double interpolate(int d, Vec2 p) const;
  double max_abs() const;
  /// Σ_d w_d Δs_d Σ_j |f| up to p-th power, i.e. the L^p(Γ, |θ·n|) norm.
  double lp_norm(double p) const;

 private:
  BoundarySide side_ = BoundarySide::GammaMinus;
  SamplingPtr s_;
  std::vector<double> v_;
};

/// Adjoint-side relabeling: value at (exit of ray j, θ_d) becomes value at
/// (entry of ray n−1−j, −θ_d). Maps Γ+ data to Γ− data and back.
BoundaryTrace reverse_trace(const BoundaryTrace& t);

}  // namespace umblt
