#pragma once

#include <vector>

#include "umblt/core/boundary.hpp"
#include "umblt/core/fields.hpp"
#include "umblt/core/kernel.hpp"
#include "umblt/core/quadrature.hpp"
#include "umblt/solver/ray.hpp"

namespace umblt {

struct CsrMatrix {
  int rows = 0;
  std::vector<int> ptr{0};
  std::vector<int> col;
  std::vector<double> val;
  size_t nnz() const { return val.size(); }
};

/// Block of `lanes` angular fields stored as ((d·A + a)·lanes + l).
struct BlockField {
  int n_dir = 0, n_nodes = 0, lanes = 0;
  std::vector<double> v;
  BlockField() = default;
  BlockField(int nd, int na, int nl) : n_dir(nd), n_nodes(na), lanes(nl), v(size_t(nd) * na * nl, 0.0) {}
  double& at(int d, int a, int l) { return v[(size_t(d) * n_nodes + a) * lanes + l]; }
  double at(int d, int a, int l) const { return v[(size_t(d) * n_nodes + a) * lanes + l]; }
  void set_lane(int l, const AngularField& f);
  void get_lane(int l, AngularField& f) const;
};

/// Block of Γ+ traces stored as (sample·lanes + l).
struct BlockTrace {
  int samples = 0, lanes = 0;
  std::vector<double> v;
};

/// Discrete integral operators for fixed (grid, σ, quadrature, boundary sampling):
///  volume(d): (T₁⁻¹ q)(x_a, θ_d) = Σ_s W_s B(t_s) q(x_a − t_sθ_d), row per active node;
///  trace(d): the same integral from each Γ+ sample back to its entry point;
///  lift(d):  (J f₋)(x_a, θ_d) = B(τ−) f₋(x_a − τ−θ_d), arc-length interpolated on Γ−.
class TransportOperator {
 public:
  struct Lift {
    double atten = 1.0;
    TraceLerp lerp;
  };

  TransportOperator(const ScalarField& sigma, const DirectionSet& dirs, SamplingPtr sampling, int quad_order,
                    int workers);

  const SpatialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const DirectionSet& directions() const { return dirs_; }
  const SamplingPtr& sampling() const { return sampling_; }
  const RayIntegrator& rays() const { return integrator_; }
  const CsrMatrix& volume(int d) const { return volume_[d]; }
  const CsrMatrix& trace_rows(int d) const { return trace_[d]; }
  const std::vector<Lift>& lift_rows(int d) const { return lift_[d]; }
  /// exp(−∫σ) along the full chord of ray j of direction d.
  double chord_attenuation(int d, int j) const { return chord_atten_[sampling_->start(d) + j]; }
  size_t nnz() const;

  /// out = T₁⁻¹ q.
  void apply(const AngularField& q, AngularField& out) const;
  /// out = T₁⁻¹ q, q isotropic.
  void apply(const ScalarField& q, AngularField& out) const;
  /// out (+)= J f₋.
  void lift(const BoundaryTrace& f_minus, AngularField& out, bool accumulate) const;
  /// Γ+ values of T₁⁻¹ q + J f₋ (f₋ may be null).
  BoundaryTrace trace(const AngularField& q, const BoundaryTrace* f_minus) const;

  void apply_block(const BlockField& q, BlockField& out, int workers) const;
  void trace_block(const BlockField& q, BlockTrace& out) const;

  /// Characteristic integral at an arbitrary point x ∈ X for direction d.
  double evaluate_point(Vec2 x, int d, const AngularField& q, const BoundaryTrace* f_minus) const;

 private:
  GridPtr grid_;
  DirectionSet dirs_;
  SamplingPtr sampling_;
  RayIntegrator integrator_;
  std::vector<CsrMatrix> volume_, trace_;
  std::vector<std::vector<Lift>> lift_;
  std::vector<double> chord_atten_;
};

/// (Σu)(x, θ_i) = amp(x) Σ_j w_j k(t_i − t_j) u(x, θ_j), i.e. ∫k u = −A₂u.
class ScatteringOperator {
 public:
  ScatteringOperator(const ScatteringKernel& kernel, const ScalarField& amplitude, const DirectionSet& dirs);

  void apply(const AngularField& u, AngularField& out) const;
  void apply_block(const BlockField& u, BlockField& out) const;
  /// w_j k(t_m − t_0) for offset m.
  const std::vector<double>& weighted_row() const { return wrow_; }
  const std::vector<double>& amplitude() const { return amp_; }
  bool zero() const { return zero_; }

 private:
  std::vector<double> amp_, wrow_, coeffs_;
  std::vector<std::vector<double>> cosn_, sinn_;  // w_j cos(n t_j), w_j sin(n t_j)
  int n_dir_;
  double w_;  // uniform quadrature weight
  bool harmonic_, zero_;
};

}  // namespace umblt
