#pragma once

#include <memory>
#include <string>
#include <vector>

#include "umblt/control/control.hpp"
#include "umblt/control/family.hpp"
#include "umblt/recon/functional.hpp"

namespace umblt {

/// How the controls v with v(x₀,·) = bump(θ₀) are built.
///  Family: the angular-data family, one inversion per direction and one small
///    solve per node (all bumps at a node share it).
///  PointControl: control_point per lattice point, relabeled to the adjoint form.
enum class ControlSource { Family, PointControl };

struct GradientOptions {
  double bump_width = 0.0;  ///< ≤ 0: default_bump_width
  ControlSource source = ControlSource::Family;
  ControlOptions control;   ///< PointControl only
  /// Active nodes to recover; empty means all of them.
  std::vector<int> nodes;
  /// Reject control matrices with condition number above this (node skipped).
  double max_condition = 1e12;
};

/// Bump-smoothed θ_d·∇u(x_a, θ_d); entries of invalid nodes are zero.
struct GradientField {
  AngularField values;
  std::vector<char> valid;  ///< per active node
  double bump_width = 0.0;
  ControlSource source = ControlSource::Family;
  int skipped = 0;
  std::vector<std::string> failures;
  double max_condition = 0.0;  ///< over the nodes used (Family only)
  int control_reuse = 0;       ///< bump profiles served by an existing control factorization

  bool partial() const { return skipped > 0; }
};

/// Gradient from the family functionals H_j (Γ+ data e_j): at node a with
/// E = E_adj(a), θ·∇u smoothed by bump b_d is bᵀ E⁻ᵀ (H_j(a))_j.
GradientField gradient_from_functionals(const AngularControlFamily& family, const std::vector<ScalarField>& H,
                                        const GradientOptions& opts = {});

/// The chain measurements → H_v(x₀) → θ₀·∇u(x₀,θ₀) for every node and direction.
GradientField recover_gradient(const RteSolver& solver, const MeasurementSet& mset,
                               const GradientOptions& opts = {});
/// Same, reusing a family already built for this solver.
GradientField recover_gradient(const AngularControlFamily& family, const MeasurementSet& mset,
                               const GradientOptions& opts = {});

struct BackIntegration {
  AngularField u;
  std::vector<char> valid;  ///< per node: every ray from it stayed on valid gradient nodes
};

/// u(x,θ) = Λ⁰(x + τ₊θ, θ) − ∫₀^{τ₊} G(x + tθ, θ) dt with bilinear G and
/// Gauss–Legendre pieces of length ≤ h. Throws ValidationError when the
/// gradient and trace do not share the grid and directions.
BackIntegration integrate_back(const GradientField& grad, const BoundaryTrace& lambda0, int quad_order = 4);

struct SourceEstimate {
  ScalarField S;       ///< quadrature average over directions
  ScalarField spread;  ///< max_d |per-direction estimate − S|
};

/// θ·∇u + σu − ∫k u per direction (central differences where x ± hθ lie in X,
/// one-sided otherwise), averaged with the quadrature weights. Uses σ and k of
/// the solver's medium; its source is ignored.
SourceEstimate recover_source(const RteSolver& solver, const AngularField& u);

struct ReconstructOptions {
  GradientOptions gradient;
  int quad_order = 4;
  /// Nodes closer than this to ∂X are excluded from error statistics; < 0 means h.
  double interior_margin = -1.0;
};

struct Reconstruction {
  ScalarField S_hat;
  ScalarField spread;
  std::vector<char> valid;  ///< per node; masked nodes carry S_hat = 0
  GradientField gradient;
  double eps = 0.0;
  double h = 0.0;
  double bump_width = 0.0;
  /// ε + h + width², the unit-constant error budget.
  double error_budget = 0.0;
  double family_build_seconds = 0.0;
  std::string method;
};

/// Gradient recovery, back-integration and source recovery from one measurement set.
Reconstruction reconstruct(const RteSolver& solver, const MeasurementSet& mset, const ReconstructOptions& opts = {});
Reconstruction reconstruct(const AngularControlFamily& family, const MeasurementSet& mset,
                           const ReconstructOptions& opts = {});

/// max |a − b| / max |b| over valid nodes at distance ≥ margin from ∂X (margin < 0: h).
double relative_interior_error(const ScalarField& a, const ScalarField& b, const std::vector<char>* valid = nullptr,
                               double margin = -1.0);

}  // namespace umblt
