#pragma once

#include <memory>
#include <vector>

#include "umblt/core/boundary.hpp"
#include "umblt/core/certificate.hpp"
#include "umblt/core/medium.hpp"
#include "umblt/solver/neumann.hpp"
#include "umblt/solver/transport_operator.hpp"

namespace umblt {

struct SolverOptions {
  double rtol = 1e-10;
  double atol = 1e-14;
  int max_iter = 0;
  int quad_order = 4;          ///< Gauss–Legendre points per ray piece
  int boundary_oversample = 2; ///< boundary rays per grid spacing
  int workers = 0;             ///< 0: UMBLT_WORKERS or 1
};

struct Solution {
  AngularField u;
  SolveReport report;
};

/// Integral-form solver for θ·∇u + σu − ∫k u = S, u|Γ− = f₋:
///   u = J f₋ + T₁⁻¹(S + ∫k u),
/// iterated as a Neumann series under a subcriticality certificate.
class RteSolver {
 public:
  RteSolver(OpticalMedium medium, const DirectionSet& dirs, SolverOptions opts = {});

  const OpticalMedium& medium() const { return medium_; }
  const DirectionSet& directions() const { return dirs_; }
  const GridPtr& grid() const { return medium_.grid(); }
  const SamplingPtr& sampling() const { return sampling_; }
  const SubcriticalityCertificate& certificate() const { return cert_; }
  const SolverOptions& options() const { return opts_; }
  const TransportOperator& transport() const { return *T_; }
  const ScatteringOperator& scattering() const { return *K_; }
  int workers() const { return workers_; }
  IterationControl iteration_control() const;

  BoundaryTrace zero_inflow() const { return BoundaryTrace(BoundarySide::GammaMinus, sampling_); }
  BoundaryTrace zero_outflow() const { return BoundaryTrace(BoundarySide::GammaPlus, sampling_); }

  Solution solve_forward(const ScalarField& S, const BoundaryTrace& f_minus) const;
  /// Source from the medium, zero inflow.
  Solution solve_forward() const;
  /// −θ·∇v + σv = ∫k v with v|Γ+ = f₊, by direction reversal of the forward solver.
  Solution solve_adjoint(const BoundaryTrace& f_plus) const;
  /// Several forward solves with S = 0 sharing one block iteration.
  std::vector<Solution> solve_homogeneous(const std::vector<BoundaryTrace>& f_minus) const;

  /// Γ+ trace of a forward solution.
  BoundaryTrace outflow(const AngularField& u, const ScalarField& S, const BoundaryTrace* f_minus) const;
  /// Value of a forward solution at an arbitrary point, all directions.
  std::vector<double> evaluate_at(Vec2 x, const AngularField& u, const ScalarField& S,
                                  const BoundaryTrace* f_minus) const;

  /// T₁⁻¹ f.
  AngularField apply_transport_inverse(const AngularField& f) const;
  /// A₂u = −∫k u.
  AngularField apply_a2(const AngularField& u) const;
  /// ∫k u.
  AngularField apply_scattering(const AngularField& u) const;
  /// J f₋.
  AngularField lift_boundary(const BoundaryTrace& f_minus) const;
  /// S + ∫k u as an angular field.
  AngularField collision_source(const AngularField& u, const ScalarField& S) const;

 private:
  OpticalMedium medium_;
  DirectionSet dirs_;
  SolverOptions opts_;
  int workers_;
  SubcriticalityCertificate cert_;
  SamplingPtr sampling_;
  std::unique_ptr<TransportOperator> T_;
  std::unique_ptr<ScatteringOperator> K_;
};

/// exp(−∫_0^t σ(x − sθ) ds) with the solver's quadrature on the medium grid.
double attenuation(const OpticalMedium& medium, Vec2 x, Vec2 theta, double t, int quad_order = 4);

enum class ResidualMode { Forward, Adjoint };

/// max over nodes at distance ≥ margin from ∂X and all directions of the
/// first-order upwind residual of θ·∇u + σu − ∫ku − S (forward) or
/// −θ·∇u + σu − ∫ku − S (adjoint). margin < 0 means one cell diagonal.
double residual_norm(const RteSolver& solver, const AngularField& u, const ScalarField& S, ResidualMode mode,
                     double margin = -1.0);

/// max |u − J f₋ − T₁⁻¹(S + ∫k u)| / max |u|: defect of u in the discrete
/// integral form (0 when u ≡ 0 and the data vanish).
double integral_residual(const RteSolver& solver, const AngularField& u, const ScalarField& S,
                         const BoundaryTrace& f_minus);

/// Upwind directional derivative θ·∇u (forward) or −θ·∇u (adjoint), step h,
/// at active node a. Needs the stencil point inside the domain.
double upwind_derivative(const AngularField& u, int d, int a, Vec2 theta, bool adjoint);

}  // namespace umblt
