#pragma once

#include <string>
#include <vector>

#include "umblt/control/profile.hpp"
#include "umblt/solver/rte_solver.hpp"

namespace umblt {

/// Which equation a control solves.
///  Forward: θ·∇v + σv = ∫k v, data g on Γ−.
///  Adjoint: −θ·∇v + σv = ∫k v, data g on Γ+.
/// The two are related by θ ↦ −θ (see to_adjoint).
enum class ControlForm { Forward, Adjoint };

struct ControlResult {
  ControlForm form = ControlForm::Forward;
  Vec2 x0;
  AngularProfile h;
  BoundaryTrace g;
  AngularField v;
  std::vector<double> v_at_x0;
  std::vector<double> g_norms;  ///< ‖g_j‖_{L¹} per iteration
  std::vector<double> ratios;   ///< ‖g_{j+1}‖/‖g_j‖
  int iterations = 0;
  double achieved_error = 0.0;        ///< ‖v(x₀,·) − h‖∞
  double pre_correction_error = 0.0;  ///< before any refinement step
  double norm_constant = 0.0;         ///< (‖v‖_{1,∞} + ‖g‖_{1,∞}) / ‖h‖_{L¹}
  double tau_a = 0.0;
  double growth = 0.0;                ///< propagation growth constant, 0 if unused
  std::string method;
};

struct ControlOptions {
  double tol = 1e-8;
  int max_iter = 500;
  /// control_point: refinement passes that re-run the propagation on the residual.
  int max_refine = 8;
  /// control_point: close the remaining residual with the angular family.
  bool polish = true;
  /// Propagation ring spacing; ≤ 0 means the solver grid spacing.
  double ring_spacing = 0.0;
  /// Target a·Δ per annulus.
  double a_delta = 0.5;
};

/// Σ_d w_d max_a |v(x_a, θ_d)|.
double norm_1_inf(const AngularField& v, const DirectionSet& dirs);
double norm_1_inf(const BoundaryTrace& g);

/// Small-domain control: g₀ = h, w_j solves the forward form with angular data
/// g_j, g_{j+1} = g_j − w_j(x₀,·); then v = Σw_j, g = Σg_j and
/// v(x₀,·) = h − g_{J+1}. Requires τa < 1/2 with τ the domain diameter.
ControlResult control_small(const RteSolver& solver, Vec2 x0, const AngularProfile& h,
                            const ControlOptions& opts = {});

/// Point control on any admissible medium. Delegates to control_small when
/// τa < 1/2; otherwise controls a ball of radius < 1/(4a) about x₀, extends the
/// solution by annulus propagation to a ball covering X and restricts it to Γ− of X.
ControlResult control_point(const RteSolver& solver, Vec2 x0, const AngularProfile& h,
                            const ControlOptions& opts = {});

/// Forward-form result relabeled θ ↦ −θ: v'(x,θ) = v(x,−θ), g' = reverse_trace(g) on Γ+,
/// h'(θ) = h(−θ).
ControlResult to_adjoint(const ControlResult& r, const DirectionSet& dirs);

/// Re-solves from r.g and returns max |v_resolved − r.v|.
double control_consistency(const RteSolver& solver, const ControlResult& r);

}  // namespace umblt
