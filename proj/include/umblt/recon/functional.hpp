#pragma once

#include <complex>
#include <vector>

#include "umblt/measure/measurement.hpp"
#include "umblt/solver/rte_solver.hpp"

namespace umblt {

enum class FunctionalProvenance { Direct, Reduced, FromMeasurements };

const char* to_string(FunctionalProvenance p);

/// H_v on the grid together with its lattice transform
///   Ĥ(q_k) = h² Σ_x H(x) e^{i q_k·x},
/// stored at box index (k_y mod n_y)·n_x + (k_x mod n_x).
struct InternalFunctional {
  ScalarField H;
  QLattice lattice;
  std::vector<std::complex<double>> spectrum;
  FunctionalProvenance provenance = FunctionalProvenance::Reduced;
  double eps = 0.0;  ///< measurement level; its O(ε) bias is inherited

  std::complex<double> at(int kx, int ky) const;
};

/// θ·∇u at every node: backward difference (u(x) − u(x − hθ))/h, or the
/// forward one when x − hθ leaves X.
AngularField upwind_gradient(const AngularField& u, const DirectionSet& dirs);

/// Σ_d w_d v(x,θ_d) (θ_d·∇u)(x,θ_d) with the upwind gradient.
ScalarField functional_reduced(const AngularField& u, const AngularField& v, const DirectionSet& dirs);

/// Σ_d w_d v [S − σu + ∫k u] with S from the solver's medium, after checking that
/// u solves the forward problem with inflow f₋ (zero when null):
/// integral_residual ≤ gate, gate ≤ 0 meaning 100·rtol.
ScalarField functional_direct(const RteSolver& solver, const AngularField& u, const AngularField& v,
                              const BoundaryTrace* f_minus = nullptr, double gate = 0.0);

/// Lattice transform of H, truncated to the lattice's extent (half_space is ignored).
std::vector<std::complex<double>> forward_transform(const ScalarField& H, const QLattice& lattice);
/// Inverse of forward_transform on an untruncated lattice; real part.
ScalarField inverse_transform(const std::vector<std::complex<double>>& spectrum, const QLattice& lattice,
                              const GridPtr& grid);

InternalFunctional make_functional(ScalarField H, const QLattice& lattice, FunctionalProvenance p);

/// Σ_d weight(d) Σ_j a(d,j) b(d,j): the ∫∫ a b |θ·n| pairing on one side.
double boundary_pairing(const BoundaryTrace& a, const BoundaryTrace& b);

/// H_v from Λ^ε: P(q,φ) = pairing of Λ^ε(q,φ) with g = v|Γ+, Ĥ(q) = P(q,0) − iP(q,π/2)
/// (the sine phase is −sin(q·x)), conjugate fill for the omitted half of the
/// lattice, then the inverse transform. Throws ValidationError when a lattice
/// point or its φ partner is absent or failed, or when the grid does not match.
InternalFunctional functional_from_measurements(const MeasurementSet& mset, const BoundaryTrace& g_plus,
                                                const GridPtr& grid);
/// Same for several Γ+ data sharing one pass over the traces.
std::vector<InternalFunctional> functional_from_measurements(const MeasurementSet& mset,
                                                             const std::vector<BoundaryTrace>& g_plus,
                                                             const GridPtr& grid);

}  // namespace umblt
