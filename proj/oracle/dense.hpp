#pragma once

#include <Eigen/Dense>

#include "umblt/solver/rte_solver.hpp"

namespace umblt::oracle {

/// Unknown index of u(x_a, θ_d) in dense vectors.
inline int dense_index(const RteSolver& s, int d, int a) { return d * s.grid()->active_count() + a; }

/// Dense K with u = b + K u equivalent to the discrete integral system, i.e.
/// K = T₁⁻¹ Σ where Σ is the discrete scattering operator.
Eigen::MatrixXd iteration_matrix(const RteSolver& s);

/// Direct solve of (I − K) u = J f₋ + T₁⁻¹ S (partial-pivot LU).
AngularField dense_forward(const RteSolver& s, const ScalarField& S, const BoundaryTrace& f_minus);

/// Direct solve of the reversed system for −θ·∇v + σv = ∫kv, v|Γ+ = f₊.
AngularField dense_adjoint(const RteSolver& s, const BoundaryTrace& f_plus);

/// Dense T₁⁻¹ (volume rows) and Σ on the (d, a) unknowns.
Eigen::MatrixXd transport_matrix(const RteSolver& s);
Eigen::MatrixXd scattering_matrix(const RteSolver& s);
/// Dense Γ+ trace rows: samples × unknowns, collision density to outflow.
Eigen::MatrixXd trace_matrix(const RteSolver& s);

Eigen::VectorXd to_dense(const RteSolver& s, const AngularField& f);
AngularField from_dense(const RteSolver& s, const Eigen::VectorXd& v);

/// Direct solve of w = T₁⁻¹[cR₀ + Σw + εc(Σw − σw)] with R₀ from a dense
/// unmodulated solve; returns w and its Γ+ trace. ε = 0 is the linearized response.
struct DenseMeasurement {
  AngularField w;
  BoundaryTrace trace;
};
DenseMeasurement dense_measurement(const RteSolver& s, const std::vector<double>& pattern, double eps);

/// Closed form for k ≡ 0 with constant σ > 0 and S: (S/σ)(1 − e^{−στ−}).
double transparent_constant(double S, double sigma, double tau_minus);

}  // namespace umblt::oracle
