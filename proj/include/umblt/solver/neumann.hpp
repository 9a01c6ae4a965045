#pragma once

#include <string>
#include <vector>

#include "umblt/core/certificate.hpp"
#include "umblt/solver/transport_operator.hpp"

namespace umblt {

struct SolveReport {
  int iterations = 0;
  double final_update = 0.0;
  std::vector<double> update_norms;  ///< ‖x_k − x_{k−1}‖∞ per iteration
  std::vector<double> ratios;        ///< update_norms[k] / update_norms[k−1]
  bool converged = false;
  CertificateMode mode = CertificateMode::Absorption;
  double contraction_bound = 0.0;
};

struct IterationControl {
  double rtol = 1e-10;
  double atol = 1e-14;
  int max_iter = 0;           ///< 0: 10·⌈log rtol / log q⌉
  double contraction = 0.5;   ///< certified q, used for the cap
  CertificateMode mode = CertificateMode::Absorption;
  int workers = 1;
};

/// Per-lane problem data for the block iteration
///   x ← b + T₁⁻¹[ Σx + ε c (Σx − σx) ],
/// which is the Neumann iteration for the medium (σ, k) perturbed by 1 + εc.
struct LaneSpec {
  double eps = 0.0;
  const std::vector<double>* modulation = nullptr;  ///< nodal c(x); ignored when eps == 0
  /// Stopping rule scale·‖Δx‖ ≤ rtol·‖base + scale·x‖ + atol; base null means ‖x‖.
  const AngularField* base = nullptr;
  double scale = 1.0;
};

/// Iteration cap for a contraction factor q and target rtol.
int iteration_cap(double rtol, double q);

/// Runs all lanes to their own stopping rule; converged lanes are frozen, so a
/// lane's result does not depend on the other lanes in the block.
/// x holds the initial guess on entry. Throws NumericalError on non-contraction
/// (update ratio ≥ 1 three times in a row) or when the cap is reached.
std::vector<SolveReport> neumann_block(const TransportOperator& T, const ScatteringOperator& K,
                                       const ScalarField& sigma, const BlockField& b, BlockField& x,
                                       const std::vector<LaneSpec>& lanes, const IterationControl& ctl);

}  // namespace umblt
