#pragma once

#include <Eigen/Dense>
#include <vector>

#include "umblt/control/control.hpp"

namespace umblt {

/// Controls with angular-only boundary data g(θ) = Σ_j c_j e_j(θ), where e_j is
/// 1 on every Γ− sample of direction j. Basis field V_j solves the forward form
/// with data e_j, so v(x₀,θ_i) = Σ_j E(x₀)_{ij} c_j and a control for h is
/// c = E(x₀)⁻¹h. Adjoint basis: V^adj_j(x,θ_i) = V_{opp j}(x,θ_{opp i}) with
/// Γ+ data e_j.
class AngularControlFamily {
 public:
  explicit AngularControlFamily(const RteSolver& solver);

  const RteSolver& solver() const { return s_; }
  int size() const { return static_cast<int>(basis_.size()); }
  /// Forward-form basis field.
  const AngularField& basis(int j) const { return basis_[j]; }
  /// E at active node a.
  Eigen::MatrixXd response_at_node(int a, ControlForm form) const;
  /// E at an arbitrary interior point, by characteristic evaluation.
  Eigen::MatrixXd response_at(Vec2 x, ControlForm form) const;
  /// Boundary data Σ_j c_j e_j on Γ− (forward) or Γ+ (adjoint).
  BoundaryTrace boundary_data(const Eigen::VectorXd& c, ControlForm form) const;
  /// Σ_j c_j V_j in the requested form.
  AngularField field(const Eigen::VectorXd& c, ControlForm form) const;

  /// Exact control in the family, v(x₀,·) = h up to the conditioning of E(x₀).
  ControlResult control(Vec2 x0, const AngularProfile& h, ControlForm form = ControlForm::Forward) const;

  /// Largest over smallest singular value of E at active node a.
  double condition(int a, ControlForm form) const;

 private:
  const RteSolver& s_;
  std::vector<AngularField> basis_;
};

}  // namespace umblt
