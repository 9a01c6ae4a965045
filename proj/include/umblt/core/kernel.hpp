#pragma once

#include <optional>
#include <string>
#include <vector>

#include "umblt/core/quadrature.hpp"

namespace umblt {

/// Phase function k(θ·θ′) written as a function of the angle difference γ.
///
/// A Fourier kernel carries coefficients c_n (n ≥ 0) with
/// k(γ) = c_0 + 2 Σ_{n≥1} c_n cos(nγ). Its angular eigenvalues are
/// ∫ k(t − t′) e^{int′} dt′ = 2π c_n e^{int}.
class ScatteringKernel {
 public:
  ScatteringKernel() : coeffs_(std::vector<double>{0.0}) {}
  static ScatteringKernel isotropic(double value);
  static ScatteringKernel fourier(std::vector<double> coeffs);
  /// Values at angle differences gamma ∈ [0, π], increasing; linear in between.
  static ScatteringKernel tabulated(std::vector<double> gamma, std::vector<double> values);
  /// Two-dimensional Henyey–Greenstein kernel with unit mass, truncated at n_terms harmonics.
  static ScatteringKernel henyey_greenstein(double g, int n_terms);

  double operator()(double gamma) const;
  /// The same kernel scaled by s.
  ScatteringKernel scaled(double s) const;
  /// Scaled so that Σ_j w_j k(t_i − t_j) = 1 on the given quadrature.
  ScatteringKernel normalized(const DirectionSet& dirs) const;

  /// row[m] = k(t_m − t_0) on the quadrature.
  std::vector<double> circulant_row(const DirectionSet& dirs) const;
  /// Σ_j w_j k(t_i − t_j), identical for every i.
  double quadrature_mass(const DirectionSet& dirs) const;
  /// Exact angular eigenvalue for the harmonic e^{int}.
  double eigenvalue(int n) const;

  const std::optional<std::vector<double>>& fourier_coeffs() const { return coeffs_; }
  bool is_isotropic() const;
  double min_value() const;
  std::string describe() const;

 private:
  std::optional<std::vector<double>> coeffs_;
  std::vector<double> gamma_, values_;
};

}  // namespace umblt
