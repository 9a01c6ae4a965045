#pragma once

#include <string>

#include "umblt/core/medium.hpp"

namespace umblt {

enum class CertificateMode { Absorption, Smallness };

/// Sufficient condition for contraction of the Neumann iteration.
struct SubcriticalityCertificate {
  CertificateMode mode = CertificateMode::Absorption;
  double rho = 0.0;        ///< max_x ∫ k(x, θ·θ′) dθ′ on the quadrature
  double alpha = 0.0;      ///< absorption margin min σ − ρ (Absorption only)
  double tau = 0.0;        ///< domain diameter
  double min_sigma = 0.0;
  double max_sigma = 0.0;
  double a = 0.0;          ///< ρ + max |σ|, growth constant of the control and propagation bounds

  /// Bound on ‖K‖∞ for the iteration operator: ρ/(ρ+α) or τρ.
  double contraction() const;
  std::string mode_name() const;
};

/// Throws ValidationError on negative coefficients, NumericalError if neither mode holds.
SubcriticalityCertificate validate_subcriticality(const OpticalMedium& medium, const DirectionSet& dirs);

}  // namespace umblt
