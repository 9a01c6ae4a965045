#pragma once

#include <complex>
#include <vector>

#include "umblt/core/boundary.hpp"
#include "umblt/core/fields.hpp"
#include "umblt/core/kernel.hpp"

namespace umblt {

/// Series solution of θ·∇v + σv = ∫k v for constant σ and k in two dimensions:
///   v(x,t) = Σ_{n=m}^{m+N} a_n ζ^{n−m} e^{int},  ζ = z̄ − z̄₀,
///   a_m = 1,  a_{n+1} = a_n (λ_n − σ)/(n+1−m),  λ_n = ∫k(γ)e^{−inγ}dγ.
/// Each v_n depends on z̄ only, so θ·∇ = e^{−it}∂_z̄ on it and the harmonic
/// balance ∂_z̄ v_{n+1} = (λ_n − σ)v_n holds term by term; v(x₀,t) = e^{imt}.
/// Truncation leaves the single residual (σ − λ_{m+N}) v_{m+N} e^{i(m+N)t}.
class FourierControl {
 public:
  using Complex = std::complex<double>;

  /// radius bounds |z − z₀| over the working domain. N < 0 selects the smallest
  /// N with (C·radius)^N/N! < tol, C = max_n |λ_n − σ|.
  FourierControl(double sigma, const ScatteringKernel& kernel, Vec2 x0, int m, double radius, int N = -1,
                 double tol = 1e-12);

  int m() const { return m_; }
  int truncation() const { return N_; }
  double growth_constant() const { return C_; }
  /// (C·radius)^N/N!.
  double tail_bound() const { return tail_; }
  double eigenvalue(int n) const;
  /// a_n; zero outside [m, m+N].
  double coefficient(int n) const;
  /// v_n at x.
  Complex harmonic(int n, Vec2 x) const;
  Complex value(Vec2 x, double t) const;
  /// θ·∇v from the series, term by term.
  Complex directional_derivative(Vec2 x, double t) const;
  /// θ·∇v + σv − ∫k v of the truncated series, in closed form.
  Complex truncation_residual(Vec2 x, double t) const;
  /// Bound on |truncation_residual| over the disk of `radius`.
  double residual_bound() const;

  /// Real (or imaginary) part sampled on a grid for an ordered direction set.
  AngularField field(const GridPtr& grid, const DirectionSet& dirs, bool imaginary = false) const;
  BoundaryTrace trace(const SamplingPtr& sampling, BoundarySide side, bool imaginary = false) const;

 private:
  Complex zeta(Vec2 x) const { return {x.x - x0_.x, -(x.y - x0_.y)}; }

  double sigma_;
  Vec2 x0_;
  int m_;
  int N_;
  double radius_;
  double C_ = 0.0;
  double tail_ = 0.0;
  std::vector<double> lambda_;  // λ_n, n = m..m+N
  std::vector<double> a_;       // a_n, n = m..m+N
};

/// Real part of the series on a grid, with the truncation chosen by the rule above.
AngularField fourier_control_2d(double sigma, const ScatteringKernel& kernel, Vec2 x0, int m, const GridPtr& grid,
                                const DirectionSet& dirs, int N = -1);

}  // namespace umblt
