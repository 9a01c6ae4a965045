#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "umblt/solver/rte_solver.hpp"

namespace umblt {

/// Coefficients evaluable anywhere in the plane, including outside the grid's
/// domain (a covering ball of X usually leaves X).
struct PointMedium {
  std::function<double(Vec2)> sigma;
  std::function<double(Vec2)> amplitude;
  ScatteringKernel kernel;

  /// Model functions when present, otherwise clamped bilinear interpolation of the fields.
  static PointMedium of(const OpticalMedium& m);
};

/// Data used on lines that miss the inner disk of an annulus.
///  Extrapolate: the inner-ring value at the closest approach of the line,
///    moved across the line onto the inner circle (exact when u varies only along θ).
///  Zero: no incoming data where the line enters the outer circle.
/// Either choice extends a solution; Extrapolate stays continuous at tangency.
enum class MissData { Extrapolate, Zero };

struct PropagationOptions {
  double a_delta = 0.5;       ///< target a·Δ with Δ the longest chord inside an annulus
  /// First ring radius over the inner disk radius. Below 1 its tangent lines are
  /// interior chords of the inner solution rather than grazing ones.
  double start_fraction = 0.9;
  double ring_spacing = 0.0;  ///< arc spacing of ring points; ≤ 0 means the inner grid spacing
  int quad_order = 4;         ///< Gauss–Legendre points per piece of length ≤ ring spacing
  double rtol = 1e-12;        ///< fixed-point tolerance per annulus, relative to max |u| so far
  int max_iter = 200;         ///< fixed-point sweeps per annulus before Δ is halved
  int max_halvings = 8;
  int max_annuli = 200000;
  double residual_gate = 10.0;  ///< input integral defect allowed, in units of the inner rtol
  MissData miss = MissData::Extrapolate;
};

struct PropagationReport {
  int annuli = 0;
  int sweeps = 0;
  int halvings = 0;
  double max_a_delta = 0.0;
  double max_ratio = 0.0;       ///< largest fixed-point update ratio observed
  double growth = 0.0;          ///< max |u| over all rings / max |u| on the inner circle
  double input_residual = 0.0;  ///< integral defect of the inner solution
};

/// Forward-form solution on a ball about the inner disk's center: the inner
/// solution inside the disk, and concentric rings of values outside, each
/// annulus solved by the characteristic formula with Q = −σu + ∫k u.
class PolarField {
 public:
  Vec2 center() const { return c_; }
  /// Radius of the disk where the inner solution is used directly.
  double inner_radius() const { return r1_; }
  double outer_radius() const { return radii_.back(); }
  int rings() const { return static_cast<int>(radii_.size()); }
  double radius(int k) const { return radii_[k]; }
  int ring_points(int k) const { return m_[k]; }
  int n_dir() const { return nd_; }
  const PropagationReport& report() const { return rep_; }
  /// All directions at x; throws outside the outer ring.
  std::vector<double> evaluate(Vec2 x) const;
  double evaluate(Vec2 x, int d) const;
  /// Values at the active nodes of a grid whose domain lies in the outer ring.
  AngularField to_grid(const GridPtr& grid) const;
  /// Samples of the field on a sampling's Γ− (or Γ+) points.
  BoundaryTrace trace(const SamplingPtr& sampling, BoundarySide side) const;
  /// max over points and directions of |D_θu + σu − ∫k u| / max |u|, with D_θ the
  /// central difference of step delta along the characteristic.
  double characteristic_residual(const std::vector<Vec2>& points, double delta) const;
  /// Stored ring values, index i·n_dir + d.
  const std::vector<double>& ring_values(int k) const { return u_[k]; }

 private:
  friend PolarField propagate(std::shared_ptr<const RteSolver>, const AngularField&, const BoundaryTrace&,
                              const PointMedium&, double, double, const PropagationOptions&);
  struct Term {
    int i;
    double c;
  };
  // Characteristic formula at y for direction d in annulus k (radii k, k+1):
  // value = Σ endpoint terms on ring k + Σ Q terms on rings k and k+1.
  void formula(int k, double r_out, int m_out, Vec2 y, int d, std::vector<Term>& end, std::vector<Term>& q_in,
               std::vector<Term>& q_out) const;
  double annulus_value(int k, Vec2 y, int d) const;
  std::vector<double> collision(Vec2 x, const std::vector<double>& u) const;

  Vec2 c_;
  int nd_ = 0;
  DirectionSet dirs_;
  PointMedium med_;
  PropagationOptions opts_;
  PropagationReport rep_;
  double spacing_ = 0.0;
  double r1_ = 0.0;
  std::vector<double> radii_;
  std::vector<int> m_;
  std::vector<std::vector<double>> u_, q_;  // per ring, index i·nd + d
  std::vector<double> wrow_;
  std::shared_ptr<const RteSolver> inner_;
  AngularField v1_, q1_;  // q1_ = ∫k v1, cached for point evaluation
  BoundaryTrace f1_;
};

/// Extends the forward-form solution v1 (inflow data f1) on the disk of
/// `inner` to a ball of radius ≥ outer_radius about the same center. Each
/// annulus has longest interior chord Δ with a·Δ ≤ a_delta; Δ is halved when
/// the fixed point stops contracting. Throws ValidationError when v1 fails the
/// residual gate, NumericalError when the schedule exceeds its budget.
PolarField propagate(std::shared_ptr<const RteSolver> inner, const AngularField& v1, const BoundaryTrace& f1,
                     const PointMedium& medium, double outer_radius, double a,
                     const PropagationOptions& opts = {});

}  // namespace umblt
