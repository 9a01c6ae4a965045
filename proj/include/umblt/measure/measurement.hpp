#pragma once

#include <string>
#include <vector>

#include "umblt/measure/modulation.hpp"
#include "umblt/solver/rte_solver.hpp"

namespace umblt {

/// One lattice frequency q = (2π k_x/(n_x h), 2π k_y/(n_y h)), k in [−n/2, n/2).
struct QPoint {
  int kx = 0, ky = 0;
  Vec2 q;
};

/// DFT frequencies of the grid's bounding box, S extended by zero outside X.
/// half_space keeps one of each ±k pair (real data determine the other);
/// extent ≥ 0 drops frequencies with max(|k_x|, |k_y|) > extent.
struct QLattice {
  int nx = 0, ny = 0;
  double h = 0.0;
  Vec2 origin;
  bool half_space = true;
  int extent = -1;

  static QLattice for_grid(const SpatialGrid& grid, bool half_space = true, int extent = -1);
  Vec2 frequency(int kx, int ky) const;
  /// Deterministic order: ky ascending, then kx ascending.
  std::vector<QPoint> points() const;
  bool contains(int kx, int ky) const;
  bool matches(const SpatialGrid& grid) const;
};

/// Λ^ε on the Γ+ samples for one wave (or the linearized limit when ε = 0).
struct MeasurementTrace {
  PlaneWave wave;
  int kx = 0, ky = 0;
  BoundaryTrace values;
  int iterations = 0;
  bool ok = false;
  std::string error;
};

struct MeasurementSet {
  double eps = 0.0;
  QLattice lattice;
  BoundaryTrace lambda0;
  /// Two per lattice point (φ = 0 then φ = π/2), in lattice order.
  std::vector<MeasurementTrace> traces;
  bool partial = false;

  const MeasurementTrace* find(int kx, int ky, bool sine) const;
};

/// Λ⁰ = u₀|Γ+ with u₀ the unmodulated solution and zero inflow.
BoundaryTrace lambda_zero(const RteSolver& solver);

/// Measurement synthesis for a fixed unmodulated solver.
///
/// w = (u_ε − u₀)/ε is solved for directly with the unmodulated T₁⁻¹:
///   w = T₁⁻¹[cR₀ + Σw + εc(Σw − σw)],  R₀ = S − σu₀ + Σu₀,  c = cos(q·x + φ),
/// which is the modulated equation minus the unmodulated one, divided by ε.
/// ε = 0 gives the linearized response. Waves are batched as block lanes.
class MeasurementEngine {
 public:
  explicit MeasurementEngine(const RteSolver& solver);

  const RteSolver& solver() const { return s_; }
  const AngularField& u0() const { return u0_; }
  const AngularField& r0() const { return r0_; }
  const BoundaryTrace& lambda0() const { return lambda0_; }

  /// result[level][wave]; the wave's own ε is ignored in favor of the level.
  /// Each level starts from the previous level's w of the same wave.
  /// Failures are recorded per trace, never thrown.
  std::vector<std::vector<MeasurementTrace>> measure(const std::vector<PlaneWave>& waves,
                                                     const std::vector<double>& eps_levels) const;
  MeasurementTrace measure(const PlaneWave& wave) const;

  /// w as an angular field; ε = 0 is the linearized response.
  AngularField response(const PlaneWave& wave) const;

 private:
  void check_modulated(const PlaneWave& wave) const;
  void run_batch(const std::vector<PlaneWave>& waves, const std::vector<int>& idx, double eps,
                 std::vector<AngularField>& warm, std::vector<MeasurementTrace>& out, bool keep_fields) const;

  const RteSolver& s_;
  AngularField u0_, r0_;
  BoundaryTrace lambda0_;
};

/// Λ^ε for one wave; throws NumericalError when the modulated medium is not certified.
MeasurementTrace lambda_eps(const RteSolver& solver, const PlaneWave& wave);

/// Exact ε → 0 limit of (u_ε − u₀)/ε: θ·∇u¹ + σu¹ − ∫ku¹ = c(S − σu₀ + ∫ku₀), zero inflow.
AngularField linearized_response(const RteSolver& solver, const PlaneWave& wave);

/// Λ^ε as the difference of two independent solves, each with its own
/// operators for the modulated and unmodulated media. Reference route only.
BoundaryTrace lambda_eps_two_solves(const OpticalMedium& medium, const DirectionSet& dirs,
                                    const SolverOptions& opts, const PlaneWave& wave);

/// Λ⁰ plus Λ^ε for both phases at every lattice point.
MeasurementSet sweep(const RteSolver& solver, const QLattice& lattice, double eps);

/// One set per ε level, sharing u₀ and warm starts. `points` restricts the
/// sweep to a subset of the lattice (possibly empty: Λ⁰ only).
std::vector<MeasurementSet> sweep_levels(const RteSolver& solver, const QLattice& lattice,
                                         const std::vector<double>& eps_levels,
                                         const std::vector<QPoint>* points = nullptr);

/// Waves in set order (φ = 0 then π/2 per point).
std::vector<PlaneWave> lattice_waves(const std::vector<QPoint>& points, double eps);

}  // namespace umblt
