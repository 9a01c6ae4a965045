#pragma once

#include <optional>
#include <string>
#include <vector>

#include "umblt/control/control.hpp"
#include "umblt/io/config.hpp"
#include "umblt/measure/measurement.hpp"

namespace umblt {

/// A measurement set on disk:
///   manifest.json   ε, q-lattice, grid and sampling metadata, one entry per trace
///                   (kx, ky, phase, file, sha256, iterations, ok, error)
///   lambda0.csv     Λ⁰
///   traces/q_<kx>_<ky>_<cos|sin>.csv
/// Failed traces are listed with ok = false and have no file.
Json write_measurement_set(const std::string& dir, const MeasurementSet& m, const RteSolver& solver);

/// Reads and checks a set against the solver's grid, directions and sampling.
/// Every file must match its recorded hash (ValidationError otherwise).
MeasurementSet read_measurement_set(const std::string& dir, const RteSolver& solver);

/// Level directories under a measure output, level_0, level_1, ... in ε order;
/// a directory whose manifest.json is itself a measurement set is a single level.
std::vector<std::string> measurement_levels(const std::string& dir);

struct MeasureStats {
  int computed_points = 0;  ///< lattice points swept in this run
  int reused_points = 0;    ///< lattice points whose traces were valid on every level
};

/// One set per ε level in dir/level_i. Existing traces are kept when their file
/// matches the recorded hash on every level; only the other lattice points are swept.
std::vector<MeasurementSet> measure_resumable(const RteSolver& solver, const QLattice& lattice,
                                              const std::vector<double>& eps_levels, const std::string& dir,
                                              MeasureStats* stats = nullptr);

/// Hash of everything a solve depends on: grid, directions, coefficients,
/// kernel and solver options. The source is included only when asked.
std::string medium_hash(const RteSolver& solver, bool with_source = false);

/// Forward-form point controls keyed by (medium, x₀, profile, tolerance).
/// An entry stores g on Γ−; a hit re-solves v from it.
class ControlCache {
 public:
  explicit ControlCache(std::string dir) : dir_(std::move(dir)) {}

  std::string key(const RteSolver& s, Vec2 x0, const AngularProfile& h, double tol) const;
  std::optional<ControlResult> load(const RteSolver& s, Vec2 x0, const AngularProfile& h, double tol) const;
  void store(const RteSolver& s, const ControlResult& r, double tol) const;

 private:
  std::string dir_;
};

}  // namespace umblt
