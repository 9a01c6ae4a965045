#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "umblt/solver/rte_solver.hpp"

namespace umblt {

struct OracleCheck {
  std::string name;
  double value = 0.0;      ///< measured discrepancy
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

/// Tiny random medium on a ≤ 5×5 grid with 8 directions. Absorption instances
/// live on the unit disk with σ > ρ; smallness instances on a 0.5 × 0.4
/// rectangle with σ < ρ and τρ < 1.
OpticalMedium random_tiny_medium(std::mt19937_64& rng, bool absorption, const DirectionSet& dirs);

/// Dense and closed-form checks on tiny instances:
///  forward and adjoint solves against dense direct solves, constant transparent
///  media against the chord formula, Λ^ε against the dense modulated system,
///  the k ≡ 0 harmonic series against its closed form, functional_direct
///  against a dense quadrature and the lattice transform round trip.
std::vector<OracleCheck> run_oracle_suite(std::uint64_t seed, int instances = 20);

/// Fixed-width pass/fail table.
std::string oracle_table(const std::vector<OracleCheck>& checks);

}  // namespace umblt
