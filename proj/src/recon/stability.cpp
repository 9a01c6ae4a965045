#include "umblt/recon/stability.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include "umblt/core/errors.hpp"

namespace umblt {

namespace {

int kmin(int n) { return -(n / 2); }
int canon(int m, int n) { return ((m - kmin(n)) % n + n) % n + kmin(n); }

double trace_distance(const BoundaryTrace& a, const BoundaryTrace& b) {
  if (a.size() != b.size()) throw ValidationError("traces differ in size");
  double m = 0.0;
  for (int k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

std::vector<BoundaryTrace> indicators(const RteSolver& s) {
  const int nd = s.directions().size();
  std::vector<BoundaryTrace> gs;
  for (int j = 0; j < nd; ++j) {
    std::vector<double> e(nd, 0.0);
    e[j] = 1.0;
    gs.push_back(BoundaryTrace::angular(BoundarySide::GammaPlus, s.sampling(), e));
  }
  return gs;
}

}  // namespace

double lambda_eps_distance(const MeasurementSet& m1, const MeasurementSet& m2) {
  const QLattice& l = m1.lattice;
  const QLattice& l2 = m2.lattice;
  if (l.nx != l2.nx || l.ny != l2.ny || l.h != l2.h || l.half_space != l2.half_space || l.extent != l2.extent)
    throw ValidationError("measurement sets use different q-lattices");
  std::map<std::tuple<int, int, bool>, const MeasurementTrace*> other;
  for (const auto& t : m2.traces) other[{t.kx, t.ky, t.wave.is_sine()}] = &t;
  const double cell = (2.0 * std::numbers::pi / (l.nx * l.h)) * (2.0 * std::numbers::pi / (l.ny * l.h));
  double sum = 0.0;
  for (const auto& t : m1.traces) {
    auto it = other.find({t.kx, t.ky, t.wave.is_sine()});
    if (it == other.end() || !t.ok || !it->second->ok)
      throw ValidationError("measurement sets do not cover the same valid traces");
    const bool self = canon(-t.kx, l.nx) == t.kx && canon(-t.ky, l.ny) == t.ky;
    const double mult = (l.half_space && !self) ? 2.0 : 1.0;
    sum += mult * trace_distance(t.values, it->second->values);
  }
  return sum * cell;
}

StabilityReport stability_from_sets(const MeasurementSet& m1, const MeasurementSet& m2, const ScalarField& S1,
                                    const ScalarField& S2, const AngularControlFamily& family) {
  const RteSolver& s = family.solver();
  StabilityReport r;
  r.eps = m1.eps;
  if (m1.eps != m2.eps) throw ValidationError("measurement sets use different ε");
  r.source_diff = max_abs_diff(S1, S2);
  r.lambda0_diff = trace_distance(m1.lambda0, m2.lambda0);
  r.lambda_eps_diff = lambda_eps_distance(m1, m2);
  const auto gs = indicators(s);
  const auto H1 = functional_from_measurements(m1, gs, s.grid());
  const auto H2 = functional_from_measurements(m2, gs, s.grid());
  for (size_t j = 0; j < gs.size(); ++j) r.functional_diff = std::max(r.functional_diff, max_abs_diff(H1[j].H, H2[j].H));
  if (r.source_diff > 0.0) {
    r.measurement_constant = (r.lambda0_diff + r.lambda_eps_diff) / r.source_diff;
    r.functional_constant = (r.functional_diff + r.lambda0_diff) / r.source_diff;
  }
  return r;
}

StabilityReport stability_probe(const RteSolver& base, const ScalarField& S1, const ScalarField& S2, double eps,
                                const QLattice& lattice, const AngularControlFamily& family) {
  auto sweep_with = [&](const ScalarField& S) {
    RteSolver s(base.medium().with_source(S), base.directions(), base.options());
    return sweep(s, lattice, eps);
  };
  const MeasurementSet m1 = sweep_with(S1);
  const MeasurementSet m2 = sweep_with(S2);
  return stability_from_sets(m1, m2, S1, S2, family);
}

ScalarField random_smooth_source(const GridPtr& grid, std::mt19937_64& rng) {
  const Domain& dom = grid->domain();
  const Vec2 c = dom.center();
  const double R = std::min(dom.half_width({1.0, 0.0}), dom.half_width({0.0, 1.0}));
  std::uniform_real_distribution<double> U(0.0, 1.0);
  struct Blob {
    Vec2 c;
    double w, amp;
  };
  const double offset = U(rng);
  std::vector<Blob> blobs;
  for (int i = 0; i < 3; ++i) {
    const double r = 0.6 * R * std::sqrt(U(rng)), t = 2.0 * std::numbers::pi * U(rng);
    blobs.push_back({c + Vec2{r * std::cos(t), r * std::sin(t)}, R * (0.15 + 0.25 * U(rng)), 2.0 * U(rng) - 1.0});
  }
  return ScalarField::sample(grid, [=](Vec2 x) {
    double v = offset;
    for (const Blob& b : blobs) {
      const Vec2 d = x - b.c;
      v += b.amp * std::exp(-dot(d, d) / (2.0 * b.w * b.w));
    }
    return v;
  });
}

StabilityBatch stability_batch(const RteSolver& base, int pairs, double eps, std::uint64_t seed,
                               const QLattice& lattice, const AngularControlFamily& family, double max_spread) {
  if (pairs < 1) throw ValidationError("stability batch needs at least one pair");
  std::mt19937_64 rng(seed);
  auto sweep_with = [&](const ScalarField& S) {
    RteSolver s(base.medium().with_source(S), base.directions(), base.options());
    return sweep(s, lattice, eps);
  };
  StabilityBatch b;
  double mmin = INFINITY, mmax = 0.0, fmin = INFINITY, fmax = 0.0;
  for (int p = 0; p < pairs; ++p) {
    const ScalarField S1 = random_smooth_source(base.grid(), rng);
    const ScalarField S2 = random_smooth_source(base.grid(), rng);
    const MeasurementSet m1 = sweep_with(S1), m2 = sweep_with(S2);
    b.reports.push_back(stability_from_sets(m1, m2, S1, S2, family));
    const StabilityReport& r = b.reports.back();
    mmin = std::min(mmin, r.measurement_constant);
    mmax = std::max(mmax, r.measurement_constant);
    fmin = std::min(fmin, r.functional_constant);
    fmax = std::max(fmax, r.functional_constant);
    if (p == 0) {
      ScalarField S3 = S1;
      for (int a = 0; a < S3.size(); ++a) S3[a] += 2.0 * S2[a];
      const MeasurementSet m3 = sweep_with(S3);
      double e = 0.0, scale = 0.0;
      for (size_t t = 0; t < m3.traces.size(); ++t)
        for (int k = 0; k < m3.traces[t].values.size(); ++k) {
          const double comb = m1.traces[t].values.values()[k] + 2.0 * m2.traces[t].values.values()[k];
          e = std::max(e, std::abs(m3.traces[t].values.values()[k] - comb));
          scale = std::max(scale, std::abs(comb));
        }
      b.linearity_error = scale > 0.0 ? e / scale : e;
    }
  }
  b.measurement_C = mmin;
  b.functional_C = fmin;
  b.measurement_spread = mmin > 0.0 ? mmax / mmin : INFINITY;
  b.functional_spread = fmin > 0.0 ? fmax / fmin : INFINITY;
  b.measurement_holds = mmin > 0.0 && b.measurement_spread <= max_spread;
  b.functional_holds = fmin > 0.0 && b.functional_spread <= max_spread;
  for (const auto& r : b.reports) {
    b.measurement_holds = b.measurement_holds && b.measurement_C * r.source_diff <= r.lambda0_diff + r.lambda_eps_diff;
    b.functional_holds = b.functional_holds && b.functional_C * r.source_diff <= r.functional_diff + r.lambda0_diff;
  }
  return b;
}

}  // namespace umblt
