#include "umblt/measure/measurement.hpp"

#include <algorithm>

#include "umblt/core/errors.hpp"

namespace umblt {

namespace {
constexpr int kBatch = 8;
}

BoundaryTrace lambda_zero(const RteSolver& solver) {
  Solution u0 = solver.solve_forward();
  return solver.outflow(u0.u, solver.medium().source, nullptr);
}

MeasurementEngine::MeasurementEngine(const RteSolver& solver) : s_(solver) {
  u0_ = s_.solve_forward().u;
  lambda0_ = s_.outflow(u0_, s_.medium().source, nullptr);
  // R₀ = S − σu₀ + Σu₀ = θ·∇u₀.
  r0_ = s_.apply_scattering(u0_);
  const auto& sig = s_.medium().sigma;
  const auto& S = s_.medium().source;
  for (int d = 0; d < r0_.n_dir(); ++d) {
    auto r = r0_.direction(d);
    auto u = u0_.direction(d);
    for (int a = 0; a < r0_.n_nodes(); ++a) r[a] += S[a] - sig[a] * u[a];
  }
}

void MeasurementEngine::check_modulated(const PlaneWave& wave) const {
  wave.validate();
  if (wave.eps == 0.0) return;
  validate_subcriticality(modulate(s_.medium(), wave), s_.directions());
}

void MeasurementEngine::run_batch(const std::vector<PlaneWave>& waves, const std::vector<int>& idx, double eps,
                                  std::vector<AngularField>& warm, std::vector<MeasurementTrace>& out,
                                  bool keep_fields) const {
  const int L = static_cast<int>(idx.size());
  const int nd = s_.directions().size(), na = s_.grid()->active_count();
  const auto& T = s_.transport();
  const auto& K = s_.scattering();
  const auto& sig = s_.medium().sigma;

  std::vector<std::vector<double>> c(L);
  BlockField cr(nd, na, L), b(nd, na, L), x(nd, na, L);
  for (int l = 0; l < L; ++l) {
    c[l] = modulation_pattern(*s_.grid(), waves[idx[l]]);
    for (int d = 0; d < nd; ++d)
      for (int a = 0; a < na; ++a) cr.at(d, a, l) = c[l][a] * r0_.at(d, a);
    if (warm[idx[l]].size() == static_cast<size_t>(nd) * na) x.set_lane(l, warm[idx[l]]);
  }
  T.apply_block(cr, b, s_.workers());

  std::vector<LaneSpec> lanes(L);
  for (int l = 0; l < L; ++l) {
    lanes[l].eps = eps;
    lanes[l].modulation = &c[l];
    // For ε > 0 the tolerance is relative to u_ε = u₀ + εw, as for a direct solve.
    lanes[l].base = eps > 0.0 ? &u0_ : nullptr;
    lanes[l].scale = eps > 0.0 ? eps : 1.0;
  }
  std::vector<SolveReport> rep;
  try {
    rep = neumann_block(T, K, sig, b, x, lanes, s_.iteration_control());
  } catch (const NumericalError& e) {
    if (L == 1) {
      out[idx[0]].ok = false;
      out[idx[0]].error = e.what();
      return;
    }
    for (int i : idx) run_batch(waves, {i}, eps, warm, out, keep_fields);
    return;
  }

  // Γ+ trace of T₁⁻¹[cR₀ + Σw + εc(Σw − σw)].
  BlockField q(nd, na, L);
  if (!K.zero()) K.apply_block(x, q);
  for (int d = 0; d < nd; ++d)
    for (int a = 0; a < na; ++a)
      for (int l = 0; l < L; ++l) {
        double& v = q.at(d, a, l);
        const double sw = v;
        v = cr.at(d, a, l) + sw;
        if (eps != 0.0) v += eps * c[l][a] * (sw - sig[a] * x.at(d, a, l));
      }
  BlockTrace bt;
  T.trace_block(q, bt);
  for (int l = 0; l < L; ++l) {
    MeasurementTrace& t = out[idx[l]];
    t.values = BoundaryTrace(BoundarySide::GammaPlus, s_.sampling());
    auto& v = t.values.values();
    for (int k = 0; k < bt.samples; ++k) v[k] = bt.v[static_cast<size_t>(k) * L + l];
    t.iterations = rep[l].iterations;
    t.ok = true;
    t.error.clear();
    if (keep_fields) {
      if (warm[idx[l]].size() == 0) warm[idx[l]] = AngularField(s_.grid(), nd);
      x.get_lane(l, warm[idx[l]]);
    }
  }
}

std::vector<std::vector<MeasurementTrace>> MeasurementEngine::measure(const std::vector<PlaneWave>& waves,
                                                                      const std::vector<double>& levels) const {
  const int n = static_cast<int>(waves.size());
  std::vector<std::vector<MeasurementTrace>> res(levels.size(), std::vector<MeasurementTrace>(n));
  std::vector<AngularField> warm(n);
  for (size_t li = 0; li < levels.size(); ++li) {
    std::vector<int> todo;
    for (int i = 0; i < n; ++i) {
      MeasurementTrace& t = res[li][i];
      t.wave = waves[i];
      t.wave.eps = levels[li];
      try {
        check_modulated(t.wave);
        todo.push_back(i);
      } catch (const std::exception& e) {
        t.ok = false;
        t.error = e.what();
      }
    }
    std::vector<PlaneWave> lw(n);
    for (int i = 0; i < n; ++i) lw[i] = res[li][i].wave;
    const bool keep = li + 1 < levels.size();
    for (size_t s = 0; s < todo.size(); s += kBatch) {
      std::vector<int> idx(todo.begin() + s, todo.begin() + std::min(todo.size(), s + kBatch));
      run_batch(lw, idx, levels[li], warm, res[li], keep);
    }
  }
  return res;
}

MeasurementTrace MeasurementEngine::measure(const PlaneWave& wave) const {
  return measure(std::vector<PlaneWave>{wave}, {wave.eps})[0][0];
}

AngularField MeasurementEngine::response(const PlaneWave& wave) const {
  check_modulated(wave);
  std::vector<AngularField> warm(1);
  std::vector<MeasurementTrace> out(1);
  out[0].wave = wave;
  run_batch({wave}, {0}, wave.eps, warm, out, true);
  if (!out[0].ok) throw NumericalError(out[0].error);
  return warm[0];
}

MeasurementTrace lambda_eps(const RteSolver& solver, const PlaneWave& wave) {
  wave.validate();
  if (wave.eps == 0.0) throw ValidationError("lambda_eps needs eps > 0; use linearized_response for the limit");
  MeasurementEngine eng(solver);
  // Certificate failures surface as exceptions here, unlike in sweeps.
  validate_subcriticality(modulate(solver.medium(), wave), solver.directions());
  MeasurementTrace t = eng.measure(wave);
  if (!t.ok) throw NumericalError(t.error);
  return t;
}

AngularField linearized_response(const RteSolver& solver, const PlaneWave& wave) {
  PlaneWave w = wave;
  w.eps = 0.0;
  return MeasurementEngine(solver).response(w);
}

BoundaryTrace lambda_eps_two_solves(const OpticalMedium& medium, const DirectionSet& dirs, const SolverOptions& opts,
                                    const PlaneWave& wave) {
  if (!(wave.eps > 0.0)) throw ValidationError("two-solve measurement needs eps > 0");
  RteSolver s0(medium, dirs, opts);
  RteSolver s1(modulate(medium, wave), dirs, opts);
  BoundaryTrace t0 = s0.outflow(s0.solve_forward().u, s0.medium().source, nullptr);
  BoundaryTrace t1 = s1.outflow(s1.solve_forward().u, s1.medium().source, nullptr);
  BoundaryTrace out(BoundarySide::GammaPlus, s0.sampling());
  for (int k = 0; k < out.size(); ++k) out.values()[k] = (t1.values()[k] - t0.values()[k]) / wave.eps;
  return out;
}

std::vector<MeasurementSet> sweep_levels(const RteSolver& solver, const QLattice& lattice,
                                         const std::vector<double>& levels, const std::vector<QPoint>* subset) {
  if (!lattice.matches(*solver.grid())) throw ValidationError("q-lattice was built for a different grid");
  MeasurementEngine eng(solver);
  std::vector<QPoint> pts = subset ? *subset : lattice.points();
  std::vector<PlaneWave> waves = lattice_waves(pts, 0.0);
  auto res = eng.measure(waves, levels);
  std::vector<MeasurementSet> sets(levels.size());
  for (size_t li = 0; li < levels.size(); ++li) {
    MeasurementSet& m = sets[li];
    m.eps = levels[li];
    m.lattice = lattice;
    m.lambda0 = eng.lambda0();
    m.traces = std::move(res[li]);
    for (size_t i = 0; i < m.traces.size(); ++i) {
      m.traces[i].kx = pts[i / 2].kx;
      m.traces[i].ky = pts[i / 2].ky;
      if (!m.traces[i].ok) m.partial = true;
    }
  }
  return sets;
}

MeasurementSet sweep(const RteSolver& solver, const QLattice& lattice, double eps) {
  return std::move(sweep_levels(solver, lattice, {eps})[0]);
}

}  // namespace umblt
