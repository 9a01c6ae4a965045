#include <algorithm>
#include <cmath>
#include <sstream>

#include "umblt/control/control.hpp"
#include "umblt/core/errors.hpp"

namespace umblt {

double norm_1_inf(const AngularField& v, const DirectionSet& dirs) {
  double s = 0.0;
  for (int d = 0; d < v.n_dir(); ++d) {
    double m = 0.0;
    for (double x : v.direction(d)) m = std::max(m, std::abs(x));
    s += dirs.weight(d) * m;
  }
  return s;
}

double norm_1_inf(const BoundaryTrace& g) {
  const auto& smp = *g.sampling();
  double s = 0.0;
  for (int d = 0; d < smp.n_dir(); ++d) {
    double m = 0.0;
    for (int j = 0; j < smp.rays(d); ++j) m = std::max(m, std::abs(g.at(d, j)));
    s += smp.directions().weight(d) * m;
  }
  return s;
}

namespace {

double profile_l1(const std::vector<double>& g, const DirectionSet& dirs) {
  double s = 0.0;
  for (int i = 0; i < dirs.size(); ++i) s += dirs.weight(i) * std::abs(g[i]);
  return s;
}

}  // namespace

ControlResult control_small(const RteSolver& solver, Vec2 x0, const AngularProfile& h, const ControlOptions& opts) {
  const DirectionSet& dirs = solver.directions();
  const Domain& dom = solver.grid()->domain();
  if (h.size() != dirs.size()) throw ValidationError("profile size differs from the direction count");
  h.require_finite();
  if (!dom.contains(x0) || dom.signed_distance(x0) <= 0.0) throw ValidationError("control point must be interior");
  const double ta = dom.diameter() * solver.certificate().a;
  if (!(ta < 0.5)) {
    std::ostringstream os;
    os << "small-domain control needs tau*a < 1/2 (got " << ta << "); use control_point";
    throw ValidationError(os.str());
  }

  const int nd = dirs.size();
  ControlResult r;
  r.form = ControlForm::Forward;
  r.x0 = x0;
  r.h = h;
  r.tau_a = ta;
  r.method = "small-domain iteration";
  r.v = AngularField(solver.grid(), nd);
  r.g = solver.zero_inflow();
  const ScalarField zero(solver.grid(), 0.0);

  std::vector<double> gj = h.h;
  const double h1 = h.l1(dirs);
  if (h.linf() == 0.0) {
    r.v_at_x0.assign(nd, 0.0);
    return r;
  }
  while (true) {
    const double nj = profile_l1(gj, dirs);
    r.g_norms.push_back(nj);
    double gmax = 0.0;
    for (double x : gj) gmax = std::max(gmax, std::abs(x));
    // g_j is also the remaining error at x₀ once w_{j−1} is included.
    if (r.iterations > 0 && gmax <= opts.tol) break;
    if (r.iterations >= opts.max_iter) throw NumericalError("small-domain control did not reach its tolerance");
    if (r.g_norms.size() >= 2) {
      r.ratios.push_back(nj / r.g_norms[r.g_norms.size() - 2]);
      if (r.ratios.size() >= 3 && r.ratios.back() >= 1.0 && r.ratios[r.ratios.size() - 2] >= 1.0 &&
          r.ratios[r.ratios.size() - 3] >= 1.0)
        throw NumericalError("small-domain control iteration is not contracting");
    }
    BoundaryTrace f = BoundaryTrace::angular(BoundarySide::GammaMinus, solver.sampling(), gj);
    Solution w = solver.solve_forward(zero, f);
    std::vector<double> wx = solver.evaluate_at(x0, w.u, zero, &f);
    for (size_t k = 0; k < r.v.size(); ++k) r.v.values()[k] += w.u.values()[k];
    for (int k = 0; k < r.g.size(); ++k) r.g.values()[k] += f.values()[k];
    for (int i = 0; i < nd; ++i) gj[i] -= wx[i];
    ++r.iterations;
  }
  r.v_at_x0 = solver.evaluate_at(x0, r.v, zero, &r.g);
  for (int i = 0; i < nd; ++i) r.achieved_error = std::max(r.achieved_error, std::abs(r.v_at_x0[i] - h.h[i]));
  r.pre_correction_error = r.achieved_error;
  r.norm_constant = (norm_1_inf(r.v, dirs) + norm_1_inf(r.g)) / h1;
  return r;
}

ControlResult to_adjoint(const ControlResult& r, const DirectionSet& dirs) {
  if (r.form != ControlForm::Forward) throw ValidationError("control is already in adjoint form");
  ControlResult a = r;
  a.form = ControlForm::Adjoint;
  a.v = r.v.reversed();
  a.g = reverse_trace(r.g);
  a.h = r.h.reversed(dirs);
  for (int i = 0; i < dirs.size(); ++i) a.v_at_x0[i] = r.v_at_x0[dirs.opposite(i)];
  return a;
}

double control_consistency(const RteSolver& solver, const ControlResult& r) {
  AngularField v = r.form == ControlForm::Forward ? solver.solve_forward(ScalarField(solver.grid(), 0.0), r.g).u
                                                  : solver.solve_adjoint(r.g).u;
  return max_abs_diff(v, r.v);
}

}  // namespace umblt
