#include <algorithm>
#include <cmath>
#include <memory>

#include "umblt/control/control.hpp"
#include "umblt/control/family.hpp"
#include "umblt/control/propagate.hpp"
#include "umblt/core/errors.hpp"

namespace umblt {

namespace {

// Ball about x₀ small enough for the iteration, with the medium carried over.
std::shared_ptr<const RteSolver> control_ball(const RteSolver& solver, Vec2 x0, double r0) {
  const Domain ball = Domain::disk(x0, r0);
  GridPtr g = SpatialGrid::on_lattice(ball, x0, r0 / 8.0);
  const OpticalMedium& m = solver.medium();
  OpticalMedium bm;
  if (m.model && m.model->sigma) {
    bm = OpticalMedium::sample(m.model, g);
    bm.kernel = m.kernel;
  } else {
    PointMedium pm = PointMedium::of(m);
    bm.sigma = ScalarField::sample(g, pm.sigma);
    bm.kernel_amplitude = ScalarField::sample(g, pm.amplitude);
    bm.source = ScalarField(g, 0.0);
    bm.kernel = m.kernel;
  }
  bm.source = ScalarField(g, 0.0);
  return std::make_shared<RteSolver>(std::move(bm), solver.directions(), solver.options());
}

struct Pass {
  BoundaryTrace g;
  AngularField v;
  double growth = 0.0;
};

void add_into(AngularField& a, const AngularField& b) {
  for (size_t k = 0; k < a.size(); ++k) a.values()[k] += b.values()[k];
}
void add_into(BoundaryTrace& a, const BoundaryTrace& b) {
  for (int k = 0; k < a.size(); ++k) a.values()[k] += b.values()[k];
}

}  // namespace

ControlResult control_point(const RteSolver& solver, Vec2 x0, const AngularProfile& h, const ControlOptions& opts) {
  const DirectionSet& dirs = solver.directions();
  const Domain& dom = solver.grid()->domain();
  if (h.size() != dirs.size()) throw ValidationError("profile size differs from the direction count");
  h.require_finite();
  if (!dom.contains(x0) || dom.signed_distance(x0) <= 0.0) throw ValidationError("control point must be interior");
  const double a = solver.certificate().a;
  if (dom.diameter() * a < 0.5) return control_small(solver, x0, h, opts);
  const double dist = dom.signed_distance(x0);
  if (dist <= solver.grid()->h()) throw ValidationError("control point is within one grid cell of the boundary");

  const int nd = dirs.size();
  const double r0 = std::min(0.9 / (4.0 * a), 0.5 * dist);
  auto ball = control_ball(solver, x0, r0);
  const PointMedium pm = PointMedium::of(solver.medium());
  const ScalarField zero(solver.grid(), 0.0);

  PropagationOptions popts;
  popts.a_delta = opts.a_delta;
  popts.ring_spacing = opts.ring_spacing > 0.0 ? opts.ring_spacing : solver.grid()->h();

  double outer = 0.0;
  const auto& smp = *solver.sampling();
  for (int d = 0; d < nd; ++d)
    for (int j = 0; j < smp.rays(d); ++j) outer = std::max(outer, norm(smp.ray(d, j).entry - x0));
  outer *= 1.0 + 1e-9;

  ControlOptions inner_opts = opts;
  inner_opts.tol = std::min(opts.tol, 1e-10) * std::max(1.0, h.linf());
  // One linear pass: ball control for e, extension, Γ− restriction, re-solve on X.
  auto run = [&](const AngularProfile& e) {
    Pass p;
    ControlResult cb = control_small(*ball, x0, e, inner_opts);
    PolarField pf = propagate(ball, cb.v, cb.g, pm, outer, a, popts);
    p.g = pf.trace(solver.sampling(), BoundarySide::GammaMinus);
    p.v = solver.solve_forward(zero, p.g).u;
    p.growth = pf.report().growth;
    return p;
  };
  auto residual = [&](const AngularField& v, const BoundaryTrace& g, double& err) {
    std::vector<double> vx = solver.evaluate_at(x0, v, zero, &g);
    AngularProfile e;
    e.h.resize(nd);
    err = 0.0;
    for (int i = 0; i < nd; ++i) {
      e.h[i] = h.h[i] - vx[i];
      err = std::max(err, std::abs(e.h[i]));
    }
    return std::make_pair(e, vx);
  };

  ControlResult r;
  r.form = ControlForm::Forward;
  r.x0 = x0;
  r.h = h;
  r.tau_a = dom.diameter() * a;
  r.method = "propagation";
  if (h.linf() == 0.0) {
    r.v = AngularField(solver.grid(), nd);
    r.g = solver.zero_inflow();
    r.v_at_x0.assign(nd, 0.0);
    return r;
  }

  Pass first = run(h);
  r.g = std::move(first.g);
  r.v = std::move(first.v);
  r.growth = first.growth;
  double err = 0.0;
  auto [e, vx] = residual(r.v, r.g, err);
  r.pre_correction_error = err;
  r.g_norms.push_back(err);
  for (int pass = 0; pass < opts.max_refine && err > opts.tol; ++pass) {
    Pass p = run(e);
    add_into(r.g, p.g);
    add_into(r.v, p.v);
    const double before = err;
    std::tie(e, vx) = residual(r.v, r.g, err);
    r.g_norms.push_back(err);
    r.ratios.push_back(err / before);
    ++r.iterations;
    if (!(err < 0.9 * before)) break;
  }
  if (r.iterations > 0) r.method = "propagation + refinement";
  if (opts.polish && err > opts.tol) {
    AngularControlFamily fam(solver);
    Eigen::MatrixXd E = fam.response_at(x0, ControlForm::Forward);
    Eigen::VectorXd c = E.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(e.h.data(), nd));
    add_into(r.g, fam.boundary_data(c, ControlForm::Forward));
    add_into(r.v, fam.field(c, ControlForm::Forward));
    std::tie(e, vx) = residual(r.v, r.g, err);
    r.method += " + angular polish";
  }
  r.v_at_x0 = vx;
  r.achieved_error = err;
  r.norm_constant = (norm_1_inf(r.v, dirs) + norm_1_inf(r.g)) / h.l1(dirs);
  return r;
}

}  // namespace umblt
