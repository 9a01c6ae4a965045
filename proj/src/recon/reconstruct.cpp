#include "umblt/recon/reconstruct.hpp"

#include <chrono>
#include <cmath>

#include "umblt/core/errors.hpp"
#include "umblt/core/parallel.hpp"
#include "umblt/solver/gauss_legendre.hpp"

namespace umblt {

BackIntegration integrate_back(const GradientField& grad, const BoundaryTrace& lambda0, int quad_order) {
  const AngularField& G = grad.values;
  if (!lambda0.sampling() || lambda0.side() != BoundarySide::GammaPlus)
    throw ValidationError("integrate_back needs the unmodulated trace on Γ+");
  const BoundarySampling& smp = *lambda0.sampling();
  const DirectionSet& dirs = smp.directions();
  const SpatialGrid& g = *G.grid();
  if (G.n_dir() != dirs.size() || static_cast<int>(grad.valid.size()) != g.active_count())
    throw ValidationError("gradient field and trace use different direction sets or grids");
  const Domain& dom = g.domain();
  const GaussLegendre gl(quad_order);
  const double h = g.h();

  BackIntegration out;
  out.u = AngularField(G.grid(), dirs.size());
  out.valid.assign(g.active_count(), 1);
  for (int a = 0; a < g.active_count(); ++a) {
    if (!grad.valid[a]) out.valid[a] = 0;
    const Vec2 x = g.node(a);
    for (int d = 0; d < dirs.size(); ++d) {
      const Vec2 th = dirs.direction(d);
      const double tau = exit_time(dom, x, th, Sign::Forward);
      double integral = 0.0;
      const int pieces = std::max(1, static_cast<int>(std::ceil(tau / h - 1e-9)));
      const double len = tau / pieces;
      for (int p = 0; p < pieces && tau > 0.0; ++p) {
        for (int s = 0; s < gl.order; ++s) {
          const double t = len * (p + 0.5 * (gl.node[s] + 1.0));
          const Stencil st = g.stencil(x + th * t);
          double v = 0.0;
          for (int c = 0; c < st.count; ++c) {
            if (!grad.valid[st.node[c]]) out.valid[a] = 0;
            v += st.weight[c] * G.at(d, st.node[c]);
          }
          integral += 0.5 * len * gl.weight[s] * v;
        }
      }
      out.u.at(d, a) = lambda0.interpolate(d, x + th * tau) - integral;
    }
  }
  return out;
}

SourceEstimate recover_source(const RteSolver& solver, const AngularField& u) {
  const DirectionSet& dirs = solver.directions();
  const SpatialGrid& g = *solver.grid();
  if (!u.grid()->same_lattice(g) || u.n_dir() != dirs.size())
    throw ValidationError("recover_source: field does not match the solver");
  const Domain& dom = g.domain();
  const double h = g.h();
  const AngularField ku = solver.apply_scattering(u);
  const ScalarField& sig = solver.medium().sigma;

  AngularField est(u.grid(), dirs.size());
  for (int d = 0; d < dirs.size(); ++d) {
    const Vec2 th = dirs.direction(d);
    for (int a = 0; a < g.active_count(); ++a) {
      const Vec2 x = g.node(a);
      const bool back = dom.contains(x - th * h, 0.0), fwd = dom.contains(x + th * h, 0.0);
      double du = 0.0;
      if (back && fwd)
        du = (u.interpolate(d, x + th * h) - u.interpolate(d, x - th * h)) / (2.0 * h);
      else if (back)
        du = (u.at(d, a) - u.interpolate(d, x - th * h)) / h;
      else if (fwd)
        du = (u.interpolate(d, x + th * h) - u.at(d, a)) / h;
      est.at(d, a) = du + sig[a] * u.at(d, a) - ku.at(d, a);
    }
  }
  SourceEstimate r{ScalarField(u.grid(), 0.0), ScalarField(u.grid(), 0.0)};
  double wsum = 0.0;
  for (int d = 0; d < dirs.size(); ++d) wsum += dirs.weight(d);
  for (int d = 0; d < dirs.size(); ++d)
    for (int a = 0; a < g.active_count(); ++a) r.S[a] += dirs.weight(d) * est.at(d, a) / wsum;
  for (int d = 0; d < dirs.size(); ++d)
    for (int a = 0; a < g.active_count(); ++a) r.spread[a] = std::max(r.spread[a], std::abs(est.at(d, a) - r.S[a]));
  return r;
}

Reconstruction reconstruct(const AngularControlFamily& family, const MeasurementSet& mset,
                           const ReconstructOptions& opts) {
  const RteSolver& s = family.solver();
  Reconstruction r;
  r.gradient = recover_gradient(family, mset, opts.gradient);
  BackIntegration bi = integrate_back(r.gradient, mset.lambda0, opts.quad_order);
  SourceEstimate se = recover_source(s, bi.u);
  r.valid = std::move(bi.valid);
  r.S_hat = std::move(se.S);
  r.spread = std::move(se.spread);
  for (int a = 0; a < r.S_hat.size(); ++a)
    if (!r.valid[a]) r.S_hat[a] = r.spread[a] = 0.0;
  r.eps = mset.eps;
  r.h = s.grid()->h();
  r.bump_width = r.gradient.bump_width;
  r.error_budget = r.eps + r.h + r.bump_width * r.bump_width;
  r.method = opts.gradient.source == ControlSource::Family ? "angular family" : "point control";
  return r;
}

Reconstruction reconstruct(const RteSolver& solver, const MeasurementSet& mset, const ReconstructOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  AngularControlFamily fam(solver);
  const double built = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Reconstruction r = reconstruct(fam, mset, opts);
  r.family_build_seconds = built;
  return r;
}

double relative_interior_error(const ScalarField& a, const ScalarField& b, const std::vector<char>* valid,
                               double margin) {
  const SpatialGrid& g = *b.grid();
  if (a.size() != b.size()) throw ValidationError("fields differ in size");
  if (margin < 0.0) margin = g.h();
  double num = 0.0, den = 0.0;
  for (int i = 0; i < b.size(); ++i) {
    if (g.boundary_distance(i) < margin || (valid && !(*valid)[i])) continue;
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace umblt
