#include "umblt/solver/rte_solver.hpp"

#include <algorithm>
#include <cmath>

#include "umblt/core/errors.hpp"
#include "umblt/core/parallel.hpp"

namespace umblt {

RteSolver::RteSolver(OpticalMedium medium, const DirectionSet& dirs, SolverOptions opts)
    : medium_(std::move(medium)), dirs_(dirs), opts_(opts) {
  if (opts_.boundary_oversample < 1) throw ValidationError("boundary_oversample must be ≥ 1");
  if (!(opts_.rtol > 0.0) || !(opts_.atol >= 0.0)) throw ValidationError("solver tolerances must be positive");
  workers_ = opts_.workers > 0 ? opts_.workers : default_workers();
  cert_ = validate_subcriticality(medium_, dirs_);
  sampling_ = BoundarySampling::build(grid()->domain(), dirs_, grid()->h() / opts_.boundary_oversample);
  T_ = std::make_unique<TransportOperator>(medium_.sigma, dirs_, sampling_, opts_.quad_order, workers_);
  K_ = std::make_unique<ScatteringOperator>(medium_.kernel, medium_.kernel_amplitude, dirs_);
}

IterationControl RteSolver::iteration_control() const {
  IterationControl c;
  c.rtol = opts_.rtol;
  c.atol = opts_.atol;
  c.max_iter = opts_.max_iter;
  c.contraction = cert_.contraction();
  c.mode = cert_.mode;
  c.workers = workers_;
  return c;
}

Solution RteSolver::solve_forward(const ScalarField& S, const BoundaryTrace& f) const {
  if (S.size() != grid()->active_count()) throw ValidationError("source does not match the grid");
  if (f.side() != BoundarySide::GammaMinus || !f.sampling()->same_as(*sampling_))
    throw ValidationError("inflow data must live on this solver's Γ− samples");
  S.require_finite("source");
  AngularField b(grid(), dirs_.size());
  T_->apply(S, b);
  T_->lift(f, b, true);
  BlockField bb(dirs_.size(), grid()->active_count(), 1), x(dirs_.size(), grid()->active_count(), 1);
  bb.v = std::move(b.values());
  auto rep = neumann_block(*T_, *K_, medium_.sigma, bb, x, {LaneSpec{}}, iteration_control());
  Solution s{AngularField(grid(), dirs_.size()), rep[0]};
  s.u.values() = std::move(x.v);
  return s;
}

Solution RteSolver::solve_forward() const { return solve_forward(medium_.source, zero_inflow()); }

Solution RteSolver::solve_adjoint(const BoundaryTrace& f_plus) const {
  if (f_plus.side() != BoundarySide::GammaPlus) throw ValidationError("adjoint data must live on Γ+");
  Solution s = solve_forward(ScalarField(grid(), 0.0), reverse_trace(f_plus));
  s.u = s.u.reversed();
  return s;
}

std::vector<Solution> RteSolver::solve_homogeneous(const std::vector<BoundaryTrace>& fs) const {
  std::vector<Solution> out;
  const int nd = dirs_.size(), na = grid()->active_count();
  constexpr int kLanes = 8;
  for (size_t s0 = 0; s0 < fs.size(); s0 += kLanes) {
    const int L = static_cast<int>(std::min<size_t>(kLanes, fs.size() - s0));
    BlockField b(nd, na, L), x(nd, na, L);
    AngularField tmp(grid(), nd);
    for (int l = 0; l < L; ++l) {
      T_->lift(fs[s0 + l], tmp, false);
      b.set_lane(l, tmp);
    }
    auto rep = neumann_block(*T_, *K_, medium_.sigma, b, x, std::vector<LaneSpec>(L), iteration_control());
    for (int l = 0; l < L; ++l) {
      Solution s{AngularField(grid(), nd), rep[l]};
      x.get_lane(l, s.u);
      out.push_back(std::move(s));
    }
  }
  return out;
}

AngularField RteSolver::collision_source(const AngularField& u, const ScalarField& S) const {
  AngularField q(grid(), dirs_.size());
  K_->apply(u, q);
  for (int d = 0; d < dirs_.size(); ++d) {
    auto qd = q.direction(d);
    for (int a = 0; a < grid()->active_count(); ++a) qd[a] += S[a];
  }
  return q;
}

BoundaryTrace RteSolver::outflow(const AngularField& u, const ScalarField& S, const BoundaryTrace* f) const {
  return T_->trace(collision_source(u, S), f);
}

std::vector<double> RteSolver::evaluate_at(Vec2 x, const AngularField& u, const ScalarField& S,
                                           const BoundaryTrace* f) const {
  AngularField q = collision_source(u, S);
  std::vector<double> v(dirs_.size());
  for (int d = 0; d < dirs_.size(); ++d) v[d] = T_->evaluate_point(x, d, q, f);
  return v;
}

AngularField RteSolver::apply_transport_inverse(const AngularField& f) const {
  AngularField out(grid(), dirs_.size());
  T_->apply(f, out);
  return out;
}

AngularField RteSolver::apply_scattering(const AngularField& u) const {
  AngularField out(grid(), dirs_.size());
  K_->apply(u, out);
  return out;
}

AngularField RteSolver::apply_a2(const AngularField& u) const {
  AngularField out = apply_scattering(u);
  for (double& v : out.values()) v = -v;
  return out;
}

AngularField RteSolver::lift_boundary(const BoundaryTrace& f) const {
  AngularField out(grid(), dirs_.size());
  T_->lift(f, out, false);
  return out;
}

double integral_residual(const RteSolver& solver, const AngularField& u, const ScalarField& S,
                         const BoundaryTrace& f) {
  AngularField r = solver.apply_transport_inverse(solver.collision_source(u, S));
  AngularField j = solver.lift_boundary(f);
  double num = 0.0;
  for (size_t k = 0; k < r.size(); ++k) num = std::max(num, std::abs(u.values()[k] - j.values()[k] - r.values()[k]));
  const double den = u.max_abs();
  return den > 0.0 ? num / den : num;
}

double attenuation(const OpticalMedium& medium, Vec2 x, Vec2 theta, double t, int quad_order) {
  const Domain& dom = medium.grid()->domain();
  if (!dom.contains(x) || !dom.contains(x - theta * t))
    throw ValidationError("attenuation: segment leaves the domain");
  RayIntegrator ri(medium.sigma, quad_order);
  return ri.attenuation(x, theta, t);
}

double upwind_derivative(const AngularField& u, int d, int a, Vec2 th, bool adjoint) {
  const SpatialGrid& g = *u.grid();
  const double h = g.h();
  const Vec2 x = g.node(a);
  // Forward: (u(x) − u(x − hθ))/h. Adjoint: (u(x) − u(x + hθ))/h, i.e. −θ·∇u.
  const Vec2 y = adjoint ? x + th * h : x - th * h;
  return (u.at(d, a) - u.interpolate(d, y)) / h;
}

double residual_norm(const RteSolver& solver, const AngularField& u, const ScalarField& S, ResidualMode mode,
                     double margin) {
  const SpatialGrid& g = *solver.grid();
  if (margin < 0.0) margin = g.h() * (1.0 + std::sqrt(2.0));
  AngularField ku = solver.apply_scattering(u);
  const auto& sig = solver.medium().sigma;
  const bool adj = mode == ResidualMode::Adjoint;
  double r = 0.0;
  for (int a = 0; a < g.active_count(); ++a) {
    if (g.boundary_distance(a) < margin) continue;
    for (int d = 0; d < solver.directions().size(); ++d) {
      double dv = upwind_derivative(u, d, a, solver.directions().direction(d), adj);
      r = std::max(r, std::abs(dv + sig[a] * u.at(d, a) - ku.at(d, a) - S[a]));
    }
  }
  return r;
}

}  // namespace umblt
