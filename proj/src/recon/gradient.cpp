#include <Eigen/Dense>
#include <cmath>
#include <mutex>
#include <numeric>

#include "umblt/core/errors.hpp"
#include "umblt/core/parallel.hpp"
#include "umblt/recon/reconstruct.hpp"

namespace umblt {

namespace {

std::vector<int> node_list(const GradientOptions& opts, const SpatialGrid& g) {
  if (!opts.nodes.empty()) {
    for (int a : opts.nodes)
      if (a < 0 || a >= g.active_count()) throw ValidationError("gradient lattice node out of range");
    return opts.nodes;
  }
  std::vector<int> all(g.active_count());
  std::iota(all.begin(), all.end(), 0);
  return all;
}

GradientField empty_field(const RteSolver& s, const GradientOptions& opts) {
  GradientField gf;
  gf.values = AngularField(s.grid(), s.directions().size());
  gf.valid.assign(s.grid()->active_count(), 0);
  gf.bump_width = opts.bump_width > 0.0 ? opts.bump_width : default_bump_width(s.directions());
  gf.source = opts.source;
  return gf;
}

std::vector<BoundaryTrace> indicator_data(const RteSolver& s) {
  const int nd = s.directions().size();
  std::vector<BoundaryTrace> gs;
  for (int j = 0; j < nd; ++j) {
    std::vector<double> e(nd, 0.0);
    e[j] = 1.0;
    gs.push_back(BoundaryTrace::angular(BoundarySide::GammaPlus, s.sampling(), e));
  }
  return gs;
}

GradientField point_control_route(const RteSolver& s, const MeasurementSet& mset, const GradientOptions& opts) {
  const DirectionSet& dirs = s.directions();
  const int nd = dirs.size();
  GradientField gf = empty_field(s, opts);
  const std::vector<int> nodes = node_list(opts, *s.grid());
  for (int a : nodes) {
    const Vec2 x = s.grid()->node(a);
    std::vector<BoundaryTrace> gs;
    try {
      for (int d = 0; d < nd; ++d) {
        // Forward control for h(−θ), relabeled so that v(x₀,θ) = bump(θ − θ_d).
        const AngularProfile b = bump_profile(dirs, dirs.angle(d), gf.bump_width);
        ControlResult r = to_adjoint(control_point(s, x, b.reversed(dirs), opts.control), dirs);
        gs.push_back(std::move(r.g));
      }
    } catch (const std::exception& e) {
      ++gf.skipped;
      gf.failures.push_back("node " + std::to_string(a) + ": " + e.what());
      continue;
    }
    auto H = functional_from_measurements(mset, gs, s.grid());
    for (int d = 0; d < nd; ++d) gf.values.at(d, a) = H[d].H[a];
    gf.valid[a] = 1;
  }
  return gf;
}

}  // namespace

GradientField gradient_from_functionals(const AngularControlFamily& family, const std::vector<ScalarField>& H,
                                        const GradientOptions& opts) {
  const RteSolver& s = family.solver();
  const DirectionSet& dirs = s.directions();
  const int nd = dirs.size();
  if (static_cast<int>(H.size()) != nd) throw ValidationError("one functional per family member is required");
  for (const auto& h : H)
    if (!h.grid()->same_lattice(*s.grid())) throw ValidationError("functional grid differs from the solver grid");
  GradientField gf = empty_field(s, opts);
  gf.source = ControlSource::Family;
  const AngularProfile b0 = bump_profile(dirs, dirs.angle(0), gf.bump_width);
  const std::vector<int> nodes = node_list(opts, *s.grid());

  std::vector<double> cond(nodes.size(), 0.0);
  std::vector<std::string> err(nodes.size());
  parallel_for(static_cast<int>(nodes.size()), s.workers(), [&](int k) {
    const int a = nodes[k];
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(family.response_at_node(a, ControlForm::Adjoint));
    const double rc = lu.rcond();
    cond[k] = rc > 0.0 ? 1.0 / rc : INFINITY;
    if (!(cond[k] <= opts.max_condition)) {
      err[k] = "node " + std::to_string(a) + ": control matrix condition above the limit";
      return;
    }
    Eigen::VectorXd hv(nd);
    for (int j = 0; j < nd; ++j) hv[j] = H[j][a];
    // y_i = w_i θ_i·∇u(x_a): the pairing weights of each direction.
    const Eigen::VectorXd y = lu.transpose().solve(hv);
    for (int d = 0; d < nd; ++d) {
      double g = 0.0;
      for (int i = 0; i < nd; ++i) g += b0.h[dirs.offset(i, d)] * y[i];
      gf.values.at(d, a) = g;
    }
    gf.valid[a] = 1;
  });
  for (size_t k = 0; k < nodes.size(); ++k) {
    if (!err[k].empty()) {
      ++gf.skipped;
      gf.failures.push_back(err[k]);
    } else {
      gf.max_condition = std::max(gf.max_condition, cond[k]);
      gf.control_reuse += nd - 1;
    }
  }
  return gf;
}

GradientField recover_gradient(const AngularControlFamily& family, const MeasurementSet& mset,
                               const GradientOptions& opts) {
  const RteSolver& s = family.solver();
  if (opts.source == ControlSource::PointControl) return point_control_route(s, mset, opts);
  auto F = functional_from_measurements(mset, indicator_data(s), s.grid());
  std::vector<ScalarField> H;
  for (auto& f : F) H.push_back(std::move(f.H));
  return gradient_from_functionals(family, H, opts);
}

GradientField recover_gradient(const RteSolver& solver, const MeasurementSet& mset, const GradientOptions& opts) {
  if (opts.source == ControlSource::PointControl) return point_control_route(solver, mset, opts);
  AngularControlFamily fam(solver);
  return recover_gradient(fam, mset, opts);
}

}  // namespace umblt
