#include "umblt/solver/neumann.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>

#include "umblt/core/errors.hpp"

namespace umblt {

int iteration_cap(double rtol, double q) {
  q = std::clamp(q, 1e-3, 0.999);
  double r = std::clamp(rtol, 1e-16, 0.5);
  return std::max(20, 10 * static_cast<int>(std::ceil(std::log(r) / std::log(q))));
}

std::vector<SolveReport> neumann_block(const TransportOperator& T, const ScatteringOperator& K,
                                       const ScalarField& sigma, const BlockField& b, BlockField& x,
                                       const std::vector<LaneSpec>& lanes, const IterationControl& ctl) {
  const int L = b.lanes, nd = b.n_dir, na = b.n_nodes;
  if (static_cast<int>(lanes.size()) != L || x.lanes != L) throw ValidationError("lane count mismatch");
  const int cap = ctl.max_iter > 0 ? ctl.max_iter : iteration_cap(ctl.rtol, ctl.contraction);
  std::vector<SolveReport> rep(L);
  for (auto& r : rep) r.mode = ctl.mode, r.contraction_bound = ctl.contraction;
  std::vector<int> streak(L, 0);
  std::vector<char> done(L, 0);
  BlockField y(nd, na, L), xn(nd, na, L);
  const size_t cells = static_cast<size_t>(nd) * na;
  bool any_mod = std::any_of(lanes.begin(), lanes.end(), [](const LaneSpec& s) { return s.eps != 0.0 && s.modulation; });

  for (int it = 1; it <= cap; ++it) {
    if (!K.zero()) {
      K.apply_block(x, y);
    } else {
      std::fill(y.v.begin(), y.v.end(), 0.0);
    }
    if (any_mod)
      for (int l = 0; l < L; ++l) {
        const LaneSpec& s = lanes[l];
        if (s.eps == 0.0 || !s.modulation || done[l]) continue;
        const auto& c = *s.modulation;
        for (int d = 0; d < nd; ++d)
          for (int a = 0; a < na; ++a) {
            const size_t k = (static_cast<size_t>(d) * na + a) * L + l;
            y.v[k] += s.eps * c[a] * (y.v[k] - sigma[a] * x.v[k]);
          }
      }
    T.apply_block(y, xn, ctl.workers);
    for (size_t k = 0; k < xn.v.size(); ++k) xn.v[k] += b.v[k];

    std::vector<double> upd(L, 0.0), nrm(L, 0.0), ref(L, 0.0);
    for (size_t c = 0; c < cells; ++c) {
      const double* pn = &xn.v[c * L];
      const double* po = &x.v[c * L];
      for (int l = 0; l < L; ++l) {
        upd[l] = std::max(upd[l], std::abs(pn[l] - po[l]));
        nrm[l] = std::max(nrm[l], std::abs(pn[l]));
      }
    }
    for (int l = 0; l < L; ++l) {
      if (done[l]) continue;
      const LaneSpec& s = lanes[l];
      if (s.base) {
        const auto& bv = s.base->values();
        double m = 0.0;
        for (size_t c = 0; c < cells; ++c) m = std::max(m, std::abs(bv[c] + s.scale * xn.v[c * L + l]));
        ref[l] = m;
      } else {
        ref[l] = nrm[l];
      }
    }
    bool all = true;
    for (int l = 0; l < L; ++l) {
      if (done[l]) continue;
      SolveReport& r = rep[l];
      const LaneSpec& s = lanes[l];
      if (!r.update_norms.empty() && r.update_norms.back() > 0.0) {
        double ratio = upd[l] / r.update_norms.back();
        r.ratios.push_back(ratio);
        streak[l] = ratio >= 1.0 ? streak[l] + 1 : 0;
      }
      r.update_norms.push_back(upd[l]);
      r.iterations = it;
      r.final_update = upd[l];
      for (size_t c = 0; c < cells; ++c) x.v[c * L + l] = xn.v[c * L + l];
      const bool small = s.scale * upd[l] <= ctl.rtol * ref[l] + ctl.atol;
      const bool floor = upd[l] <= 16.0 * DBL_EPSILON * nrm[l];
      if (small || floor) {
        done[l] = 1;
        r.converged = true;
        continue;
      }
      if (streak[l] >= 3) {
        std::ostringstream os;
        os << "Neumann iteration is not contracting (lane " << l << ", iteration " << it << ", ratio "
           << r.ratios.back() << ")";
        throw NumericalError(os.str());
      }
      all = false;
    }
    if (all) return rep;
  }
  std::ostringstream os;
  os << "Neumann iteration hit the cap of " << cap << " iterations";
  throw NumericalError(os.str());
}

}  // namespace umblt
