#include "umblt/solver/ray.hpp"

#include <algorithm>
#include <cmath>

namespace umblt {

RayIntegrator::RayIntegrator(const ScalarField& sigma, int order)
    : sigma_(sigma), grid_(*sigma.grid()), gl_(order), constant_(sigma.is_constant()),
      sigma0_(sigma.size() ? sigma[0] : 0.0) {}

void RayIntegrator::pieces(Vec2 x, Vec2 th, double L, std::vector<double>& cuts) const {
  cuts.clear();
  cuts.push_back(0.0);
  const double h = grid_.h();
  const Vec2 o = grid_.origin();
  auto lines = [&](double x0, double dx, double org) {
    if (dx == 0.0) return;
    // Coordinate along the axis: x0 − t·dx, crossing org + a·h.
    double f0 = (x0 - org) / h, f1 = (x0 - L * dx - org) / h;
    double lo = std::min(f0, f1), hi = std::max(f0, f1);
    for (long a = static_cast<long>(std::floor(lo)) + 1; a < hi; ++a) {
      double t = (x0 - org - a * h) / dx;
      if (t > 0.0 && t < L) cuts.push_back(t);
    }
  };
  lines(x.x, th.x, o.x);
  lines(x.y, th.y, o.y);
  cuts.push_back(L);
  std::sort(cuts.begin(), cuts.end());
  const double gap = 1e-12 * h;
  size_t w = 1;
  for (size_t r = 1; r < cuts.size(); ++r)
    if (cuts[r] - cuts[w - 1] > gap) cuts[w++] = cuts[r];
  cuts.resize(w);
  if (cuts.size() == 1) cuts.push_back(L);
  cuts.back() = L;
}

double RayIntegrator::trace(Vec2 x, Vec2 th, double L, std::vector<RaySample>& out) const {
  out.clear();
  if (!(L > 0.0)) return 1.0;
  std::vector<double> cuts;
  pieces(x, th, L, cuts);
  const double h = grid_.h();
  const int p = gl_.order;
  double sig[32];
  double I = 0.0;
  for (size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a0 = cuts[c], b0 = cuts[c + 1];
    const int split = std::max(1, static_cast<int>(std::ceil((b0 - a0) / h - 1e-9)));
    for (int s = 0; s < split; ++s) {
      const double a = a0 + (b0 - a0) * s / split, b = (s + 1 == split) ? b0 : a0 + (b0 - a0) * (s + 1) / split;
      const double half = 0.5 * (b - a);
      const size_t first = out.size();
      for (int k = 0; k < p; ++k) {
        RaySample r;
        r.t = a + half * (gl_.node[k] + 1.0);
        r.weight = half * gl_.weight[k];
        r.st = grid_.stencil(x - th * r.t);
        double sv = 0.0;
        for (int q = 0; q < r.st.count; ++q) sv += r.st.weight[q] * sigma_[r.st.node[q]];
        sig[k] = sv;
        out.push_back(r);
      }
      if (constant_) {
        for (int k = 0; k < p; ++k) out[first + k].atten = std::exp(-sigma0_ * out[first + k].t);
        continue;
      }
      for (int k = 0; k < p; ++k) {
        double part = 0.0;
        for (int q = 0; q < p; ++q) part += gl_.partial[k][q] * sig[q];
        out[first + k].atten = std::exp(-(I + half * part));
      }
      double full = 0.0;
      for (int q = 0; q < p; ++q) full += gl_.weight[q] * sig[q];
      I += half * full;
    }
  }
  return constant_ ? std::exp(-sigma0_ * L) : std::exp(-I);
}

double RayIntegrator::attenuation(Vec2 x, Vec2 th, double t) const {
  std::vector<RaySample> tmp;
  return trace(x, th, t, tmp);
}

}  // namespace umblt
