#include "umblt/core/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "umblt/core/errors.hpp"

namespace umblt {

namespace {
void unwrap(std::vector<double>& a, double period) {
  for (size_t k = 1; k < a.size(); ++k) {
    while (a[k] - a[k - 1] > 0.5 * period) a[k] -= period;
    while (a[k] - a[k - 1] < -0.5 * period) a[k] += period;
  }
}
}  // namespace

std::shared_ptr<const BoundarySampling> BoundarySampling::build(const Domain& domain, const DirectionSet& dirs,
                                                                double spacing) {
  if (!(spacing > 0.0)) throw ValidationError("boundary spacing must be positive");
  auto s = std::shared_ptr<BoundarySampling>(new BoundarySampling(domain, dirs));
  s->spacing_ = spacing;
  s->start_.push_back(0);
  const Vec2 c = domain.center();
  const double per = domain.perimeter();
  for (int d = 0; d < dirs.size(); ++d) {
    const Vec2 th = dirs.direction(d), u = perp(th);
    const double hw = domain.half_width(u);
    const int n = std::max(1, static_cast<int>(std::ceil(2.0 * hw / spacing - 1e-9)));
    const double ds = 2.0 * hw / n;
    std::vector<double> ae, ax;
    for (int j = 0; j < n; ++j) {
      BoundaryRay r;
      r.offset = -hw + (j + 0.5) * ds;
      Vec2 o = c + u * r.offset;
      auto iv = domain.chord(o, th);
      if (!iv) throw NumericalError("boundary sampling: chord missed the domain");
      r.entry = o + th * iv->lo;
      r.exit = o + th * iv->hi;
      r.length = iv->length();
      ae.push_back(domain.arc_coordinate(r.entry));
      ax.push_back(domain.arc_coordinate(r.exit));
      s->rays_.push_back(r);
    }
    unwrap(ae, per);
    unwrap(ax, per);
    for (int j = 0; j < n; ++j) {
      s->rays_[s->start_.back() + j].arc_entry = ae[j];
      s->rays_[s->start_.back() + j].arc_exit = ax[j];
    }
    s->start_.push_back(s->start_.back() + n);
    s->ds_.push_back(ds);
    s->weight_.push_back(dirs.weight(d) * ds);
  }
  return s;
}

TraceLerp BoundarySampling::locate(int d, BoundarySide side, Vec2 p) const {
  const int n = rays(d);
  TraceLerp l;
  if (n == 1) return l;
  auto arc = [&](int j) {
    const BoundaryRay& r = ray(d, j);
    return side == BoundarySide::GammaPlus ? r.arc_exit : r.arc_entry;
  };
  const double per = domain_.perimeter();
  const double a0 = arc(0), a1 = arc(n - 1);
  const double sgn = a1 >= a0 ? 1.0 : -1.0;
  const double mid = 0.5 * (a0 + a1);
  double a = domain_.arc_coordinate(p);
  a += per * std::round((mid - a) / per);
  // Ascending search in sgn·arc.
  const double x = sgn * a;
  if (x <= sgn * a0) return {0, 0, 1.0, 0.0};
  if (x >= sgn * a1) return {n - 1, n - 1, 1.0, 0.0};
  int lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    int m = (lo + hi) / 2;
    (sgn * arc(m) <= x ? lo : hi) = m;
  }
  double t = (x - sgn * arc(lo)) / (sgn * arc(hi) - sgn * arc(lo));
  return {lo, hi, 1.0 - t, t};
}

bool BoundarySampling::same_as(const BoundarySampling& o) const {
  if (this == &o) return true;
  return domain_.describe() == o.domain_.describe() && dirs_.size() == o.dirs_.size() && spacing_ == o.spacing_;
}

BoundaryTrace BoundaryTrace::angular(BoundarySide side, SamplingPtr s, const std::vector<double>& per_dir) {
  if (static_cast<int>(per_dir.size()) != s->n_dir()) throw ValidationError("angular data has wrong length");
  BoundaryTrace t(side, s);
  for (int d = 0; d < s->n_dir(); ++d)
    for (int j = 0; j < s->rays(d); ++j) t.at(d, j) = per_dir[d];
  return t;
}

Vec2 BoundaryTrace::point(int d, int j) const {
  const BoundaryRay& r = s_->ray(d, j);
  return side_ == BoundarySide::GammaPlus ? r.exit : r.entry;
}

double BoundaryTrace::interpolate(int d, Vec2 p) const {
  TraceLerp l = s_->locate(d, side_, p);
  return l.w0 * at(d, l.j0) + l.w1 * at(d, l.j1);
}

double BoundaryTrace::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

double BoundaryTrace::lp_norm(double p) const {
  if (std::isinf(p)) return max_abs();
  double s = 0.0;
  for (int d = 0; d < s_->n_dir(); ++d)
    for (int j = 0; j < s_->rays(d); ++j) s += s_->weight(d) * std::pow(std::abs(at(d, j)), p);
  return std::pow(s, 1.0 / p);
}

BoundaryTrace reverse_trace(const BoundaryTrace& t) {
  const auto& s = *t.sampling();
  BoundaryTrace r(t.side() == BoundarySide::GammaPlus ? BoundarySide::GammaMinus : BoundarySide::GammaPlus,
                  t.sampling());
  const DirectionSet& dirs = s.directions();
  for (int d = 0; d < s.n_dir(); ++d) {
    const int o = dirs.opposite(d), n = s.rays(d);
    for (int j = 0; j < n; ++j) r.at(d, j) = t.at(o, n - 1 - j);
  }
  return r;
}

}  // namespace umblt
