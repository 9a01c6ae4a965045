#include "umblt/core/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "umblt/core/errors.hpp"

namespace umblt {

Domain Domain::disk(Vec2 center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("disk radius must be positive");
  return Domain(Disk{center, radius});
}

Domain Domain::rectangle(Vec2 lo, Vec2 hi) {
  if (!(hi.x > lo.x) || !(hi.y > lo.y)) throw ValidationError("rectangle needs hi > lo on both axes");
  return Domain(Rectangle{lo, hi});
}

Vec2 Domain::center() const {
  if (auto d = as_disk()) return d->center;
  auto r = as_rectangle();
  return (r->lo + r->hi) * 0.5;
}

double Domain::diameter() const {
  if (auto d = as_disk()) return 2.0 * d->radius;
  return norm(as_rectangle()->hi - as_rectangle()->lo);
}

double Domain::perimeter() const {
  if (auto d = as_disk()) return 2.0 * std::numbers::pi * d->radius;
  auto r = as_rectangle();
  return 2.0 * ((r->hi.x - r->lo.x) + (r->hi.y - r->lo.y));
}

void Domain::bounding_box(Vec2& lo, Vec2& hi) const {
  if (auto d = as_disk()) {
    lo = d->center - Vec2{d->radius, d->radius};
    hi = d->center + Vec2{d->radius, d->radius};
    return;
  }
  lo = as_rectangle()->lo;
  hi = as_rectangle()->hi;
}

double Domain::half_width(Vec2 u) const {
  if (auto d = as_disk()) return d->radius;
  auto r = as_rectangle();
  return 0.5 * ((r->hi.x - r->lo.x) * std::abs(u.x) + (r->hi.y - r->lo.y) * std::abs(u.y));
}

bool Domain::contains(Vec2 x, double tol) const { return signed_distance(x) >= -tol * diameter(); }

double Domain::signed_distance(Vec2 x) const {
  if (auto d = as_disk()) return d->radius - norm(x - d->center);
  auto r = as_rectangle();
  double dx = std::min(x.x - r->lo.x, r->hi.x - x.x);
  double dy = std::min(x.y - r->lo.y, r->hi.y - x.y);
  if (dx >= 0.0 && dy >= 0.0) return std::min(dx, dy);
  double ox = std::max(0.0, -dx), oy = std::max(0.0, -dy);
  return -std::hypot(ox, oy);
}

Vec2 Domain::outward_normal(Vec2 p) const {
  if (auto d = as_disk()) {
    Vec2 v = p - d->center;
    double n = norm(v);
    return n > 0.0 ? v * (1.0 / n) : Vec2{1.0, 0.0};
  }
  auto r = as_rectangle();
  const double tol = 1e-12 * diameter();
  Vec2 n{0.0, 0.0};
  if (std::abs(p.x - r->lo.x) <= tol) n.x -= 1.0;
  if (std::abs(p.x - r->hi.x) <= tol) n.x += 1.0;
  if (std::abs(p.y - r->lo.y) <= tol) n.y -= 1.0;
  if (std::abs(p.y - r->hi.y) <= tol) n.y += 1.0;
  if (n.x == 0.0 && n.y == 0.0) {
    // Not on the boundary: use the nearest face.
    double d[4] = {p.x - r->lo.x, r->hi.x - p.x, p.y - r->lo.y, r->hi.y - p.y};
    int k = static_cast<int>(std::min_element(d, d + 4) - d);
    const Vec2 face[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    return face[k];
  }
  return n * (1.0 / norm(n));
}

std::optional<Interval> Domain::chord(Vec2 o, Vec2 dir) const {
  if (auto d = as_disk()) {
    Vec2 w = o - d->center;
    double a = dot(dir, dir), b = dot(w, dir), c = dot(w, w) - d->radius * d->radius;
    double disc = b * b - a * c;
    if (disc <= 0.0) return std::nullopt;
    double s = std::sqrt(disc);
    // Stable roots of a t² + 2 b t + c.
    double qv = -(b + std::copysign(s, b));
    double t1 = qv / a, t2 = (qv != 0.0) ? c / qv : -t1;
    if (t1 > t2) std::swap(t1, t2);
    return Interval{t1, t2};
  }
  auto r = as_rectangle();
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  const double ox[2] = {o.x, o.y}, dx[2] = {dir.x, dir.y};
  const double bl[2] = {r->lo.x, r->lo.y}, bh[2] = {r->hi.x, r->hi.y};
  for (int k = 0; k < 2; ++k) {
    if (dx[k] == 0.0) {
      if (ox[k] < bl[k] || ox[k] > bh[k]) return std::nullopt;
      continue;
    }
    double ta = (bl[k] - ox[k]) / dx[k], tb = (bh[k] - ox[k]) / dx[k];
    if (ta > tb) std::swap(ta, tb);
    lo = std::max(lo, ta);
    hi = std::min(hi, tb);
  }
  if (!(hi > lo)) return std::nullopt;
  return Interval{lo, hi};
}

double Domain::arc_coordinate(Vec2 p) const {
  if (auto d = as_disk()) {
    double phi = std::atan2(p.y - d->center.y, p.x - d->center.x);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    return d->radius * phi;
  }
  auto r = as_rectangle();
  double w = r->hi.x - r->lo.x, h = r->hi.y - r->lo.y;
  double d[4] = {std::abs(p.y - r->lo.y), std::abs(p.x - r->hi.x), std::abs(p.y - r->hi.y),
                 std::abs(p.x - r->lo.x)};
  int k = static_cast<int>(std::min_element(d, d + 4) - d);
  switch (k) {
    case 0: return std::clamp(p.x - r->lo.x, 0.0, w);
    case 1: return w + std::clamp(p.y - r->lo.y, 0.0, h);
    case 2: return w + h + std::clamp(r->hi.x - p.x, 0.0, w);
    default: {
      double s = 2.0 * w + h + std::clamp(r->hi.y - p.y, 0.0, h);
      return s >= perimeter() ? 0.0 : s;
    }
  }
}

std::string Domain::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (auto d = as_disk())
    os << "disk(" << d->center.x << "," << d->center.y << ";" << d->radius << ")";
  else
    os << "rectangle(" << as_rectangle()->lo.x << "," << as_rectangle()->lo.y << ";" << as_rectangle()->hi.x
       << "," << as_rectangle()->hi.y << ")";
  return os.str();
}

double exit_time(const Domain& domain, Vec2 x, Vec2 theta, Sign sign) {
  const Vec2 dir = sign == Sign::Forward ? theta : -theta;
  const double slack = 1e-12 * domain.diameter();
  if (auto d = domain.as_disk()) {
    Vec2 w = x - d->center;
    double c = dot(w, w) - d->radius * d->radius;
    if (c > 2.0 * d->radius * slack + slack * slack) throw ValidationError("exit_time: point outside domain");
    c = std::min(c, 0.0);
    double b = dot(w, dir);
    double s = std::sqrt(b * b - c);
    // Positive root of t² + 2bt + c, cancellation-free in both cases.
    return b > 0.0 ? (s > 0.0 ? -c / (b + s) : 0.0) : s - b;
  }
  auto r = domain.as_rectangle();
  if (x.x < r->lo.x - slack || x.x > r->hi.x + slack || x.y < r->lo.y - slack || x.y > r->hi.y + slack)
    throw ValidationError("exit_time: point outside domain");
  double t = std::numeric_limits<double>::infinity();
  if (dir.x > 0.0) t = std::min(t, (r->hi.x - x.x) / dir.x);
  if (dir.x < 0.0) t = std::min(t, (r->lo.x - x.x) / dir.x);
  if (dir.y > 0.0) t = std::min(t, (r->hi.y - x.y) / dir.y);
  if (dir.y < 0.0) t = std::min(t, (r->lo.y - x.y) / dir.y);
  if (!std::isfinite(t)) throw ValidationError("exit_time: zero direction");
  return std::max(t, 0.0);
}

BoundarySide classify_boundary(const Domain& domain, Vec2 x, Vec2 theta) {
  double s = dot(theta, domain.outward_normal(x));
  if (s > kTangencyTol) return BoundarySide::GammaPlus;
  if (s < -kTangencyTol) return BoundarySide::GammaMinus;
  return BoundarySide::Tangent;
}

}  // namespace umblt
