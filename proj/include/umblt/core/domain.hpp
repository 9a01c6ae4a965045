#pragma once

#include <optional>
#include <string>
#include <variant>

#include "umblt/core/vec2.hpp"

namespace umblt {

/// Directions with |θ·n| at or below this are tangent to the boundary.
inline constexpr double kTangencyTol = 1e-12;

enum class BoundarySide { GammaPlus, GammaMinus, Tangent };
/// Forward: distance to ∂X along +θ (τ+). Backward: along −θ (τ−).
enum class Sign { Forward, Backward };

struct Disk {
  Vec2 center;
  double radius = 1.0;
};

struct Rectangle {
  Vec2 lo;
  Vec2 hi;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

/// Bounded convex domain with analytic exit times.
class Domain {
 public:
  static Domain disk(Vec2 center, double radius);
  static Domain rectangle(Vec2 lo, Vec2 hi);

  bool is_disk() const { return std::holds_alternative<Disk>(shape_); }
  const Disk* as_disk() const { return std::get_if<Disk>(&shape_); }
  const Rectangle* as_rectangle() const { return std::get_if<Rectangle>(&shape_); }

  Vec2 center() const;
  double diameter() const;
  double perimeter() const;
  void bounding_box(Vec2& lo, Vec2& hi) const;
  /// Largest |(x − center)·u| over the domain, u a unit vector.
  double half_width(Vec2 u) const;

  /// Closed-domain membership with an absolute slack of tol·diameter.
  bool contains(Vec2 x, double tol = 1e-12) const;
  /// Positive inside, negative outside.
  double signed_distance(Vec2 x) const;
  Vec2 outward_normal(Vec2 boundary_point) const;
  /// Parameter interval {t : origin + t·dir ∈ closure}, empty if the line misses.
  std::optional<Interval> chord(Vec2 origin, Vec2 dir) const;
  /// Counterclockwise arc-length coordinate of a boundary point, in [0, perimeter).
  double arc_coordinate(Vec2 boundary_point) const;

  std::string describe() const;

 private:
  explicit Domain(std::variant<Disk, Rectangle> s) : shape_(s) {}
  std::variant<Disk, Rectangle> shape_;
};

/// Distance from x to ∂X along ±θ. Throws ValidationError if x lies outside X.
double exit_time(const Domain& domain, Vec2 x, Vec2 theta, Sign sign);

BoundarySide classify_boundary(const Domain& domain, Vec2 x, Vec2 theta);

}  // namespace umblt
