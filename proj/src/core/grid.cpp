#include "umblt/core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "umblt/core/errors.hpp"

namespace umblt {

SpatialGrid::SpatialGrid(const Domain& d, Vec2 origin, double h, int nx, int ny)
    : domain_(d), origin_(origin), h_(h), nx_(nx), ny_(ny) {
  if (nx < 2 || ny < 2) throw ValidationError("grid needs at least two nodes per axis");
  active_of_box_.assign(static_cast<size_t>(nx) * ny, -1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Vec2 p = box_node(i, j);
      if (!domain_.contains(p)) continue;
      active_of_box_[j * nx + i] = static_cast<int>(box_of_active_.size());
      box_of_active_.push_back(j * nx + i);
      node_.push_back(p);
      dist_.push_back(std::max(0.0, domain_.signed_distance(p)));
    }
  if (box_of_active_.empty()) throw ValidationError("grid has no node inside the domain");
}

std::shared_ptr<const SpatialGrid> SpatialGrid::covering(const Domain& domain, int n) {
  if (n < 2) throw ValidationError("grid needs at least two nodes per axis");
  Vec2 lo, hi;
  domain.bounding_box(lo, hi);
  double w = hi.x - lo.x, ht = hi.y - lo.y;
  double h = std::max(w, ht) / (n - 1);
  int nx = w >= ht ? n : static_cast<int>(std::ceil(w / h - 1e-9)) + 1;
  int ny = ht >= w ? n : static_cast<int>(std::ceil(ht / h - 1e-9)) + 1;
  Vec2 c = (lo + hi) * 0.5;
  Vec2 origin{c.x - 0.5 * (nx - 1) * h, c.y - 0.5 * (ny - 1) * h};
  if (w >= ht) origin.x = lo.x;
  if (ht >= w) origin.y = lo.y;
  return std::shared_ptr<const SpatialGrid>(new SpatialGrid(domain, origin, h, nx, ny));
}

std::shared_ptr<const SpatialGrid> SpatialGrid::on_lattice(const Domain& domain, Vec2 anchor, double h) {
  if (!(h > 0.0)) throw ValidationError("lattice spacing must be positive");
  Vec2 lo, hi;
  domain.bounding_box(lo, hi);
  const double eps = 1e-9;
  int i0 = static_cast<int>(std::floor((lo.x - anchor.x) / h + eps));
  int i1 = static_cast<int>(std::ceil((hi.x - anchor.x) / h - eps));
  int j0 = static_cast<int>(std::floor((lo.y - anchor.y) / h + eps));
  int j1 = static_cast<int>(std::ceil((hi.y - anchor.y) / h - eps));
  Vec2 origin{anchor.x + i0 * h, anchor.y + j0 * h};
  return std::shared_ptr<const SpatialGrid>(
      new SpatialGrid(domain, origin, h, std::max(2, i1 - i0 + 1), std::max(2, j1 - j0 + 1)));
}

Stencil SpatialGrid::stencil(Vec2 y) const {
  double fx = (y.x - origin_.x) / h_, fy = (y.y - origin_.y) / h_;
  int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 2);
  int j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 2);
  double tx = std::clamp(fx - i, 0.0, 1.0), ty = std::clamp(fy - j, 0.0, 1.0);
  const int b = j * nx_ + i;
  const int corner[4] = {active_of_box_[b], active_of_box_[b + 1], active_of_box_[b + nx_],
                         active_of_box_[b + nx_ + 1]};
  const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
  Stencil s;
  double sum = 0.0;
  for (int k = 0; k < 4; ++k)
    if (corner[k] >= 0 && w[k] > 0.0) {
      s.node[s.count] = corner[k];
      s.weight[s.count] = w[k];
      sum += w[k];
      ++s.count;
    }
  if (s.count == 0 || sum <= 1e-300) return nearest(y);
  if (s.count < 4)
    for (int k = 0; k < s.count; ++k) s.weight[k] /= sum;
  return s;
}

Stencil SpatialGrid::nearest(Vec2 y) const {
  int ci = static_cast<int>(std::lround((y.x - origin_.x) / h_));
  int cj = static_cast<int>(std::lround((y.y - origin_.y) / h_));
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (int r = 0; r <= 3 && best < 0; ++r)
    for (int j = cj - r; j <= cj + r; ++j)
      for (int i = ci - r; i <= ci + r; ++i) {
        int a = active_at(i, j);
        if (a < 0) continue;
        double d = norm(node_[a] - y);
        if (d < bd) bd = d, best = a;
      }
  if (best < 0)
    for (int a = 0; a < active_count(); ++a) {
      double d = norm(node_[a] - y);
      if (d < bd) bd = d, best = a;
    }
  Stencil s;
  s.count = 1;
  s.node[0] = best;
  s.weight[0] = 1.0;
  return s;
}

}  // namespace umblt
