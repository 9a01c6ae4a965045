#pragma once

#include <array>
#include <memory>
#include <vector>

#include "umblt/core/domain.hpp"

namespace umblt {

/// Bilinear interpolation weights over active nodes (at most four).
struct Stencil {
  int count = 0;
  std::array<int, 4> node{};      ///< active-node indices
  std::array<double, 4> weight{};
};

/// Uniform square-cell lattice over the bounding box of a domain.
/// Nodes inside the closed domain are active; fields store active nodes only.
class SpatialGrid {
 public:
  /// nodes_per_axis nodes along the longer side of the bounding box.
  static std::shared_ptr<const SpatialGrid> covering(const Domain& domain, int nodes_per_axis);
  /// Nodes anchor + h·Z² that fall in the bounding box of the domain.
  static std::shared_ptr<const SpatialGrid> on_lattice(const Domain& domain, Vec2 anchor, double h);

  const Domain& domain() const { return domain_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  Vec2 origin() const { return origin_; }
  int box_size() const { return nx_ * ny_; }
  int active_count() const { return static_cast<int>(box_of_active_.size()); }

  Vec2 box_node(int i, int j) const { return {origin_.x + i * h_, origin_.y + j * h_}; }
  Vec2 node(int a) const { return node_[a]; }
  int box_of_active(int a) const { return box_of_active_[a]; }
  /// −1 for inactive box nodes.
  int active_of_box(int b) const { return active_of_box_[b]; }
  int active_at(int i, int j) const {
    return (i < 0 || j < 0 || i >= nx_ || j >= ny_) ? -1 : active_of_box_[j * nx_ + i];
  }
  /// Lattice index of an active node.
  int ix(int a) const { return box_of_active_[a] % nx_; }
  int iy(int a) const { return box_of_active_[a] / nx_; }

  /// Renormalized bilinear stencil over the active corners of the cell holding y.
  /// Falls back to the nearest active node when no corner is active.
  Stencil stencil(Vec2 y) const;

  /// Distance of active node a to ∂X.
  double boundary_distance(int a) const { return dist_[a]; }

  bool same_lattice(const SpatialGrid& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && h_ == o.h_ && origin_ == o.origin_;
  }

 private:
  SpatialGrid(const Domain& d, Vec2 origin, double h, int nx, int ny);
  Stencil nearest(Vec2 y) const;

  Domain domain_;
  Vec2 origin_;
  double h_;
  int nx_, ny_;
  std::vector<int> active_of_box_;
  std::vector<int> box_of_active_;
  std::vector<Vec2> node_;
  std::vector<double> dist_;
};

using GridPtr = std::shared_ptr<const SpatialGrid>;

}  // namespace umblt
