#include <algorithm>
#include <cstdlib>
#include <numbers>

#include "umblt/core/errors.hpp"
#include "umblt/measure/measurement.hpp"

namespace umblt {

namespace {

int kmin(int n) { return -(n / 2); }
int canon(int m, int n) { return ((m - kmin(n)) % n + n) % n + kmin(n); }

}  // namespace

QLattice QLattice::for_grid(const SpatialGrid& grid, bool half_space, int extent) {
  QLattice l;
  l.nx = grid.nx();
  l.ny = grid.ny();
  l.h = grid.h();
  l.origin = grid.origin();
  l.half_space = half_space;
  l.extent = extent;
  return l;
}

Vec2 QLattice::frequency(int kx, int ky) const {
  constexpr double tau = 2.0 * std::numbers::pi;
  return {tau * kx / (nx * h), tau * ky / (ny * h)};
}

bool QLattice::contains(int kx, int ky) const {
  if (kx < kmin(nx) || kx >= kmin(nx) + nx || ky < kmin(ny) || ky >= kmin(ny) + ny) return false;
  if (extent >= 0 && std::max(std::abs(kx), std::abs(ky)) > extent) return false;
  if (!half_space) return true;
  // Keep k when it is not lexicographically below its aliased negative.
  const int mx = canon(-kx, nx), my = canon(-ky, ny);
  return ky > my || (ky == my && kx >= mx);
}

std::vector<QPoint> QLattice::points() const {
  if (nx <= 0 || ny <= 0 || !(h > 0.0)) throw ValidationError("q-lattice is empty or malformed");
  std::vector<QPoint> pts;
  for (int ky = kmin(ny); ky < kmin(ny) + ny; ++ky)
    for (int kx = kmin(nx); kx < kmin(nx) + nx; ++kx)
      if (contains(kx, ky)) pts.push_back({kx, ky, frequency(kx, ky)});
  return pts;
}

bool QLattice::matches(const SpatialGrid& g) const {
  return nx == g.nx() && ny == g.ny() && h == g.h() && origin == g.origin();
}

std::vector<PlaneWave> lattice_waves(const std::vector<QPoint>& points, double eps) {
  std::vector<PlaneWave> w;
  for (const QPoint& p : points) {
    w.push_back({p.q, 0.0, eps});
    w.push_back({p.q, std::numbers::pi / 2, eps});
  }
  return w;
}

const MeasurementTrace* MeasurementSet::find(int kx, int ky, bool sine) const {
  for (const auto& t : traces)
    if (t.kx == kx && t.ky == ky && t.wave.is_sine() == sine) return &t;
  return nullptr;
}

}  // namespace umblt
