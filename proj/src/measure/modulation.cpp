#include "umblt/measure/modulation.hpp"

#include <cmath>
#include <numbers>

#include "umblt/core/errors.hpp"

namespace umblt {

namespace {
constexpr double kHalfPi = std::numbers::pi / 2;
}

double PlaneWave::pattern(Vec2 x) const {
  // Exact sine branch so that φ = π/2 does not pick up cos(π/2) ≈ 6e−17.
  const double s = dot(q, x);
  return is_sine() ? -std::sin(s) : std::cos(s);
}

bool PlaneWave::is_sine() const { return phi != 0.0; }

void PlaneWave::validate() const {
  if (!(eps >= 0.0 && eps < 1.0)) throw ValidationError("modulation amplitude eps must lie in [0, 1)");
  if (phi != 0.0 && std::abs(phi - kHalfPi) > 1e-15) throw ValidationError("modulation phase must be 0 or pi/2");
  if (!std::isfinite(q.x) || !std::isfinite(q.y)) throw ValidationError("wave vector must be finite");
}

std::vector<double> modulation_pattern(const SpatialGrid& grid, const PlaneWave& wave) {
  std::vector<double> c(grid.active_count());
  for (int a = 0; a < grid.active_count(); ++a) c[a] = wave.pattern(grid.node(a));
  return c;
}

OpticalMedium modulate(const OpticalMedium& medium, const PlaneWave& wave) {
  wave.validate();
  OpticalMedium m = medium;
  if (wave.eps == 0.0) return m;
  const auto c = modulation_pattern(*medium.grid(), wave);
  for (int a = 0; a < medium.sigma.size(); ++a) {
    const double f = 1.0 + wave.eps * c[a];
    m.sigma[a] *= f;
    m.source[a] *= f;
    m.kernel_amplitude[a] *= f;
  }
  if (medium.model) {
    auto src = medium.model;
    auto mm = std::make_shared<MediumModel>(*src);
    auto factor = [wave](Vec2 x) { return 1.0 + wave.eps * wave.pattern(x); };
    mm->sigma = [src, factor](Vec2 x) { return factor(x) * src->sigma(x); };
    mm->source = [src, factor](Vec2 x) { return src->source ? factor(x) * src->source(x) : 0.0; };
    mm->kernel_amplitude = [src, factor](Vec2 x) {
      return src->kernel_amplitude ? factor(x) * src->kernel_amplitude(x) : factor(x);
    };
    m.model = std::move(mm);
  }
  m.validate();
  return m;
}

}  // namespace umblt
