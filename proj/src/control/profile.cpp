#include "umblt/control/profile.hpp"

#include <cmath>
#include <numbers>

#include "umblt/core/errors.hpp"

namespace umblt {

AngularProfile AngularProfile::from_function(const DirectionSet& dirs, const std::function<double(double)>& f) {
  AngularProfile p;
  p.h.resize(dirs.size());
  for (int i = 0; i < dirs.size(); ++i) p.h[i] = f(dirs.angle(i));
  return p;
}

double AngularProfile::l1(const DirectionSet& dirs) const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += dirs.weight(i) * std::abs(h[i]);
  return s;
}

double AngularProfile::linf() const {
  double m = 0.0;
  for (double v : h) m = std::max(m, std::abs(v));
  return m;
}

AngularProfile AngularProfile::reversed(const DirectionSet& dirs) const {
  AngularProfile p;
  p.h.resize(h.size());
  for (int i = 0; i < size(); ++i) p.h[i] = h[dirs.opposite(i)];
  return p;
}

void AngularProfile::require_finite() const {
  for (double v : h)
    if (!std::isfinite(v)) throw ValidationError("angular profile has non-finite values");
}

AngularProfile bump_profile(const DirectionSet& dirs, double theta0, double width) {
  constexpr double tau = 2.0 * std::numbers::pi;
  if (!(width >= 2.0 * dirs.spacing() * (1.0 - 1e-12)))
    throw ValidationError("bump width is below two direction spacings");
  if (!std::isfinite(theta0)) throw ValidationError("bump center must be finite");
  AngularProfile p;
  p.h.assign(dirs.size(), 0.0);
  double mass = 0.0;
  for (int i = 0; i < dirs.size(); ++i) {
    // Signed angular distance in (−π, π].
    double d = std::remainder(dirs.angle(i) - theta0, tau);
    if (std::abs(d) < width / 2) p.h[i] = 0.5 * (1.0 + std::cos(tau * d / width));
    mass += dirs.weight(i) * p.h[i];
  }
  if (!(mass > 0.0)) throw ValidationError("bump has no mass on the quadrature");
  for (double& v : p.h) v /= mass;
  return p;
}

double default_bump_width(const DirectionSet& dirs) { return 4.0 * dirs.spacing(); }

}  // namespace umblt
