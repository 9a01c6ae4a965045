#include "umblt/core/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "umblt/core/errors.hpp"

namespace umblt {

namespace {
constexpr double kPi = std::numbers::pi;

double fold_angle(double g) {
  g = std::fmod(std::abs(g), 2.0 * kPi);
  return g > kPi ? 2.0 * kPi - g : g;
}
}  // namespace

ScatteringKernel ScatteringKernel::isotropic(double value) { return fourier({value}); }

ScatteringKernel ScatteringKernel::fourier(std::vector<double> coeffs) {
  if (coeffs.empty()) throw ValidationError("kernel needs at least one Fourier coefficient");
  for (double c : coeffs)
    if (!std::isfinite(c)) throw ValidationError("kernel coefficient is not finite");
  ScatteringKernel k;
  k.coeffs_ = std::move(coeffs);
  return k;
}

ScatteringKernel ScatteringKernel::tabulated(std::vector<double> gamma, std::vector<double> values) {
  if (gamma.size() < 2 || gamma.size() != values.size())
    throw ValidationError("tabulated kernel needs matching gamma/value arrays of length ≥ 2");
  if (std::abs(gamma.front()) > 1e-12 || std::abs(gamma.back() - kPi) > 1e-12)
    throw ValidationError("tabulated kernel must span gamma ∈ [0, π]");
  for (size_t i = 1; i < gamma.size(); ++i)
    if (!(gamma[i] > gamma[i - 1])) throw ValidationError("tabulated kernel gamma must increase");
  ScatteringKernel k;
  k.coeffs_.reset();
  k.gamma_ = std::move(gamma);
  k.values_ = std::move(values);
  return k;
}

ScatteringKernel ScatteringKernel::henyey_greenstein(double g, int n_terms) {
  if (!(std::abs(g) < 1.0)) throw ValidationError("Henyey–Greenstein anisotropy must satisfy |g| < 1");
  std::vector<double> c(std::max(1, n_terms));
  for (size_t n = 0; n < c.size(); ++n) c[n] = std::pow(g, static_cast<double>(n)) / (2.0 * kPi);
  return fourier(std::move(c));
}

double ScatteringKernel::operator()(double gamma) const {
  if (coeffs_) {
    const auto& c = *coeffs_;
    double r = c[0];
    for (size_t n = 1; n < c.size(); ++n) r += 2.0 * c[n] * std::cos(static_cast<double>(n) * gamma);
    return r;
  }
  double g = fold_angle(gamma);
  auto it = std::upper_bound(gamma_.begin(), gamma_.end(), g);
  size_t i = std::clamp<size_t>(static_cast<size_t>(it - gamma_.begin()), 1, gamma_.size() - 1) - 1;
  double t = (g - gamma_[i]) / (gamma_[i + 1] - gamma_[i]);
  return (1 - t) * values_[i] + t * values_[i + 1];
}

ScatteringKernel ScatteringKernel::scaled(double s) const {
  ScatteringKernel k = *this;
  if (k.coeffs_)
    for (double& c : *k.coeffs_) c *= s;
  for (double& v : k.values_) v *= s;
  return k;
}

ScatteringKernel ScatteringKernel::normalized(const DirectionSet& dirs) const {
  double m = quadrature_mass(dirs);
  if (!(m > 0.0)) throw ValidationError("cannot normalize a kernel with non-positive mass");
  return scaled(1.0 / m);
}

std::vector<double> ScatteringKernel::circulant_row(const DirectionSet& dirs) const {
  std::vector<double> row(dirs.size());
  for (int m = 0; m < dirs.size(); ++m) row[m] = (*this)(dirs.angle(m));
  return row;
}

double ScatteringKernel::quadrature_mass(const DirectionSet& dirs) const {
  auto row = circulant_row(dirs);
  double s = 0.0;
  for (int m = 0; m < dirs.size(); ++m) s += dirs.weight(m) * row[m];
  return s;
}

double ScatteringKernel::eigenvalue(int n) const {
  n = std::abs(n);
  if (coeffs_) return n < static_cast<int>(coeffs_->size()) ? 2.0 * kPi * (*coeffs_)[n] : 0.0;
  const int m = 1 << 14;
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    double g = 2.0 * kPi * i / m;
    s += (*this)(g) * std::cos(n * g);
  }
  return s * 2.0 * kPi / m;
}

bool ScatteringKernel::is_isotropic() const {
  if (coeffs_) return std::all_of(coeffs_->begin() + 1, coeffs_->end(), [](double c) { return c == 0.0; });
  return std::all_of(values_.begin(), values_.end(), [&](double v) { return v == values_.front(); });
}

double ScatteringKernel::min_value() const {
  if (!coeffs_) return *std::min_element(values_.begin(), values_.end());
  double m = (*this)(0.0);
  for (int i = 1; i <= 4096; ++i) m = std::min(m, (*this)(kPi * i / 4096));
  return m;
}

std::string ScatteringKernel::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (coeffs_) {
    os << "fourier[";
    for (size_t n = 0; n < coeffs_->size(); ++n) os << (n ? "," : "") << (*coeffs_)[n];
    os << "]";
  } else {
    os << "tabulated[";
    for (size_t i = 0; i < gamma_.size(); ++i) os << (i ? ";" : "") << gamma_[i] << ":" << values_[i];
    os << "]";
  }
  return os.str();
}

}  // namespace umblt
