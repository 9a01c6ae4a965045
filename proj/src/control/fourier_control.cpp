#include "umblt/control/fourier_control.hpp"

#include <cmath>
#include <sstream>

#include "umblt/core/errors.hpp"

namespace umblt {

namespace {

constexpr int kMaxTerms = 400;

double log_tail(double cr, int n) { return n * std::log(cr) - std::lgamma(n + 1.0); }

}  // namespace

FourierControl::FourierControl(double sigma, const ScatteringKernel& kernel, Vec2 x0, int m, double radius, int N,
                               double tol)
    : sigma_(sigma), x0_(x0), m_(m), radius_(radius) {
  if (!std::isfinite(sigma) || !(radius > 0.0) || !(tol > 0.0))
    throw ValidationError("Fourier control needs finite sigma, radius > 0 and tol > 0");
  std::vector<double> lam(kMaxTerms + 1);
  for (int j = 0; j <= kMaxTerms; ++j) {
    lam[j] = kernel.eigenvalue(m + j);
    C_ = std::max(C_, std::abs(lam[j] - sigma));
  }
  const double cr = C_ * radius;
  auto tail_of = [&](int n) { return cr > 0.0 ? std::exp(log_tail(cr, n)) : 0.0; };
  if (N < 0 && cr == 0.0) {
    N = 0;  // every a_n with n > m vanishes
  } else if (N < 0) {
    N = 0;
    while (!(tail_of(N) < tol)) {
      if (++N > kMaxTerms) throw NumericalError("Fourier control truncation does not reach its tolerance");
    }
  } else if (N > kMaxTerms) {
    throw ValidationError("Fourier control truncation is above the supported term count");
  } else if (!(tail_of(N) < tol)) {
    std::ostringstream os;
    os << "truncation N = " << N << " leaves tail bound " << tail_of(N) << " above " << tol;
    throw ValidationError(os.str());
  }
  N_ = N;
  tail_ = tail_of(N);
  lambda_.assign(lam.begin(), lam.begin() + N + 1);
  a_.assign(N + 1, 0.0);
  a_[0] = 1.0;
  for (int p = 0; p < N; ++p) a_[p + 1] = a_[p] * (lambda_[p] - sigma) / (p + 1);
}

double FourierControl::eigenvalue(int n) const {
  const int p = n - m_;
  if (p < 0 || p > N_) throw ValidationError("harmonic index outside the series");
  return lambda_[p];
}

double FourierControl::coefficient(int n) const {
  const int p = n - m_;
  return (p < 0 || p > N_) ? 0.0 : a_[p];
}

FourierControl::Complex FourierControl::harmonic(int n, Vec2 x) const {
  const int p = n - m_;
  if (p < 0 || p > N_) return 0.0;
  Complex zp = 1.0;
  for (int i = 0; i < p; ++i) zp *= zeta(x);
  return a_[p] * zp;
}

FourierControl::Complex FourierControl::value(Vec2 x, double t) const {
  const Complex z = zeta(x);
  Complex s = 0.0, zp = 1.0;
  for (int p = 0; p <= N_; ++p) {
    s += a_[p] * zp * std::polar(1.0, (m_ + p) * t);
    zp *= z;
  }
  return s;
}

FourierControl::Complex FourierControl::directional_derivative(Vec2 x, double t) const {
  // ∂_z̄ (a_p ζ^p) = p a_p ζ^{p−1}, then θ·∇ contributes e^{−it}.
  const Complex z = zeta(x);
  Complex s = 0.0, zp = 1.0;
  for (int p = 1; p <= N_; ++p) {
    s += static_cast<double>(p) * a_[p] * zp * std::polar(1.0, (m_ + p - 1) * t);
    zp *= z;
  }
  return s;
}

FourierControl::Complex FourierControl::truncation_residual(Vec2 x, double t) const {
  return (sigma_ - lambda_[N_]) * harmonic(m_ + N_, x) * std::polar(1.0, (m_ + N_) * t);
}

double FourierControl::residual_bound() const {
  return std::abs(sigma_ - lambda_[N_]) * std::abs(a_[N_]) * std::pow(radius_, N_);
}

AngularField FourierControl::field(const GridPtr& grid, const DirectionSet& dirs, bool imaginary) const {
  AngularField f(grid, dirs.size());
  for (int d = 0; d < dirs.size(); ++d)
    for (int a = 0; a < grid->active_count(); ++a) {
      Complex v = value(grid->node(a), dirs.angle(d));
      f.at(d, a) = imaginary ? v.imag() : v.real();
    }
  return f;
}

BoundaryTrace FourierControl::trace(const SamplingPtr& s, BoundarySide side, bool imaginary) const {
  BoundaryTrace tr(side, s);
  const DirectionSet& dirs = s->directions();
  for (int d = 0; d < s->n_dir(); ++d)
    for (int j = 0; j < s->rays(d); ++j) {
      Complex v = value(tr.point(d, j), dirs.angle(d));
      tr.at(d, j) = imaginary ? v.imag() : v.real();
    }
  return tr;
}

AngularField fourier_control_2d(double sigma, const ScatteringKernel& kernel, Vec2 x0, int m, const GridPtr& grid,
                                const DirectionSet& dirs, int N) {
  Vec2 lo, hi;
  grid->domain().bounding_box(lo, hi);
  double r = 0.0;
  for (Vec2 c : {lo, hi, Vec2{lo.x, hi.y}, Vec2{hi.x, lo.y}}) r = std::max(r, norm(c - x0));
  return FourierControl(sigma, kernel, x0, m, r, N).field(grid, dirs);
}

}  // namespace umblt
