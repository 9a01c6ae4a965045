#include "umblt/control/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "umblt/core/errors.hpp"
#include "umblt/solver/gauss_legendre.hpp"

namespace umblt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double polar_angle(Vec2 y) {
  double t = std::atan2(y.y, y.x);
  return t < 0.0 ? t + kTwoPi : t;
}

int ring_size(double r, double spacing) { return std::max(16, static_cast<int>(std::ceil(kTwoPi * r / spacing))); }

}  // namespace

PointMedium PointMedium::of(const OpticalMedium& m) {
  PointMedium p;
  p.kernel = m.kernel;
  if (m.model && m.model->sigma) {
    auto model = m.model;
    p.sigma = [model](Vec2 x) { return model->sigma(x); };
    p.amplitude = model->kernel_amplitude ? std::function<double(Vec2)>([model](Vec2 x) {
      return model->kernel_amplitude(x);
    })
                                          : std::function<double(Vec2)>([](Vec2) { return 1.0; });
  } else {
    ScalarField s = m.sigma, a = m.kernel_amplitude;
    p.sigma = [s](Vec2 x) { return std::max(0.0, s.interpolate(x)); };
    p.amplitude = [a](Vec2 x) { return std::max(0.0, a.interpolate(x)); };
  }
  return p;
}

void PolarField::formula(int k, double r_out, int m_out, Vec2 y, int d, std::vector<Term>& end,
                         std::vector<Term>& q_in, std::vector<Term>& q_out) const {
  static thread_local GaussLegendre gl(4);
  if (gl.order != opts_.quad_order) gl = GaussLegendre(opts_.quad_order);
  end.clear();
  q_in.clear();
  q_out.clear();
  const Vec2 th = dirs_.direction(d);
  const double r_in = radii_[k];
  const int m_in = m_[k];
  const Vec2 yy = y - c_;
  const double b = dot(yy, th), rr = dot(yy, yy);
  const double disc = b * b - (rr - r_in * r_in);

  auto on_ring = [](int m, Vec2 p, double coef, std::vector<Term>& out) {
    const double s = polar_angle(p) / kTwoPi * m;
    const double fl = std::floor(s);
    const double w = s - fl;
    const int i0 = ((static_cast<int>(fl) % m) + m) % m;
    out.push_back({i0, (1.0 - w) * coef});
    out.push_back({(i0 + 1) % m, w * coef});
  };
  const double width = r_out - r_in;
  auto add_q = [&](Vec2 p, double coef) {
    const double lam = width > 0.0 ? std::clamp((norm(p) - r_in) / width, 0.0, 1.0) : 1.0;
    on_ring(m_in, p, (1.0 - lam) * coef, q_in);
    on_ring(m_out, p, lam * coef, q_out);
  };
  // ∫₀^len Q(y + sgn·s·θ) ds scaled by outer.
  auto integrate = [&](double len, double sgn, double outer) {
    if (!(len > 0.0)) return;
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / spacing_)));
    const double hl = len / pieces;
    for (int p = 0; p < pieces; ++p)
      for (int g = 0; g < gl.order; ++g) {
        const double s = (p + 0.5 * (gl.node[g] + 1.0)) * hl;
        add_q(yy + th * (sgn * s), outer * 0.5 * hl * gl.weight[g]);
      }
  };

  if (disc >= 0.0 && b > 0.0) {
    const double t = b - std::sqrt(disc);
    on_ring(m_in, yy - th * t, 1.0, end);
    integrate(t, -1.0, 1.0);
  } else if (disc >= 0.0) {
    const double t = -b - std::sqrt(disc);
    on_ring(m_in, yy + th * t, 1.0, end);
    integrate(t, 1.0, -1.0);
  } else if (opts_.miss == MissData::Extrapolate) {
    // Data at the closest approach y − bθ, moved across the line onto the inner circle.
    on_ring(m_in, yy - th * b, 1.0, end);
    if (b > 0.0) integrate(b, -1.0, 1.0);
    else integrate(-b, 1.0, -1.0);
  } else {
    integrate(b + std::sqrt(std::max(0.0, b * b - rr + r_out * r_out)), -1.0, 1.0);
  }
}

double PolarField::annulus_value(int k, Vec2 y, int d) const {
  std::vector<Term> end, qi, qo;
  formula(k, radii_[k + 1], m_[k + 1], y, d, end, qi, qo);
  double v = 0.0;
  for (const Term& t : end) v += t.c * u_[k][t.i * nd_ + d];
  for (const Term& t : qi) v += t.c * q_[k][t.i * nd_ + d];
  for (const Term& t : qo) v += t.c * q_[k + 1][t.i * nd_ + d];
  return v;
}

std::vector<double> PolarField::collision(Vec2 x, const std::vector<double>& u) const {
  const double s = med_.sigma(x), amp = med_.amplitude(x);
  std::vector<double> q(nd_);
  for (int d = 0; d < nd_; ++d) {
    double ku = 0.0;
    for (int j = 0; j < nd_; ++j) ku += wrow_[dirs_.offset(d, j)] * u[j];
    q[d] = -s * u[d] + amp * ku;
  }
  return q;
}

double PolarField::evaluate(Vec2 x, int d) const {
  const double rho = norm(x - c_);
  if (rho <= r1_) {
    return inner_->transport().evaluate_point(x, d, q1_, &f1_);
  }
  if (rho > radii_.back() * (1.0 + 1e-12)) throw ValidationError("point lies outside the propagated ball");
  int k = static_cast<int>(std::lower_bound(radii_.begin(), radii_.end(), rho) - radii_.begin()) - 1;
  k = std::clamp(k, 0, rings() - 2);
  return annulus_value(k, x, d);
}

std::vector<double> PolarField::evaluate(Vec2 x) const {
  std::vector<double> v(nd_);
  const double rho = norm(x - c_);
  if (rho <= r1_) {
    for (int d = 0; d < nd_; ++d) v[d] = inner_->transport().evaluate_point(x, d, q1_, &f1_);
    return v;
  }
  for (int d = 0; d < nd_; ++d) v[d] = evaluate(x, d);
  return v;
}

AngularField PolarField::to_grid(const GridPtr& grid) const {
  AngularField out(grid, nd_);
  for (int a = 0; a < grid->active_count(); ++a) {
    std::vector<double> v = evaluate(grid->node(a));
    for (int d = 0; d < nd_; ++d) out.at(d, a) = v[d];
  }
  return out;
}

BoundaryTrace PolarField::trace(const SamplingPtr& s, BoundarySide side) const {
  BoundaryTrace t(side, s);
  for (int d = 0; d < s->n_dir(); ++d)
    for (int j = 0; j < s->rays(d); ++j) t.at(d, j) = evaluate(t.point(d, j), d);
  return t;
}

double PolarField::characteristic_residual(const std::vector<Vec2>& points, double delta) const {
  double scale = 0.0;
  for (const auto& ring : u_)
    for (double v : ring) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (Vec2 x : points) {
    std::vector<double> u = evaluate(x);
    std::vector<double> q = collision(x, u);
    for (int d = 0; d < nd_; ++d) {
      const Vec2 th = dirs_.direction(d);
      const double du = (evaluate(x + th * delta, d) - evaluate(x - th * delta, d)) / (2.0 * delta);
      worst = std::max(worst, std::abs(du - q[d]));
    }
  }
  return scale > 0.0 ? worst / scale : worst;
}

PolarField propagate(std::shared_ptr<const RteSolver> inner, const AngularField& v1, const BoundaryTrace& f1,
                     const PointMedium& medium, double outer_radius, double a, const PropagationOptions& opts) {
  const Disk* disk = inner->grid()->domain().as_disk();
  if (!disk) throw ValidationError("propagation needs a disk as the inner domain");
  if (!(outer_radius > disk->radius)) throw ValidationError("outer radius must exceed the inner radius");
  if (!(opts.start_fraction > 0.0 && opts.start_fraction <= 1.0))
    throw ValidationError("start_fraction must lie in (0, 1]");
  if (!(a > 0.0) || !(opts.a_delta > 0.0) || !(opts.a_delta < 1.0))
    throw ValidationError("propagation needs a > 0 and 0 < a_delta < 1");
  if (opts.quad_order < 1) throw ValidationError("quad_order must be ≥ 1");
  if (v1.n_dir() != inner->directions().size() || v1.n_nodes() != inner->grid()->active_count())
    throw ValidationError("inner solution does not match the inner solver");

  PolarField pf;
  pf.c_ = disk->center;
  pf.dirs_ = inner->directions();
  pf.nd_ = pf.dirs_.size();
  pf.med_ = medium;
  pf.opts_ = opts;
  pf.inner_ = inner;
  pf.v1_ = v1;
  pf.f1_ = f1;
  pf.spacing_ = opts.ring_spacing > 0.0 ? opts.ring_spacing : inner->grid()->h();
  const int nd = pf.nd_;
  pf.wrow_.resize(nd);
  for (int m = 0; m < nd; ++m) pf.wrow_[m] = pf.dirs_.weight(m) * medium.kernel(pf.dirs_.angle(m));

  const ScalarField zero(inner->grid(), 0.0);
  pf.rep_.input_residual = integral_residual(*inner, v1, zero, f1);
  if (pf.rep_.input_residual > opts.residual_gate * inner->options().rtol) {
    std::ostringstream os;
    os << "inner solution fails the residual gate (" << pf.rep_.input_residual << ")";
    throw ValidationError(os.str());
  }

  // Ring 0: the inner solution on a circle inside its disk.
  pf.r1_ = disk->radius;
  const double r0 = opts.start_fraction * disk->radius;
  const int m0 = ring_size(r0, pf.spacing_);
  pf.radii_.push_back(r0);
  pf.m_.push_back(m0);
  std::vector<double> u0(static_cast<size_t>(m0) * nd);
  pf.q1_ = inner->collision_source(v1, zero);
  for (int i = 0; i < m0; ++i) {
    const double phi = kTwoPi * i / m0;
    Vec2 x = pf.c_ + Vec2{std::cos(phi), std::sin(phi)} * r0;
    for (int d = 0; d < nd; ++d) u0[i * nd + d] = inner->transport().evaluate_point(x, d, pf.q1_, &f1);
  }
  auto ring_collision = [&](double r, int m, const std::vector<double>& u) {
    std::vector<double> q(u.size());
    std::vector<double> ui(nd);
    for (int i = 0; i < m; ++i) {
      const double phi = kTwoPi * i / m;
      Vec2 x = pf.c_ + Vec2{std::cos(phi), std::sin(phi)} * r;
      std::copy(u.begin() + i * nd, u.begin() + (i + 1) * nd, ui.begin());
      std::vector<double> qi = pf.collision(x, ui);
      std::copy(qi.begin(), qi.end(), q.begin() + i * nd);
    }
    return q;
  };
  pf.q_.push_back(ring_collision(r0, m0, u0));
  pf.u_.push_back(std::move(u0));
  double ring0_max = 0.0;
  for (double v : pf.u_[0]) ring0_max = std::max(ring0_max, std::abs(v));
  double global_max = ring0_max;

  const double delta0 = opts.a_delta / a;
  std::vector<PolarField::Term> end, qi, qo;
  while (pf.radii_.back() < outer_radius) {
    const int k = pf.rings() - 1;
    if (k >= opts.max_annuli) throw NumericalError("annulus schedule exceeds its budget");
    const double rk = pf.radii_[k];
    const auto& uk = pf.u_[k];
    const auto& qk = pf.q_[k];
    double delta = delta0;
    int halvings = 0;
    while (true) {
      const double r_out = std::min(std::sqrt(rk * rk + 0.25 * delta * delta), std::max(outer_radius, rk * (1 + 1e-9)));
      const int m_out = ring_size(r_out, pf.spacing_);
      const size_t n = static_cast<size_t>(m_out) * nd;
      // u_out = C + A·Q_out with A sparse over ring-(k+1) points of the same direction.
      std::vector<double> C(n, 0.0);
      std::vector<size_t> row(n + 1, 0);
      std::vector<int> col;
      std::vector<double> val;
      std::vector<double> sig_o(m_out), amp_o(m_out);
      for (int i = 0; i < m_out; ++i) {
        const double phi = kTwoPi * i / m_out;
        const Vec2 x = pf.c_ + Vec2{std::cos(phi), std::sin(phi)} * r_out;
        sig_o[i] = medium.sigma(x);
        amp_o[i] = medium.amplitude(x);
        for (int d = 0; d < nd; ++d) {
          const size_t r = static_cast<size_t>(i) * nd + d;
          pf.formula(k, r_out, m_out, x, d, end, qi, qo);
          double c = 0.0;
          for (const auto& t : end) c += t.c * uk[t.i * nd + d];
          for (const auto& t : qi) c += t.c * qk[t.i * nd + d];
          C[r] = c;
          for (const auto& t : qo) {
            col.push_back(t.i * nd + d);
            val.push_back(t.c);
          }
          row[r + 1] = col.size();
        }
      }
      // Initial guess: the inner ring projected radially.
      std::vector<double> u(n), q(n), un(n);
      for (int i = 0; i < m_out; ++i) {
        const double s = static_cast<double>(i) / m_out * pf.m_[k];
        const int i0 = static_cast<int>(s) % pf.m_[k], i1 = (i0 + 1) % pf.m_[k];
        const double w = s - std::floor(s);
        for (int d = 0; d < nd; ++d) u[i * nd + d] = (1 - w) * uk[i0 * nd + d] + w * uk[i1 * nd + d];
      }
      auto collide = [&](const std::vector<double>& uu, std::vector<double>& qq) {
        for (int i = 0; i < m_out; ++i)
          for (int d = 0; d < nd; ++d) {
            double ku = 0.0;
            for (int j = 0; j < nd; ++j) ku += pf.wrow_[pf.dirs_.offset(d, j)] * uu[i * nd + j];
            qq[i * nd + d] = -sig_o[i] * uu[i * nd + d] + amp_o[i] * ku;
          }
      };
      bool converged = false;
      double prev = -1.0;
      int rising = 0, sweeps = 0;
      while (sweeps < opts.max_iter) {
        collide(u, q);
        double diff = 0.0, umax = 0.0;
        for (size_t r = 0; r < n; ++r) {
          double v = C[r];
          for (size_t p = row[r]; p < row[r + 1]; ++p) v += val[p] * q[col[p]];
          un[r] = v;
          diff = std::max(diff, std::abs(v - u[r]));
          umax = std::max(umax, std::abs(v));
        }
        u.swap(un);
        ++sweeps;
        if (prev > 0.0) {
          const double ratio = diff / prev;
          pf.rep_.max_ratio = std::max(pf.rep_.max_ratio, ratio);
          rising = ratio >= 1.0 ? rising + 1 : 0;
        }
        prev = diff;
        if (diff <= opts.rtol * std::max(global_max, umax) || diff == 0.0) {
          converged = true;
          break;
        }
        if (rising >= 3) break;
      }
      pf.rep_.sweeps += sweeps;
      if (!converged) {
        if (++halvings > opts.max_halvings) throw NumericalError("annulus fixed point does not contract");
        ++pf.rep_.halvings;
        delta *= 0.5;
        continue;
      }
      collide(u, q);
      for (double v : u) global_max = std::max(global_max, std::abs(v));
      pf.rep_.max_a_delta = std::max(pf.rep_.max_a_delta, a * 2.0 * std::sqrt(r_out * r_out - rk * rk));
      pf.radii_.push_back(r_out);
      pf.m_.push_back(m_out);
      pf.u_.push_back(std::move(u));
      pf.q_.push_back(std::move(q));
      ++pf.rep_.annuli;
      break;
    }
  }
  pf.rep_.growth = ring0_max > 0.0 ? global_max / ring0_max : 0.0;
  return pf;
}

}  // namespace umblt
