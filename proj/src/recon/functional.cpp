#include "umblt/recon/functional.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "umblt/core/errors.hpp"

namespace umblt {

namespace {

using cd = std::complex<double>;

int kmin(int n) { return -(n / 2); }
int canon(int m, int n) { return ((m - kmin(n)) % n + n) % n + kmin(n); }
int wrap(int k, int n) { return ((k % n) + n) % n; }

// In-place 2D DFT on a row-major ny × nx array; sign is FFTW_FORWARD or FFTW_BACKWARD.
void dft2(std::vector<cd>& a, int nx, int ny, int sign) {
  static_assert(sizeof(cd) == sizeof(fftw_complex));
  auto* p = reinterpret_cast<fftw_complex*>(a.data());
  fftw_plan plan = fftw_plan_dft_2d(ny, nx, p, p, sign, FFTW_ESTIMATE);
  if (!plan) throw NumericalError("FFT plan creation failed");
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

void require_lattice(const QLattice& l, const GridPtr& grid) {
  if (!grid || !l.matches(*grid)) throw ValidationError("q-lattice does not match the reconstruction grid");
}

cd phase(const QLattice& l, int kx, int ky) { return std::polar(1.0, dot(l.frequency(kx, ky), l.origin)); }

}  // namespace

const char* to_string(FunctionalProvenance p) {
  switch (p) {
    case FunctionalProvenance::Direct: return "direct";
    case FunctionalProvenance::Reduced: return "reduced";
    case FunctionalProvenance::FromMeasurements: return "from_measurements";
  }
  return "?";
}

cd InternalFunctional::at(int kx, int ky) const {
  return spectrum[static_cast<size_t>(wrap(ky, lattice.ny)) * lattice.nx + wrap(kx, lattice.nx)];
}

AngularField upwind_gradient(const AngularField& u, const DirectionSet& dirs) {
  const SpatialGrid& g = *u.grid();
  const Domain& dom = g.domain();
  const double h = g.h();
  AngularField out(u.grid(), u.n_dir());
  for (int d = 0; d < u.n_dir(); ++d) {
    const Vec2 th = dirs.direction(d);
    for (int a = 0; a < g.active_count(); ++a) {
      const Vec2 x = g.node(a);
      if (dom.contains(x - th * h, 0.0))
        out.at(d, a) = upwind_derivative(u, d, a, th, false);
      else
        out.at(d, a) = (u.interpolate(d, x + th * h) - u.at(d, a)) / h;
    }
  }
  return out;
}

ScalarField functional_reduced(const AngularField& u, const AngularField& v, const DirectionSet& dirs) {
  if (!u.grid()->same_lattice(*v.grid()) || u.n_dir() != v.n_dir() || u.n_dir() != dirs.size())
    throw ValidationError("functional_reduced: u and v live on different grids or direction sets");
  const AngularField du = upwind_gradient(u, dirs);
  ScalarField H(u.grid(), 0.0);
  for (int d = 0; d < dirs.size(); ++d)
    for (int a = 0; a < H.size(); ++a) H[a] += dirs.weight(d) * v.at(d, a) * du.at(d, a);
  return H;
}

ScalarField functional_direct(const RteSolver& solver, const AngularField& u, const AngularField& v,
                              const BoundaryTrace* f_minus, double gate) {
  const DirectionSet& dirs = solver.directions();
  if (!u.grid()->same_lattice(*solver.grid()) || !v.grid()->same_lattice(*solver.grid()) ||
      u.n_dir() != dirs.size() || v.n_dir() != dirs.size())
    throw ValidationError("functional_direct: fields do not match the solver");
  const ScalarField& S = solver.medium().source;
  const ScalarField& sig = solver.medium().sigma;
  if (gate <= 0.0) gate = 100.0 * solver.options().rtol;
  const BoundaryTrace f = f_minus ? *f_minus : solver.zero_inflow();
  const double res = integral_residual(solver, u, S, f);
  if (!(res <= gate)) {
    std::ostringstream os;
    os << "functional_direct: u fails the forward residual gate (" << res << " > " << gate << ")";
    throw NumericalError(os.str());
  }
  const AngularField ku = solver.apply_scattering(u);
  ScalarField H(u.grid(), 0.0);
  for (int d = 0; d < dirs.size(); ++d)
    for (int a = 0; a < H.size(); ++a)
      H[a] += dirs.weight(d) * v.at(d, a) * (S[a] - sig[a] * u.at(d, a) + ku.at(d, a));
  return H;
}

std::vector<cd> forward_transform(const ScalarField& H, const QLattice& l) {
  require_lattice(l, H.grid());
  const SpatialGrid& g = *H.grid();
  std::vector<cd> F(static_cast<size_t>(l.nx) * l.ny, 0.0);
  for (int a = 0; a < g.active_count(); ++a) F[g.box_of_active(a)] = H[a];
  dft2(F, l.nx, l.ny, FFTW_BACKWARD);  // Σ_j H_j e^{+2πi k·j/n}
  const double h2 = l.h * l.h;
  for (int ky = kmin(l.ny); ky < kmin(l.ny) + l.ny; ++ky)
    for (int kx = kmin(l.nx); kx < kmin(l.nx) + l.nx; ++kx) {
      cd& f = F[static_cast<size_t>(wrap(ky, l.ny)) * l.nx + wrap(kx, l.nx)];
      if (l.extent >= 0 && std::max(std::abs(kx), std::abs(ky)) > l.extent)
        f = 0.0;
      else
        f *= h2 * phase(l, kx, ky);
    }
  return F;
}

ScalarField inverse_transform(const std::vector<cd>& spectrum, const QLattice& l, const GridPtr& grid) {
  require_lattice(l, grid);
  if (spectrum.size() != static_cast<size_t>(l.nx) * l.ny) throw ValidationError("spectrum size mismatch");
  std::vector<cd> F(spectrum.size());
  const double h2 = l.h * l.h;
  for (int ky = kmin(l.ny); ky < kmin(l.ny) + l.ny; ++ky)
    for (int kx = kmin(l.nx); kx < kmin(l.nx) + l.nx; ++kx) {
      const size_t i = static_cast<size_t>(wrap(ky, l.ny)) * l.nx + wrap(kx, l.nx);
      F[i] = spectrum[i] * std::conj(phase(l, kx, ky)) / h2;
    }
  dft2(F, l.nx, l.ny, FFTW_FORWARD);
  const double n = static_cast<double>(l.nx) * l.ny;
  ScalarField H(grid, 0.0);
  for (int a = 0; a < grid->active_count(); ++a) H[a] = F[grid->box_of_active(a)].real() / n;
  return H;
}

InternalFunctional make_functional(ScalarField H, const QLattice& lattice, FunctionalProvenance p) {
  InternalFunctional f;
  f.spectrum = forward_transform(H, lattice);
  f.H = std::move(H);
  f.lattice = lattice;
  f.provenance = p;
  return f;
}

double boundary_pairing(const BoundaryTrace& a, const BoundaryTrace& b) {
  if (!a.sampling() || !b.sampling() || !a.sampling()->same_as(*b.sampling()) || a.side() != b.side())
    throw ValidationError("boundary pairing of traces on different samplings");
  const BoundarySampling& s = *a.sampling();
  double p = 0.0;
  for (int d = 0; d < s.n_dir(); ++d) {
    double row = 0.0;
    for (int j = 0; j < s.rays(d); ++j) row += a.at(d, j) * b.at(d, j);
    p += s.weight(d) * row;
  }
  return p;
}

InternalFunctional functional_from_measurements(const MeasurementSet& mset, const BoundaryTrace& g_plus,
                                                const GridPtr& grid) {
  return std::move(functional_from_measurements(mset, std::vector<BoundaryTrace>{g_plus}, grid).front());
}

std::vector<InternalFunctional> functional_from_measurements(const MeasurementSet& mset,
                                                             const std::vector<BoundaryTrace>& g_plus,
                                                             const GridPtr& grid) {
  const QLattice& l = mset.lattice;
  require_lattice(l, grid);
  for (const auto& g : g_plus)
    if (g.side() != BoundarySide::GammaPlus) throw ValidationError("adjoint data must live on Γ+");

  std::map<std::tuple<int, int, bool>, const MeasurementTrace*> by_key;
  for (const auto& t : mset.traces) by_key[{t.kx, t.ky, t.wave.is_sine()}] = &t;
  auto lookup = [&](int kx, int ky, bool sine) -> const MeasurementTrace* {
    auto it = by_key.find({kx, ky, sine});
    return it == by_key.end() ? nullptr : it->second;
  };

  const size_t n = static_cast<size_t>(l.nx) * l.ny;
  std::vector<std::vector<cd>> F(g_plus.size(), std::vector<cd>(n, 0.0));
  const double h2 = l.h * l.h;
  for (const QPoint& p : l.points()) {
    const MeasurementTrace* c = lookup(p.kx, p.ky, false);
    const MeasurementTrace* s = lookup(p.kx, p.ky, true);
    if (!c && !s) {
      std::ostringstream os;
      os << "incomplete q-grid: no trace at k = (" << p.kx << ", " << p.ky << ")";
      throw ValidationError(os.str());
    }
    if (!c || !s) {
      std::ostringstream os;
      os << "missing phase partner at k = (" << p.kx << ", " << p.ky << ")";
      throw ValidationError(os.str());
    }
    if (!c->ok || !s->ok) {
      std::ostringstream os;
      os << "failed trace at k = (" << p.kx << ", " << p.ky << "): " << (c->ok ? s->error : c->error);
      throw ValidationError(os.str());
    }
    const cd ph = std::conj(phase(l, p.kx, p.ky)) / h2;
    const int mx = canon(-p.kx, l.nx), my = canon(-p.ky, l.ny);
    const bool mirror = l.half_space && !(mx == p.kx && my == p.ky);
    for (size_t v = 0; v < g_plus.size(); ++v) {
      const cd G(boundary_pairing(c->values, g_plus[v]), -boundary_pairing(s->values, g_plus[v]));
      const cd f = G * ph;
      F[v][static_cast<size_t>(wrap(p.ky, l.ny)) * l.nx + wrap(p.kx, l.nx)] = f;
      if (mirror) F[v][static_cast<size_t>(wrap(my, l.ny)) * l.nx + wrap(mx, l.nx)] = std::conj(f);
    }
  }

  std::vector<InternalFunctional> out(g_plus.size());
  const double nn = static_cast<double>(n);
  for (size_t v = 0; v < g_plus.size(); ++v) {
    InternalFunctional& r = out[v];
    r.lattice = l;
    r.provenance = FunctionalProvenance::FromMeasurements;
    r.eps = mset.eps;
    r.spectrum.resize(n);
    for (int ky = kmin(l.ny); ky < kmin(l.ny) + l.ny; ++ky)
      for (int kx = kmin(l.nx); kx < kmin(l.nx) + l.nx; ++kx) {
        const size_t i = static_cast<size_t>(wrap(ky, l.ny)) * l.nx + wrap(kx, l.nx);
        r.spectrum[i] = F[v][i] * h2 * phase(l, kx, ky);
      }
    dft2(F[v], l.nx, l.ny, FFTW_FORWARD);
    r.H = ScalarField(grid, 0.0);
    for (int a = 0; a < grid->active_count(); ++a) r.H[a] = F[v][grid->box_of_active(a)].real() / nn;
  }
  return out;
}

}  // namespace umblt
