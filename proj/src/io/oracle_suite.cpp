#include "umblt/io/oracle_suite.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>

#include "oracle/dense.hpp"
#include "umblt/control/fourier_control.hpp"
#include "umblt/measure/measurement.hpp"
#include "umblt/recon/functional.hpp"

namespace umblt {

namespace {

double rel(const AngularField& a, const AngularField& b) {
  const double s = b.max_abs();
  return s > 0.0 ? max_abs_diff(a, b) / s : max_abs_diff(a, b);
}

double rel(const BoundaryTrace& a, const BoundaryTrace& b) {
  double m = 0.0, s = 0.0;
  for (int k = 0; k < a.size(); ++k) {
    m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
    s = std::max(s, std::abs(b.values()[k]));
  }
  return s > 0.0 ? m / s : m;
}

OracleCheck check(std::string name, double value, double tol, std::string detail = "") {
  return {std::move(name), value, tol, value <= tol, std::move(detail)};
}

BoundaryTrace random_trace(const RteSolver& s, BoundarySide side, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  BoundaryTrace t(side, s.sampling());
  for (double& v : t.values()) v = U(rng);
  return t;
}

}  // namespace

OpticalMedium random_tiny_medium(std::mt19937_64& rng, bool absorption, const DirectionSet& dirs) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Domain d = absorption ? Domain::disk({0, 0}, 1.0) : Domain::rectangle({0, 0}, {0.5, 0.4});
  const double s0 = absorption ? 1.5 + U(rng) : 0.2 * U(rng), sx = U(rng), g = 0.3 * U(rng), ph = U(rng);
  const double mass = absorption ? 0.5 + 0.5 * U(rng) : 1.0 + 0.2 * U(rng);
  auto model = std::make_shared<MediumModel>();
  model->sigma = [=](Vec2 p) { return s0 + 0.2 * sx * p.x * p.x; };
  model->source = [=](Vec2 p) { return 1.0 + std::sin(3.0 * p.x + ph) * p.y; };
  model->kernel = ScatteringKernel::henyey_greenstein(g, 3).normalized(dirs).scaled(mass);
  model->label = absorption ? "tiny absorption" : "tiny smallness";
  return OpticalMedium::sample(model, SpatialGrid::covering(d, 5));
}

std::vector<OracleCheck> run_oracle_suite(std::uint64_t seed, int instances) {
  std::mt19937_64 rng(seed);
  const DirectionSet q8 = DirectionSet::uniform(8);
  SolverOptions tight;
  tight.rtol = 1e-14;
  tight.workers = 1;
  std::vector<OracleCheck> out;

  double fwd = 0.0, adj = 0.0, meas = 0.0;
  int modes[2] = {0, 0};
  for (int i = 0; i < instances; ++i) {
    const bool absorb = i % 2 == 0;
    RteSolver s(random_tiny_medium(rng, absorb, q8), q8, tight);
    modes[s.certificate().mode == CertificateMode::Absorption ? 0 : 1]++;
    const BoundaryTrace fm = random_trace(s, BoundarySide::GammaMinus, rng);
    fwd = std::max(fwd, rel(s.solve_forward(s.medium().source, fm).u, oracle::dense_forward(s, s.medium().source, fm)));
    const BoundaryTrace fp = random_trace(s, BoundarySide::GammaPlus, rng);
    adj = std::max(adj, rel(s.solve_adjoint(fp).u, oracle::dense_adjoint(s, fp)));
    if (i < 4) {
      MeasurementEngine eng(s);
      const PlaneWave w{{2.0 + i, -1.0}, i % 2 ? std::numbers::pi / 2 : 0.0, 1e-2};
      const MeasurementTrace t = eng.measure(w);
      const auto dm = oracle::dense_measurement(s, modulation_pattern(*s.grid(), w), w.eps);
      meas = std::max(meas, t.ok ? rel(t.values, dm.trace) : INFINITY);
    }
  }
  const std::string mix = std::to_string(modes[0]) + " absorption, " + std::to_string(modes[1]) + " smallness";
  out.push_back(check("forward solve vs dense direct solve", fwd, 1e-9, mix));
  out.push_back(check("adjoint solve vs dense direct solve", adj, 1e-9, mix));
  out.push_back(check("modulated trace vs dense modulated system", meas, 1e-9, "4 instances"));

  {
    const Domain d = Domain::disk({0, 0}, 1.0);
    const DirectionSet q = DirectionSet::uniform(16);
    auto model = std::make_shared<MediumModel>();
    model->sigma = [](Vec2) { return 1.3; };
    model->source = [](Vec2) { return 0.7; };
    model->kernel = ScatteringKernel::isotropic(0.0);
    RteSolver s(OpticalMedium::sample(model, SpatialGrid::covering(d, 9)), q, tight);
    const AngularField u = s.solve_forward().u;
    double err = 0.0;
    for (int k = 0; k < q.size(); ++k)
      for (int a = 0; a < s.grid()->active_count(); ++a) {
        const double tau = exit_time(d, s.grid()->node(a), q.direction(k), Sign::Backward);
        err = std::max(err, std::abs(u.at(k, a) - oracle::transparent_constant(0.7, 1.3, tau)));
      }
    out.push_back(check("transparent constant medium vs chord formula", err, 1e-8));
  }

  {
    const double c = 2.0;
    const Vec2 x0{0.1, 0.3};
    double err = 0.0;
    for (int m : {0, 1, -1, 3, -3}) {
      FourierControl f(c, ScatteringKernel::isotropic(0.0), x0, m, 1.5);
      for (int i = 0; i < 30; ++i) {
        const Vec2 x = x0 + Vec2{std::cos(0.7 * i), std::sin(0.7 * i)} * (0.05 * i);
        for (double t : {0.0, 0.9, 2.5, 4.1}) {
          const std::complex<double> zb(x.x - x0.x, -(x.y - x0.y));
          const auto exact = std::polar(1.0, m * t) * std::exp(-c * zb * std::polar(1.0, t));
          err = std::max(err, std::abs(f.value(x, t) - exact));
        }
      }
    }
    out.push_back(check("harmonic series (k = 0) vs closed form", err, 1e-10, "m in {0, +-1, +-3}"));
  }

  {
    RteSolver s(random_tiny_medium(rng, false, q8), q8, tight);
    const AngularField u = oracle::dense_forward(s, s.medium().source, s.zero_inflow());
    const AngularField v = oracle::dense_adjoint(s, random_trace(s, BoundarySide::GammaPlus, rng));
    const Eigen::VectorXd ku = oracle::scattering_matrix(s) * oracle::to_dense(s, u);
    const int n = s.grid()->active_count();
    ScalarField ref(s.grid(), 0.0);
    for (int d = 0; d < q8.size(); ++d)
      for (int a = 0; a < n; ++a)
        ref[a] += q8.weight(d) * v.at(d, a) *
                  (s.medium().source[a] - s.medium().sigma[a] * u.at(d, a) + ku[oracle::dense_index(s, d, a)]);
    const double e = max_abs_diff(functional_direct(s, u, v), ref) / ref.max_abs();
    out.push_back(check("functional_direct vs dense quadrature", e, 1e-10));
  }

  {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double err = 0.0;
    for (int n : {12, 13}) {
      auto g = SpatialGrid::covering(Domain::disk({0, 0}, 1.0), n);
      ScalarField H(g, 0.0);
      for (int a = 0; a < H.size(); ++a) H[a] = U(rng);
      const QLattice l = QLattice::for_grid(*g, false);
      err = std::max(err, max_abs_diff(inverse_transform(forward_transform(H, l), l, g), H) / H.max_abs());
    }
    out.push_back(check("lattice transform round trip", err, 1e-12));
  }
  return out;
}

std::string oracle_table(const std::vector<OracleCheck>& checks) {
  std::string s;
  char buf[256];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%-4s %-46s %10.3e <= %8.1e", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                  c.tolerance);
    s += buf;
    if (!c.detail.empty()) s += "  (" + c.detail + ")";
    s += "\n";
  }
  return s;
}

}  // namespace umblt
