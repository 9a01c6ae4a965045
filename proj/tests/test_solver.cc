#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracle/dense.hpp"
#include "umblt/core/errors.hpp"
#include "umblt/solver/rte_solver.hpp"

using namespace umblt;
constexpr double kPi = std::numbers::pi;

namespace {

OpticalMedium make_medium(const Domain& d, int n, std::function<double(Vec2)> sigma, std::function<double(Vec2)> src,
                          ScatteringKernel k) {
  auto model = std::make_shared<MediumModel>();
  model->sigma = std::move(sigma);
  model->source = std::move(src);
  model->kernel = std::move(k);
  return OpticalMedium::sample(model, SpatialGrid::covering(d, n));
}

ScatteringKernel iso(const DirectionSet& q, double mass) { return ScatteringKernel::isotropic(1.0).normalized(q).scaled(mass); }

}  // namespace

TEST(GaussLegendre, ExactOnPolynomials) {
  for (int p = 1; p <= 8; ++p) {
    GaussLegendre gl(p);
    for (int deg = 0; deg < 2 * p; ++deg) {
      double s = 0.0;
      for (int k = 0; k < p; ++k) s += gl.weight[k] * std::pow(gl.node[k], deg);
      double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      EXPECT_NEAR(s, exact, 1e-14) << p << " " << deg;
    }
    // Partial integrals exact below degree p.
    for (int deg = 0; deg < p; ++deg)
      for (int s = 0; s < p; ++s) {
        double v = 0.0;
        for (int k = 0; k < p; ++k) v += gl.partial[s][k] * std::pow(gl.node[k], deg);
        double exact = (std::pow(gl.node[s], deg + 1) - std::pow(-1.0, deg + 1)) / (deg + 1);
        EXPECT_NEAR(v, exact, 1e-13);
      }
  }
}

TEST(Attenuation, LinearSigmaMatchesClosedForm) {
  DirectionSet q = build_quadrature(8);
  auto m = make_medium(Domain::rectangle({0, 0}, {2, 1}), 21, [](Vec2 p) { return p.x; }, nullptr,
                       ScatteringKernel::isotropic(0.0));
  // Horizontal segment from x = 1.7 back to x = 0.3 at height 0.4: ∫ s ds.
  double B = attenuation(m, {1.7, 0.4}, {1, 0}, 1.4);
  EXPECT_NEAR(B, std::exp(-(1.7 * 1.7 - 0.3 * 0.3) / 2), 1e-10);
  // Oblique segment.
  Vec2 th{std::cos(0.6), std::sin(0.6)};
  Vec2 x{1.5, 0.8};
  double t = 0.9;
  double exact = std::exp(-(x.x * t - 0.5 * t * t * th.x));
  EXPECT_NEAR(attenuation(m, x, th, t), exact, 1e-10);
  EXPECT_THROW(attenuation(m, x, th, 5.0), ValidationError);
}

TEST(Attenuation, ConstantSigmaAndZeroSigma) {
  auto m = make_medium(Domain::disk({0, 0}, 1), 9, [](Vec2) { return 1.5; }, nullptr, ScatteringKernel::isotropic(0.0));
  EXPECT_NEAR(attenuation(m, {0.1, 0.1}, {0, 1}, 0.7), std::exp(-1.05), 1e-15);
  auto z = make_medium(Domain::disk({0, 0}, 1), 9, [](Vec2) { return 0.0; }, nullptr, ScatteringKernel::isotropic(0.0));
  EXPECT_EQ(attenuation(z, {0.1, 0.1}, {0, 1}, 0.7), 1.0);
}

TEST(SolveForward, TransparentConstantSourceClosedForm) {
  DirectionSet q = build_quadrature(16);
  for (Domain d : {Domain::disk({0, 0}, 1.0), Domain::rectangle({-1, 0}, {1, 0.5})}) {
    auto m = make_medium(d, 17, [](Vec2) { return 1.3; }, [](Vec2) { return 0.7; }, ScatteringKernel::isotropic(0.0));
    RteSolver s(m, q);
    Solution sol = s.solve_forward();
    double err = 0.0;
    for (int k = 0; k < q.size(); ++k)
      for (int a = 0; a < s.grid()->active_count(); ++a) {
        double tau = exit_time(d, s.grid()->node(a), q.direction(k), Sign::Backward);
        err = std::max(err, std::abs(sol.u.at(k, a) - oracle::transparent_constant(0.7, 1.3, tau)));
      }
    EXPECT_LE(err, 1e-8) << d.describe();
  }
}

TEST(SolveForward, VacuumTransportsInflowUnchanged) {
  DirectionSet q = build_quadrature(8);
  auto m = make_medium(Domain::disk({0, 0}, 1), 9, [](Vec2) { return 0.0; }, nullptr, ScatteringKernel::isotropic(0.0));
  RteSolver s(m, q);
  Solution sol = s.solve_forward(ScalarField(s.grid(), 0.0), BoundaryTrace(BoundarySide::GammaMinus, s.sampling(), 1.0));
  for (double v : sol.u.values()) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(SolveForward, ZeroDataGivesZeroInOneIteration) {
  DirectionSet q = build_quadrature(8);
  auto m = make_medium(Domain::disk({0, 0}, 1), 9, [](Vec2) { return 2.0; }, nullptr, iso(q, 1.0));
  RteSolver s(m, q);
  Solution sol = s.solve_forward();
  EXPECT_EQ(sol.u.max_abs(), 0.0);
  EXPECT_EQ(sol.report.iterations, 1);
}

TEST(SolveForward, RejectsForeignInflow) {
  DirectionSet q = build_quadrature(8);
  auto m = make_medium(Domain::disk({0, 0}, 1), 9, [](Vec2) { return 2.0; }, nullptr, iso(q, 1.0));
  RteSolver s(m, q);
  EXPECT_THROW(s.solve_forward(m.source, s.zero_outflow()), ValidationError);
}

TEST(SolveForward, MatchesDenseOracleOnRandomTinyInstances) {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DirectionSet q = build_quadrature(8);
  for (int trial = 0; trial < 6; ++trial) {
    const bool absorb = trial % 2 == 0;
    Domain d = absorb ? Domain::disk({0, 0}, 1.0) : Domain::rectangle({0, 0}, {0.5, 0.4});
    double s0 = absorb ? 1.5 + u(rng) : 0.2 * u(rng), g = 0.3 * u(rng), sx = u(rng);
    auto m = make_medium(d, 5, [=](Vec2 p) { return s0 + 0.2 * sx * p.x * p.x; },
                         [=](Vec2 p) { return 1.0 + std::sin(3 * p.x + g); },
                         ScatteringKernel::henyey_greenstein(g, 3).scaled(absorb ? 1.0 : 1.2));
    RteSolver s(m, q);
    EXPECT_EQ(s.certificate().mode, absorb ? CertificateMode::Absorption : CertificateMode::Smallness);
    BoundaryTrace f = s.zero_inflow();
    for (int k = 0; k < f.size(); ++k) f.values()[k] = u(rng);
    Solution it = s.solve_forward(m.source, f);
    AngularField dense = oracle::dense_forward(s, m.source, f);
    EXPECT_LE(max_abs_diff(it.u, dense), 1e-9 * dense.max_abs());
  }
}

TEST(SolveForward, UpdateRatiosRespectCertificate) {
  DirectionSet q = build_quadrature(16);
  auto m = make_medium(Domain::disk({0, 0}, 1), 17, [](Vec2) { return 2.0; },
                       [](Vec2 p) { return std::exp(-4 * dot(p, p)); }, iso(q, 1.0));
  RteSolver s(m, q);
  Solution sol = s.solve_forward();
  ASSERT_GT(sol.report.ratios.size(), 3u);
  for (double r : sol.report.ratios) EXPECT_LE(r, s.certificate().contraction() + 0.02);
  for (size_t k = 1; k < sol.report.update_norms.size(); ++k)
    EXPECT_LT(sol.report.update_norms[k], sol.report.update_norms[k - 1]);
}

TEST(SolveForward, LinearInSourceAndInflow) {
  DirectionSet q = build_quadrature(8);
  auto m = make_medium(Domain::disk({0, 0}, 1), 9, [](Vec2) { return 2.0; }, [](Vec2 p) { return 1 + p.x; }, iso(q, 1.0));
  SolverOptions o;
  o.rtol = 1e-14;
  RteSolver s(m, q, o);
  BoundaryTrace f = s.zero_inflow();
  for (int k = 0; k < f.size(); ++k) f.values()[k] = std::cos(0.1 * k);
  ScalarField S2 = ScalarField::sample(s.grid(), [](Vec2 p) { return p.y * p.y; });
  auto u1 = s.solve_forward(m.source, s.zero_inflow()).u;
  auto u2 = s.solve_forward(S2, f).u;
  ScalarField S3(s.grid());
  for (int a = 0; a < S3.size(); ++a) S3[a] = 2.0 * m.source[a] - 3.0 * S2[a];
  BoundaryTrace f3 = f;
  for (double& v : f3.values()) v *= -3.0;
  auto u3 = s.solve_forward(S3, f3).u;
  double err = 0.0;
  for (size_t k = 0; k < u3.size(); ++k)
    err = std::max(err, std::abs(u3.values()[k] - 2.0 * u1.values()[k] + 3.0 * u2.values()[k]));
  EXPECT_LE(err, 1e-12 * u3.max_abs());
}

TEST(SolveHomogeneous, LanesMatchSingleSolvesBitwise) {
  DirectionSet q = build_quadrature(8);
  auto m = make_medium(Domain::disk({0, 0}, 1), 9, [](Vec2 p) { return 2.5 + 0.5 * p.x; }, nullptr, iso(q, 1.0));
  RteSolver s(m, q);
  std::vector<BoundaryTrace> fs;
  for (int j = 0; j < 3; ++j) {
    std::vector<double> g(q.size(), 0.0);
    g[j] = 1.0;
    fs.push_back(BoundaryTrace::angular(BoundarySide::GammaMinus, s.sampling(), g));
  }
  auto many = s.solve_homogeneous(fs);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(many[j].u.values(), s.solve_forward(ScalarField(s.grid()), fs[j]).u.values());
}

TEST(Neumann, DetectsNonContraction) {
  DirectionSet q = build_quadrature(8);
  auto m = make_medium(Domain::disk({0, 0}, 1), 9, [](Vec2) { return 0.1; }, [](Vec2) { return 1.0; }, iso(q, 1.0));
  ScalarField amp(m.grid(), 20.0);
  TransportOperator T(m.sigma, q, BoundarySampling::build(m.grid()->domain(), q, m.grid()->h()), 4, 1);
  ScatteringOperator K(m.kernel, amp, q);
  BlockField b(q.size(), m.grid()->active_count(), 1), x = b;
  AngularField ts(m.grid(), q.size());
  T.apply(m.source, ts);
  b.set_lane(0, ts);
  IterationControl c;
  c.contraction = 0.5;
  EXPECT_THROW(neumann_block(T, K, m.sigma, b, x, {LaneSpec{}}, c), NumericalError);
}

TEST(SolveAdjoint, MatchesDenseOracleAndReversal) {
  DirectionSet q = build_quadrature(8);
  auto m = make_medium(Domain::disk({0, 0}, 1), 7, [](Vec2 p) { return 1.5 + 0.3 * p.y; }, nullptr,
                       ScatteringKernel::henyey_greenstein(0.3, 3));
  RteSolver s(m, q);
  BoundaryTrace f = s.zero_outflow();
  for (int k = 0; k < f.size(); ++k) f.values()[k] = 1.0 + 0.5 * std::sin(0.3 * k);
  Solution v = s.solve_adjoint(f);
  EXPECT_LE(max_abs_diff(v.u, oracle::dense_adjoint(s, f)), 1e-9 * v.u.max_abs());
}

TEST(SolveAdjoint, DualityPairingConvergesWithH) {
  // ∫_{Γ+} u v |θ·n| = ∫∫ S v for zero inflow.
  DirectionSet q = build_quadrature(16);
  std::vector<double> gaps;
  for (int n : {17, 33}) {
    auto m = make_medium(Domain::disk({0, 0}, 1), n, [](Vec2) { return 2.0; },
                         [](Vec2 p) { return std::exp(-5 * dot(p - Vec2{0.2, 0}, p - Vec2{0.2, 0})); }, iso(q, 1.0));
    RteSolver s(m, q);
    auto u = s.solve_forward().u;
    BoundaryTrace g = s.zero_outflow();
    for (int d = 0; d < q.size(); ++d)
      for (int j = 0; j < s.sampling()->rays(d); ++j) g.at(d, j) = 1.0 + 0.5 * std::cos(q.angle(d));
    auto v = s.solve_adjoint(g).u;
    BoundaryTrace tu = s.outflow(u, m.source, nullptr);
    double lhs = 0.0, rhs = 0.0;
    for (int d = 0; d < q.size(); ++d)
      for (int j = 0; j < s.sampling()->rays(d); ++j) lhs += s.sampling()->weight(d) * tu.at(d, j) * g.at(d, j);
    const double h2 = s.grid()->h() * s.grid()->h();
    for (int d = 0; d < q.size(); ++d)
      for (int a = 0; a < s.grid()->active_count(); ++a) rhs += h2 * q.weight(d) * v.at(d, a) * m.source[a];
    gaps.push_back(std::abs(lhs - rhs) / std::abs(lhs));
  }
  EXPECT_LT(gaps[1], 0.02);
  EXPECT_LT(gaps[1], gaps[0]);
}

TEST(Residual, FirstOrderUnderRefinement) {
  DirectionSet q = build_quadrature(16);
  std::vector<double> r;
  for (int n : {33, 65}) {
    auto m = make_medium(Domain::disk({0, 0}, 1), n, [](Vec2 p) { return 2.0 + 0.3 * p.x; },
                         [](Vec2 p) { return std::exp(-4 * dot(p, p)); }, iso(q, 1.0));
    RteSolver s(m, q);
    r.push_back(residual_norm(s, s.solve_forward().u, m.source, ResidualMode::Forward, 0.25));
  }
  EXPECT_GT(r[0] / r[1], 1.6);
  EXPECT_LT(r[0] / r[1], 2.4);
}

TEST(Residual, AdjointModeSmall) {
  DirectionSet q = build_quadrature(16);
  auto m = make_medium(Domain::disk({0, 0}, 1), 33, [](Vec2) { return 2.0; }, nullptr, iso(q, 1.0));
  RteSolver s(m, q);
  auto v = s.solve_adjoint(BoundaryTrace(BoundarySide::GammaPlus, s.sampling(), 1.0)).u;
  EXPECT_LT(residual_norm(s, v, ScalarField(s.grid()), ResidualMode::Adjoint, 0.25), 0.1 * v.max_abs());
  EXPECT_GT(residual_norm(s, v, ScalarField(s.grid()), ResidualMode::Forward, 0.25), 0.5 * v.max_abs());
}

TEST(TraceEstimate, BoundaryNormControlledByInterior) {
  // ‖u‖_{L^p(Γ+)} ≤ τ‖θ·∇u‖_{p} + ‖u‖_{p} on solver output (p = 1, 2).
  DirectionSet q = build_quadrature(16);
  auto m = make_medium(Domain::disk({0, 0}, 1), 33, [](Vec2) { return 2.0; },
                       [](Vec2 p) { return std::exp(-3 * dot(p, p)); }, iso(q, 1.0));
  RteSolver s(m, q);
  auto u = s.solve_forward().u;
  auto tr = s.outflow(u, m.source, nullptr);
  const double h2 = s.grid()->h() * s.grid()->h(), tau = 2.0;
  for (double p : {1.0, 2.0}) {
    double nu = 0.0, ng = 0.0;
    for (int d = 0; d < q.size(); ++d)
      for (int a = 0; a < s.grid()->active_count(); ++a) {
        nu += h2 * q.weight(d) * std::pow(std::abs(u.at(d, a)), p);
        if (s.grid()->boundary_distance(a) >= s.grid()->h())
          ng += h2 * q.weight(d) * std::pow(std::abs(upwind_derivative(u, d, a, q.direction(d), false)), p);
      }
    EXPECT_LE(tr.lp_norm(p), tau * std::pow(ng, 1 / p) + std::pow(nu, 1 / p));
  }
}

TEST(EvaluateAt, AgreesWithNodalValues) {
  DirectionSet q = build_quadrature(8);
  auto m = make_medium(Domain::disk({0, 0}, 1), 17, [](Vec2) { return 2.0; }, [](Vec2 p) { return 1 + p.x; }, iso(q, 1.0));
  RteSolver s(m, q);
  auto u = s.solve_forward().u;
  int a = s.grid()->active_at(10, 7);
  auto v = s.evaluate_at(s.grid()->node(a), u, m.source, nullptr);
  for (int d = 0; d < q.size(); ++d) EXPECT_NEAR(v[d], u.at(d, a), 1e-9);
}
