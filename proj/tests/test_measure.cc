#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "oracle/dense.hpp"
#include "umblt/core/errors.hpp"
#include "umblt/measure/measurement.hpp"

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

double rel_diff(const BoundaryTrace& a, const BoundaryTrace& b) {
  double m = 0.0, r = 0.0;
  for (int k = 0; k < a.size(); ++k) {
    m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
    r = std::max(r, std::abs(b.values()[k]));
  }
  return r > 0.0 ? m / r : m;
}

// Relative difference in the L¹(Γ+, |θ·n|) norm.
double rel_l1(const BoundaryTrace& a, const BoundaryTrace& b) {
  BoundaryTrace d = a;
  for (int k = 0; k < d.size(); ++k) d.values()[k] -= b.values()[k];
  return d.lp_norm(1.0) / b.lp_norm(1.0);
}

// Worst relative difference over chords longer than min_len.
double rel_interior(const BoundaryTrace& a, const BoundaryTrace& b, double min_len) {
  const auto& s = *a.sampling();
  double m = 0.0, r = 0.0;
  for (int d = 0; d < s.n_dir(); ++d)
    for (int j = 0; j < s.rays(d); ++j) {
      r = std::max(r, std::abs(b.at(d, j)));
      if (s.ray(d, j).length >= min_len) m = std::max(m, std::abs(a.at(d, j) - b.at(d, j)));
    }
  return m / r;
}

double max_diff(const BoundaryTrace& a, const BoundaryTrace& b) {
  double m = 0.0;
  for (int k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

// Smooth heterogeneous medium in Absorption mode on the unit disk.
OpticalMedium generic_disk(int n, const DirectionSet& q) {
  return make_medium(Domain::disk({0, 0}, 1), n, [](Vec2 p) { return 2.0 + 0.4 * p.x - 0.3 * p.y * p.y; },
                     [](Vec2 p) { return std::exp(-3.0 * dot(p - Vec2{0.2, -0.1}, p - Vec2{0.2, -0.1})); },
                     ScatteringKernel::henyey_greenstein(0.4, 6).normalized(q).scaled(0.8));
}

}  // namespace

TEST(Modulate, ZeroAmplitudeLeavesMediumUnchanged) {
  DirectionSet q = build_quadrature(8);
  auto m = generic_disk(9, q);
  auto mm = modulate(m, {{3.0, 1.0}, 0.0, 0.0});
  EXPECT_EQ(mm.sigma.values(), m.sigma.values());
  EXPECT_EQ(mm.source.values(), m.source.values());
  EXPECT_EQ(mm.kernel_amplitude.values(), m.kernel_amplitude.values());
}

TEST(Modulate, ZeroFrequencyScalesUniformly) {
  DirectionSet q = build_quadrature(8);
  auto m = generic_disk(9, q);
  auto mm = modulate(m, {{0.0, 0.0}, 0.0, 0.25});
  for (int a = 0; a < m.sigma.size(); ++a) {
    EXPECT_DOUBLE_EQ(mm.sigma[a], 1.25 * m.sigma[a]);
    EXPECT_DOUBLE_EQ(mm.source[a], 1.25 * m.source[a]);
    EXPECT_DOUBLE_EQ(mm.kernel_amplitude[a], 1.25);
  }
  EXPECT_EQ(mm.kernel.circulant_row(q), m.kernel.circulant_row(q));
}

TEST(Modulate, SinePhaseMatchesPointwiseEvaluation) {
  DirectionSet q = build_quadrature(8);
  auto m = generic_disk(11, q);
  auto mm = modulate(m, {{2 * kPi, 0.0}, kPi / 2, 0.1});
  const auto& g = *m.grid();
  for (int a = 0; a < g.active_count(); ++a) {
    Vec2 x = g.node(a);
    EXPECT_NEAR(mm.sigma[a], (1.0 - 0.1 * std::sin(2 * kPi * x.x)) * m.sigma[a], 1e-15);
  }
  // The modulated model resamples to the same values.
  auto again = OpticalMedium::sample(mm.model, m.grid());
  for (int a = 0; a < g.active_count(); ++a) EXPECT_DOUBLE_EQ(again.sigma[a], mm.sigma[a]);
}

TEST(Modulate, PerturbationIsLinearInAmplitude) {
  DirectionSet q = build_quadrature(8);
  auto m = generic_disk(11, q);
  auto m1 = modulate(m, {{1.3, -2.1}, 0.0, 0.1});
  auto m2 = modulate(m, {{1.3, -2.1}, 0.0, 0.3});
  for (int a = 0; a < m.sigma.size(); ++a) {
    EXPECT_NEAR(m2.sigma[a] - m.sigma[a], 3.0 * (m1.sigma[a] - m.sigma[a]), 1e-14);
    EXPECT_NEAR(m2.source[a] - m.source[a], 3.0 * (m1.source[a] - m.source[a]), 1e-14);
  }
}

TEST(Modulate, RejectsInvalidWaves) {
  DirectionSet q = build_quadrature(8);
  auto m = generic_disk(7, q);
  EXPECT_THROW(modulate(m, {{1, 0}, 0.0, 1.0}), ValidationError);
  EXPECT_THROW(modulate(m, {{1, 0}, 0.0, -0.1}), ValidationError);
  EXPECT_THROW(modulate(m, {{1, 0}, 1.0, 0.1}), ValidationError);
}

TEST(QLatticeTest, HalfSpaceCoversEachConjugatePairOnce) {
  auto g = SpatialGrid::covering(Domain::disk({0, 0}, 1), 8);
  QLattice full = QLattice::for_grid(*g, false), half = QLattice::for_grid(*g, true);
  EXPECT_EQ(full.points().size(), 64u);
  // Four self-conjugate frequencies plus one of each remaining pair.
  EXPECT_EQ(half.points().size(), 4u + 60u / 2);
  std::set<std::pair<int, int>> seen;
  for (const auto& p : half.points()) seen.insert({p.kx, p.ky});
  auto canon = [](int m) { return ((m + 4) % 8 + 8) % 8 - 4; };
  for (const auto& p : full.points()) {
    bool self = seen.count({p.kx, p.ky}) > 0;
    bool neg = seen.count({canon(-p.kx), canon(-p.ky)}) > 0;
    EXPECT_TRUE(self || neg);
    if (canon(-p.kx) != p.kx || canon(-p.ky) != p.ky) {
      EXPECT_FALSE(self && neg);
    }
  }
  Vec2 f = full.frequency(1, -2);
  EXPECT_NEAR(f.x, 2 * kPi / (8 * g->h()), 1e-12);
  EXPECT_NEAR(f.y, -4 * kPi / (8 * g->h()), 1e-12);
  QLattice low = QLattice::for_grid(*g, true, 1);
  for (const auto& p : low.points()) EXPECT_LE(std::max(std::abs(p.kx), std::abs(p.ky)), 1);
  EXPECT_EQ(low.points().size(), 5u);
}

TEST(LambdaZero, VanishesWithoutSource) {
  DirectionSet q = build_quadrature(8);
  auto m = make_medium(Domain::disk({0, 0}, 1), 9, [](Vec2) { return 2.0; }, nullptr, iso(q, 1.0));
  RteSolver s(m, q);
  EXPECT_EQ(lambda_zero(s).max_abs(), 0.0);
}

TEST(LambdaZero, TransparentMatchesChordFormula) {
  DirectionSet q = build_quadrature(12);
  const double c = 1.7, src = 0.6;
  auto m = make_medium(Domain::disk({0, 0}, 1), 15, [c](Vec2) { return c; }, [src](Vec2) { return src; },
                       ScatteringKernel::isotropic(0.0));
  RteSolver s(m, q);
  BoundaryTrace t = lambda_zero(s);
  for (int d = 0; d < q.size(); ++d)
    for (int j = 0; j < s.sampling()->rays(d); ++j)
      EXPECT_NEAR(t.at(d, j), oracle::transparent_constant(src, c, s.sampling()->ray(d, j).length), 1e-12);
}

TEST(LambdaZero, MatchesDenseTrace) {
  DirectionSet q = build_quadrature(8);
  auto m = generic_disk(5, q);
  SolverOptions o;
  o.rtol = 1e-14;
  RteSolver s(m, q, o);
  AngularField ud = oracle::dense_forward(s, m.source, s.zero_inflow());
  BoundaryTrace dense = s.outflow(ud, m.source, nullptr);
  EXPECT_LT(rel_diff(lambda_zero(s), dense), 1e-12);
  // Cross-check the dense trace rows themselves.
  Eigen::VectorXd col = oracle::to_dense(s, s.collision_source(ud, m.source));
  Eigen::VectorXd tr = oracle::trace_matrix(s) * col;
  for (int k = 0; k < dense.size(); ++k) EXPECT_NEAR(tr(k), dense.values()[k], 1e-13);
}

TEST(LambdaEps, SplitIterationMatchesDenseSystem) {
  DirectionSet q = build_quadrature(8);
  SolverOptions o;
  o.rtol = 1e-14;
  for (auto dom : {Domain::disk({0, 0}, 1), Domain::rectangle({0, 0}, {0.5, 0.4})}) {
    OpticalMedium m = dom.is_disk() ? generic_disk(5, q)
                                    : make_medium(dom, 5, [](Vec2 p) { return 0.5 + p.x; },
                                                  [](Vec2 p) { return 1.0 + p.y; }, iso(q, 1.2));
    RteSolver s(m, q, o);
    MeasurementEngine eng(s);
    for (double eps : {0.0, 1e-3, 0.2})
      for (PlaneWave w : {PlaneWave{{2.0, -1.0}, 0.0, eps}, PlaneWave{{-3.0, 4.0}, kPi / 2, eps}}) {
        auto dm = oracle::dense_measurement(s, modulation_pattern(*s.grid(), w), eps);
        auto tr = eng.measure(w);
        ASSERT_TRUE(tr.ok) << tr.error;
        EXPECT_LT(rel_diff(tr.values, dm.trace), 1e-9) << dom.describe() << " eps " << eps;
        EXPECT_LT(max_abs_diff(eng.response(w), dm.w), 1e-9 * dm.w.max_abs());
      }
  }
}

TEST(LambdaEps, SplitRouteMatchesTwoSolvesUnderRefinement) {
  // The split route interpolates u₀, which has a square-root singularity across
  // chords near grazing; the two-solve route never does. The gap is largest on
  // short chords and closes with h.
  DirectionSet q = build_quadrature(16);
  SolverOptions o;
  o.rtol = 1e-13;
  PlaneWave w{{2.0, 1.0}, 0.0, 1e-2};
  std::vector<double> l1, inner;
  for (int n : {11, 21, 41}) {
    auto m = generic_disk(n, q);
    RteSolver s(m, q, o);
    BoundaryTrace split = lambda_eps(s, w).values, two = lambda_eps_two_solves(m, q, o, w);
    l1.push_back(rel_l1(split, two));
    inner.push_back(rel_interior(split, two, 1.0));
  }
  EXPECT_LT(l1[1], l1[0]);
  EXPECT_LT(l1[2], l1[1]);
  EXPECT_LT(l1[2], 2e-2);
  EXPECT_LT(inner[2], 2e-2);
}

TEST(LambdaEps, ZeroSourceGivesZeroTrace) {
  DirectionSet q = build_quadrature(8);
  auto m = make_medium(Domain::disk({0, 0}, 1), 9, [](Vec2) { return 2.0; }, nullptr, iso(q, 1.0));
  RteSolver s(m, q);
  EXPECT_EQ(lambda_eps(s, {{1.0, 2.0}, 0.0, 1e-3}).values.max_abs(), 0.0);
  EXPECT_EQ(linearized_response(s, {{1.0, 2.0}, kPi / 2, 0.0}).max_abs(), 0.0);
}

TEST(LambdaEps, TransparentZeroFrequencyClosedForm) {
  // k ≡ 0, q = 0, φ = 0: u_ε exits with (S/σ)(1 − e^{−(1+ε)σL}).
  DirectionSet q = build_quadrature(12);
  const double c = 1.5, src = 2.0, eps = 1e-2;
  auto m = make_medium(Domain::disk({0, 0}, 1), 21, [c](Vec2) { return c; }, [src](Vec2) { return src; },
                       ScatteringKernel::isotropic(0.0));
  SolverOptions o;
  o.rtol = 1e-14;
  RteSolver s(m, q, o);
  PlaneWave w{{0, 0}, 0.0, eps};
  BoundaryTrace two = lambda_eps_two_solves(m, q, o, w);
  BoundaryTrace split = lambda_eps(s, w).values;
  BoundaryTrace exact(BoundarySide::GammaPlus, s.sampling());
  for (int d = 0; d < q.size(); ++d)
    for (int j = 0; j < s.sampling()->rays(d); ++j) {
      const double L = s.sampling()->ray(d, j).length;
      exact.at(d, j) = src / c * (std::exp(-c * L) - std::exp(-(1 + eps) * c * L)) / eps;
      EXPECT_NEAR(two.at(d, j), exact.at(d, j), 1e-9);
    }
  // The split route interpolates R₀ = S e^{−στ−}, singular across grazing chords.
  EXPECT_LT(rel_interior(split, exact, 1.0), 2e-2);
  EXPECT_LT(rel_l1(split, exact), 2e-2);
}

TEST(LambdaEps, ConvergesLinearlyToLinearizedResponse) {
  DirectionSet q = build_quadrature(16);
  auto m = generic_disk(17, q);
  RteSolver s(m, q);
  MeasurementEngine eng(s);
  std::vector<PlaneWave> waves{{{1.0, 2.0}, 0.0, 0}, {{-2.5, 0.5}, kPi / 2, 0}};
  auto res = eng.measure(waves, {4e-2, 2e-2, 1e-2, 0.0});
  for (size_t i = 0; i < waves.size(); ++i) {
    double d1 = max_diff(res[0][i].values, res[3][i].values);
    double d2 = max_diff(res[1][i].values, res[3][i].values);
    double d3 = max_diff(res[2][i].values, res[3][i].values);
    EXPECT_NEAR(d1 / d2, 2.0, 0.1);
    EXPECT_NEAR(d2 / d3, 2.0, 0.1);
    // Richardson-style: ‖Λ^ε − Λ^{ε/2}‖/ε is stable under halving.
    double c1 = max_diff(res[0][i].values, res[1][i].values) / 4e-2;
    double c2 = max_diff(res[1][i].values, res[2][i].values) / 2e-2;
    EXPECT_NEAR(c1 / c2, 1.0, 0.1);
  }
}

TEST(LambdaEps, RejectsUncertifiedModulation) {
  DirectionSet q = build_quadrature(8);
  auto m = make_medium(Domain::disk({0, 0}, 1), 9, [](Vec2) { return 2.0; }, [](Vec2) { return 1.0; }, iso(q, 1.0));
  RteSolver s(m, q);
  // σ_ε ≥ 2(1 − ε) against ρ_ε ≤ 1 + ε: absorption fails for ε ≥ 1/3 where c = ±1.
  EXPECT_THROW(lambda_eps(s, {{kPi, 0.0}, 0.0, 0.5}), NumericalError);
  EXPECT_NO_THROW(lambda_eps(s, {{kPi, 0.0}, 0.0, 0.2}));
}

TEST(Sweep, EmptyLatticeKeepsLambdaZeroOnly) {
  DirectionSet q = build_quadrature(8);
  auto m = generic_disk(7, q);
  RteSolver s(m, q);
  std::vector<QPoint> none;
  auto sets = sweep_levels(s, QLattice::for_grid(*s.grid()), {1e-3}, &none);
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_TRUE(sets[0].traces.empty());
  EXPECT_FALSE(sets[0].partial);
  EXPECT_EQ(max_diff(sets[0].lambda0, lambda_zero(s)), 0.0);
}

TEST(Sweep, OrderingDeterminismAndDuplicates) {
  DirectionSet q = build_quadrature(8);
  auto m = generic_disk(8, q);
  RteSolver s(m, q);
  QLattice lat = QLattice::for_grid(*s.grid(), true, 1);
  MeasurementSet a = sweep(s, lat, 1e-3);
  ASSERT_EQ(a.traces.size(), 2 * lat.points().size());
  for (size_t i = 0; i < a.traces.size(); ++i) {
    EXPECT_TRUE(a.traces[i].ok);
    EXPECT_EQ(a.traces[i].wave.is_sine(), i % 2 == 1);
  }
  auto pts = lat.points();
  std::vector<QPoint> dup{pts[2], pts[2]};
  auto b = sweep_levels(s, lat, {1e-3}, &dup)[0];
  EXPECT_EQ(b.traces[0].values.values(), b.traces[2].values.values());
  // Batched lanes reproduce the full sweep bit for bit.
  EXPECT_EQ(b.traces[0].values.values(), a.traces[4].values.values());
  EXPECT_EQ(b.traces[1].values.values(), a.traces[5].values.values());
}

TEST(Sweep, FailuresAreRecordedAndSweepContinues) {
  DirectionSet q = build_quadrature(8);
  auto m = make_medium(Domain::disk({0, 0}, 1), 8, [](Vec2) { return 2.0; }, [](Vec2) { return 1.0; }, iso(q, 1.0));
  RteSolver s(m, q);
  MeasurementSet ms = sweep(s, QLattice::for_grid(*s.grid(), true, 1), 0.5);
  EXPECT_TRUE(ms.partial);
  int ok = 0, bad = 0;
  for (const auto& t : ms.traces) (t.ok ? ok : bad)++;
  EXPECT_GT(ok, 0);  // q = 0 keeps c ≡ 1 or ≡ 0
  EXPECT_GT(bad, 0);
}

TEST(Duality, ModulatedPairingIdentityClosesWithH) {
  // ∫∫ v S_ε = ∫_{Γ+} u_ε v |n·θ| for the modulated forward/adjoint pair,
  // the source form of the integration-by-parts identity.
  DirectionSet q = build_quadrature(16);
  PlaneWave w{{2.0, -1.0}, 0.0, 0.3};
  std::vector<double> gaps;
  for (int n : {11, 21, 41}) {
    auto m = modulate(generic_disk(n, q), w);
    RteSolver s(m, q);
    BoundaryTrace g(BoundarySide::GammaPlus, s.sampling());
    for (int d = 0; d < q.size(); ++d)
      for (int j = 0; j < s.sampling()->rays(d); ++j) {
        Vec2 p = g.point(d, j);
        g.at(d, j) = 1.0 + 0.5 * std::cos(q.angle(d)) + 0.3 * p.y;
      }
    AngularField v = s.solve_adjoint(g).u;
    BoundaryTrace tu = lambda_zero(s);
    double lhs = 0.0, rhs = 0.0, h2 = s.grid()->h() * s.grid()->h();
    for (int d = 0; d < q.size(); ++d)
      for (int a = 0; a < s.grid()->active_count(); ++a) lhs += q.weight(d) * h2 * v.at(d, a) * m.source[a];
    for (int d = 0; d < q.size(); ++d)
      for (int j = 0; j < s.sampling()->rays(d); ++j) rhs += s.sampling()->weight(d) * tu.at(d, j) * g.at(d, j);
    gaps.push_back(std::abs(lhs - rhs) / std::abs(rhs));
  }
  EXPECT_LT(gaps[1], gaps[0]);
  EXPECT_LT(gaps[2], gaps[1]);
  EXPECT_LT(gaps[2], 0.02);
}
