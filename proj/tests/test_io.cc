#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "umblt/core/errors.hpp"
#include "umblt/io/config.hpp"
#include "umblt/io/export.hpp"
#include "umblt/io/oracle_suite.hpp"
#include "umblt/io/run.hpp"
#include "umblt/io/store.hpp"

using namespace umblt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("umblt_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Parses and expects a ValidationError whose message starts with the field path.
void expect_field_error(const Json& j, const std::string& path) {
  try {
    parse_config(j);
    ADD_FAILURE() << "accepted invalid " << path;
  } catch (const ValidationError& e) {
    EXPECT_EQ(std::string(e.what()).rfind(path + ":", 0), 0u) << e.what();
  }
}

RunConfig small(const std::string& preset = "absorption", int n = 9, int nd = 8) {
  return parse_config({{"preset", preset}, {"grid", {{"nodes_per_axis", n}}}, {"n_dir", nd}});
}

}  // namespace

// ------------------------------------------------------------------ config

TEST(Config, DefaultsFillEverySchemaKey) {
  const RunConfig c = parse_config(Json::object());
  for (const auto& k : config_schema()) EXPECT_NO_THROW(c.at(k.path)) << k.path;
  EXPECT_EQ(c.str("preset"), "absorption");
  EXPECT_EQ(c.integer("n_dir"), 16);
  EXPECT_EQ(c.numbers("modulation.eps"), std::vector<double>{1e-3});
}

TEST(Config, PresetValuesYieldToExplicitKeys) {
  const RunConfig s = parse_config({{"preset", "smallness"}});
  EXPECT_EQ(s.number("domain.radius"), 0.2);
  EXPECT_EQ(s.number("medium.sigma"), 0.5);
  const RunConfig o = parse_config({{"preset", "smallness"}, {"medium", {{"sigma", 0.25}}}});
  EXPECT_EQ(o.number("medium.sigma"), 0.25);
  EXPECT_EQ(o.number("domain.radius"), 0.2);
}

TEST(Config, RejectionsNameTheFieldPath) {
  expect_field_error({{"medium", {{"sigma", -1.0}}}}, "medium.sigma");
  expect_field_error({{"medium", {{"colour", 1}}}}, "medium.colour");
  expect_field_error({{"bogus", 1}}, "bogus");
  expect_field_error({{"n_dir", 7}}, "n_dir");
  expect_field_error({{"n_dir", 8.5}}, "n_dir");
  expect_field_error({{"solver", {{"rtol", "small"}}}}, "solver.rtol");
  expect_field_error({{"preset", "opaque"}}, "preset");
  expect_field_error({{"domain", {{"center", {1.0}}}}}, "domain.center");
  expect_field_error({{"modulation", {{"eps", {1e-3, 1.5}}}}}, "modulation.eps");
  expect_field_error({{"control", {{"profile", "spike"}}}}, "control.profile");
  expect_field_error({{"medium", {{"source", {{"type", "file"}}}}}}, "medium.source.path");
  expect_field_error({{"solver", 3}}, "solver");
}

TEST(Config, SingleEpsilonAndEnvironmentOverride) {
  EXPECT_EQ(parse_config({{"modulation", {{"eps", 2e-3}}}}).numbers("modulation.eps"), std::vector<double>{2e-3});
  ::setenv("UMBLT_OUTPUT_DIR", "/tmp/elsewhere", 1);
  const RunConfig c = parse_config({{"output_dir", "here"}});
  ::unsetenv("UMBLT_OUTPUT_DIR");
  EXPECT_EQ(c.output_dir(), "/tmp/elsewhere");
  EXPECT_EQ(parse_config({{"output_dir", "here"}}).output_dir(), "here");
}

TEST(Config, HelpDocumentsEveryKey) {
  const std::string h = config_help();
  for (const auto& k : config_schema()) EXPECT_NE(h.find(k.path + " ("), std::string::npos) << k.path;
}

TEST(Config, PresetsCarryTheirCertificates) {
  auto a = build_solver(small("absorption", 9, 16));
  EXPECT_EQ(a->certificate().mode, CertificateMode::Absorption);
  EXPECT_NEAR(a->certificate().contraction(), 0.5, 1e-12);
  EXPECT_NEAR(a->medium().kernel.quadrature_mass(a->directions()), 1.0, 1e-12);
  auto s = build_solver(small("smallness", 9, 16));
  EXPECT_EQ(s->certificate().mode, CertificateMode::Smallness);
  EXPECT_LT(s->certificate().contraction(), 1.0);
  auto t = build_solver(small("transparent", 9, 16));
  EXPECT_EQ(t->certificate().rho, 0.0);
}

TEST(Config, GriddedFilesReplaceCoefficients) {
  const fs::path dir = scratch("files");
  const RunConfig base = small();
  const OpticalMedium m = build_medium(base);
  ScalarField sig = m.sigma, src = m.source;
  for (int a = 0; a < sig.size(); ++a) {
    sig[a] = 2.0 + 0.1 * a / sig.size();
    src[a] = 0.5 * a;
  }
  export_scalar((dir / "sigma.csv").string(), sig);
  export_scalar((dir / "src.csv").string(), src);
  Json j = base.effective;
  j["medium"]["sigma_file"] = "sigma.csv";
  j["medium"]["source"]["type"] = "file";
  j["medium"]["source"]["path"] = "src.csv";
  const OpticalMedium f = build_medium(parse_config(j, dir.string()));
  EXPECT_EQ(f.sigma.values(), sig.values());
  EXPECT_EQ(f.source.values(), src.values());
  EXPECT_EQ(f.model, nullptr);
}

// ------------------------------------------------------------------ export

TEST(Export, ZeroFieldHasOneZeroRowPerNode) {
  auto s = build_solver(small());
  const std::string csv = scalar_csv(ScalarField(s->grid(), 0.0));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,y,value");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "0");
  }
  EXPECT_EQ(rows, s->grid()->active_count());
}

TEST(Export, RoundTripsAreBitwise) {
  auto s = build_solver(small("absorption", 9, 8));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1e3, 1e3);
  ScalarField f(s->grid(), 0.0);
  for (double& v : f.values()) v = U(rng) * std::exp(U(rng) / 20.0);
  AngularField g(s->grid(), 8, 0.0);
  for (double& v : g.values()) v = U(rng) / 7.0;
  BoundaryTrace t = s->zero_outflow();
  for (double& v : t.values()) v = std::nextafter(U(rng), 0.0);
  EXPECT_EQ(parse_scalar(scalar_csv(f, {"meta line"}), s->grid()).values(), f.values());
  EXPECT_EQ(parse_angular(angular_csv(g, s->directions()), s->grid(), s->directions()).values(), g.values());
  EXPECT_EQ(parse_trace(trace_csv(t), s->sampling(), BoundarySide::GammaPlus).values(), t.values());
}

TEST(Export, TraceRowCountMatchesChordCount) {
  // Disk of radius R, chords at spacing h/oversample: ⌈2R·oversample/h⌉ per direction.
  const RunConfig c = small("absorption", 13, 12);
  auto s = build_solver(c);
  const double R = 1.0, h = s->grid()->h();
  const int per_dir = static_cast<int>(std::ceil(2.0 * R * c.integer("solver.boundary_oversample") / h - 1e-9));
  const std::string csv = trace_csv(s->zero_outflow());
  const long rows = std::count(csv.begin(), csv.end(), '\n') - 1;
  EXPECT_EQ(rows, 12L * per_dir);
}

TEST(Export, RowsAreLexicographic) {
  auto s = build_solver(small("absorption", 9, 8));
  auto sorted = [](const std::string& csv, int keys) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      std::vector<double> r;
      std::istringstream ls(line);
      std::string cell;
      for (int k = 0; k < keys && std::getline(ls, cell, ','); ++k) r.push_back(std::stod(cell));
      rows.push_back(r);
    }
    return std::is_sorted(rows.begin(), rows.end());
  };
  EXPECT_TRUE(sorted(scalar_csv(ScalarField(s->grid(), 1.0)), 2));
  EXPECT_TRUE(sorted(angular_csv(AngularField(s->grid(), 8, 1.0), s->directions()), 3));
  EXPECT_TRUE(sorted(trace_csv(s->zero_outflow()), 3));
}

TEST(Export, ImportRejectsMalformedFiles) {
  auto s = build_solver(small("absorption", 9, 8));
  const std::string good = scalar_csv(ScalarField(s->grid(), 1.0));
  const size_t first = good.find('\n') + 1, second = good.find('\n', first) + 1;
  EXPECT_THROW(parse_scalar("x,y,v\n" + good.substr(first), s->grid()), ValidationError);
  EXPECT_THROW(parse_scalar(good.substr(0, first) + good.substr(second), s->grid()), ValidationError);
  EXPECT_THROW(parse_scalar(good + good.substr(first, second - first), s->grid()), ValidationError);
  EXPECT_THROW(parse_scalar(good + "0.0312,0.0,1\n", s->grid()), ValidationError);
  EXPECT_THROW(parse_scalar(good.substr(0, first) + "a,b,c\n", s->grid()), ValidationError);
  EXPECT_THROW(parse_scalar(good.substr(0, first) + "0,0,nan\n", s->grid()), ValidationError);
  auto other = build_solver(small("absorption", 11, 8));
  EXPECT_THROW(parse_scalar(good, other->grid()), ValidationError);
}

TEST(Export, UnwritablePathIsAValidationError) {
  auto s = build_solver(small());
  EXPECT_THROW(export_scalar("/proc/umblt/none.csv", ScalarField(s->grid(), 0.0)), ValidationError);
}

TEST(Export, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

// ------------------------------------------------------------------ store

TEST(Store, MeasurementSetRoundTripAndHashCheck) {
  const fs::path dir = scratch("mset");
  auto s = build_solver(small("absorption", 9, 8));
  const QLattice l = QLattice::for_grid(*s->grid(), true, 2);
  const MeasurementSet m = sweep(*s, l, 1e-3);
  write_measurement_set(dir.string(), m, *s);
  const MeasurementSet r = read_measurement_set(dir.string(), *s);
  ASSERT_EQ(r.traces.size(), m.traces.size());
  EXPECT_EQ(r.lambda0.values(), m.lambda0.values());
  EXPECT_EQ(r.eps, m.eps);
  for (size_t i = 0; i < m.traces.size(); ++i) {
    EXPECT_EQ(r.traces[i].values.values(), m.traces[i].values.values());
    EXPECT_EQ(r.traces[i].kx, m.traces[i].kx);
    EXPECT_EQ(r.traces[i].wave.is_sine(), m.traces[i].wave.is_sine());
    EXPECT_EQ(r.traces[i].wave.q.x, m.traces[i].wave.q.x);
  }
  EXPECT_EQ(measurement_levels(dir.string()), std::vector<std::string>{dir.string()});
  {
    std::ofstream f(dir / "traces/q_1_0_cos.csv", std::ios::app);
    f << "# tampered\n";
  }
  EXPECT_THROW(read_measurement_set(dir.string(), *s), ValidationError);
  auto other = build_solver(small("absorption", 9, 12));
  EXPECT_THROW(read_measurement_set(dir.string(), *other), ValidationError);
}

TEST(Store, ResumeSweepsOnlyDamagedPointsAndMatchesFreshRun) {
  const fs::path a = scratch("resume_a"), b = scratch("resume_b");
  auto s = build_solver(small("absorption", 9, 8));
  const QLattice l = QLattice::for_grid(*s->grid(), true, 2);
  const std::vector<double> eps = {1e-3, 5e-4};
  MeasureStats st;
  measure_resumable(*s, l, eps, a.string(), &st);
  EXPECT_EQ(st.reused_points, 0);
  const int total = st.computed_points;
  fs::remove(a / "level_1/traces/q_0_0_sin.csv");
  {
    std::ofstream f(a / "level_0/traces/q_1_1_cos.csv", std::ios::app);
    f << "1\n";
  }
  measure_resumable(*s, l, eps, a.string(), &st);
  EXPECT_EQ(st.computed_points, 2);
  EXPECT_EQ(st.reused_points, total - 2);
  measure_resumable(*s, l, eps, a.string(), &st);
  EXPECT_EQ(st.computed_points, 0);
  measure_resumable(*s, l, eps, b.string(), &st);
  for (const char* lv : {"level_0", "level_1"})
    EXPECT_EQ(read_text((a / lv / "manifest.json").string()), read_text((b / lv / "manifest.json").string())) << lv;
  EXPECT_EQ(measurement_levels(a.string()).size(), 2u);
  // A changed level invalidates every point.
  measure_resumable(*s, l, {1e-3, 2.5e-4}, a.string(), &st);
  EXPECT_EQ(st.computed_points, total);
}

TEST(Store, ControlCacheHitReproducesTheControl) {
  const fs::path dir = scratch("cache");
  const RunConfig c = small("absorption", 13, 8);
  auto s = build_solver(c);
  const AngularProfile h = build_profile(c, s->directions());
  ControlCache cache(dir.string());
  const Vec2 x0{0.1, 0.0};
  EXPECT_FALSE(cache.load(*s, x0, h, 1e-6));
  ControlOptions o;
  o.tol = 1e-6;
  const ControlResult r = control_point(*s, x0, h, o);
  cache.store(*s, r, 1e-6);
  const auto hit = cache.load(*s, x0, h, 1e-6);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->g.values(), r.g.values());
  EXPECT_LE(max_abs_diff(hit->v, r.v), 1e-12 * r.v.max_abs() + 1e-14);
  EXPECT_NEAR(hit->achieved_error, r.achieved_error, 1e-10);
  EXPECT_FALSE(cache.load(*s, x0, h, 1e-7));
  EXPECT_FALSE(cache.load(*s, {0.1, 0.01}, h, 1e-6));
  auto other = build_solver(parse_config({{"grid", {{"nodes_per_axis", 13}}}, {"n_dir", 8}, {"medium", {{"sigma", 2.5}}}}));
  EXPECT_FALSE(cache.load(*other, x0, h, 1e-6));
}

// ------------------------------------------------------------------ run

TEST(Run, ExitCodesFollowTheErrorKind) {
  const fs::path dir = scratch("exit");
  std::ostringstream out, err;
  Json j = small().effective;
  j["output_dir"] = dir.string();
  EXPECT_EQ(run("forward", parse_config(j), {}, out, err), kExitOk);
  EXPECT_EQ(run("launch", parse_config(j), {}, out, err), kExitValidation);
  Json bad = j;
  bad["preset"] = "transparent";
  bad["medium"]["sigma"] = 0.0;
  bad["medium"]["scattering"] = 3.0;
  bad["domain"]["radius"] = 5.0;
  err.str("");
  EXPECT_EQ(run("forward", parse_config(bad), {}, out, err), kExitNumerical);
  EXPECT_NE(err.str().find("subcritical"), std::string::npos) << err.str();
  Json off = j;
  off["control"]["x0"] = {3.0, 0.0};
  EXPECT_EQ(run("control", parse_config(off), {}, out, err), kExitValidation);
  RunArgs missing{(dir / "nothing").string()};
  EXPECT_EQ(run("reconstruct", parse_config(j), missing, out, err), kExitValidation);
}

TEST(Run, ManifestIgnoresWorkerCountAndOutputDir) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  std::ostringstream out, err;
  Json j = small("absorption", 13, 8).effective;
  j["modulation"]["extent"] = 2;
  j["output_dir"] = a.string();
  j["workers"] = 1;
  ASSERT_EQ(run("reconstruct", parse_config(j), {}, out, err), kExitOk) << err.str();
  j["output_dir"] = b.string();
  j["workers"] = 3;
  ASSERT_EQ(run("reconstruct", parse_config(j), {}, out, err), kExitOk) << err.str();
  EXPECT_EQ(read_text((a / "reconstruct/manifest.json").string()), read_text((b / "reconstruct/manifest.json").string()));
  const Json man = Json::parse(read_text((a / "reconstruct/manifest.json").string()));
  for (auto it = man["artifacts"].begin(); it != man["artifacts"].end(); ++it)
    EXPECT_EQ(sha256_file((a / "reconstruct" / it.key()).string()), it.value()["sha256"]) << it.key();
  EXPECT_FALSE(man["config"].contains("workers"));
  EXPECT_FALSE(man["config"].contains("output_dir"));
}

TEST(Run, OracleSuitePasses) {
  const auto checks = run_oracle_suite(7);
  EXPECT_GE(checks.size(), 7u);
  for (const auto& c : checks) EXPECT_TRUE(c.pass) << c.name << " " << c.value;
}
