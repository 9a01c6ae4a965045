#include "umblt/io/run.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>

#include "umblt/control/family.hpp"
#include "umblt/core/errors.hpp"
#include "umblt/core/parallel.hpp"
#include "umblt/io/export.hpp"
#include "umblt/io/oracle_suite.hpp"
#include "umblt/io/store.hpp"
#include "umblt/recon/reconstruct.hpp"
#include "umblt/recon/stability.hpp"

namespace fs = std::filesystem;

namespace umblt {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Files written by one subcommand, with their hashes, plus wall-clock timings.
class Stage {
 public:
  Stage(const fs::path& dir, std::string name) : dir_(dir), name_(std::move(name)) { fs::create_directories(dir_); }

  const fs::path& dir() const { return dir_; }
  void write(const std::string& rel, const std::string& text) {
    write_text((dir_ / rel).string(), text);
    record(rel, text);
  }
  /// Adds an existing file under dir() to the inventory.
  void record_file(const std::string& rel) { record(rel, read_text((dir_ / rel).string())); }
  void time(const std::string& what, double seconds) { timings_[what] = seconds; }

  void finish(const RunConfig& c, const Json& certificate, const Json& constants) {
    Json snapshot = c.effective;
    snapshot.erase("output_dir");
    snapshot.erase("workers");
    Json man = {{"subcommand", name_},
                {"config", snapshot},
                {"certificate", certificate},
                {"constants", constants},
                {"artifacts", artifacts_}};
    write_text((dir_ / "manifest.json").string(), man.dump(2) + "\n");
    Json t = timings_;
    t["workers"] = default_workers();
    write_text((dir_ / "timings.json").string(), t.dump(2) + "\n");
  }

 private:
  void record(const std::string& rel, const std::string& text) {
    artifacts_[rel] = {{"sha256", sha256_hex(text)}, {"bytes", text.size()}};
  }
  fs::path dir_;
  std::string name_;
  Json artifacts_ = Json::object();
  Json timings_ = Json::object();
};

Json certificate_json(const SubcriticalityCertificate& c) {
  return {{"mode", c.mode_name()}, {"rho", c.rho},         {"alpha", c.alpha},         {"tau", c.tau},
          {"a", c.a},              {"min_sigma", c.min_sigma}, {"max_sigma", c.max_sigma}, {"contraction", c.contraction()}};
}

Json report_json(const SolveReport& r) {
  double worst = 0.0;
  for (double q : r.ratios) worst = std::max(worst, q);
  return {{"iterations", r.iterations}, {"final_update", r.final_update}, {"converged", r.converged},
          {"max_update_ratio", worst},  {"contraction_bound", r.contraction_bound}};
}

std::vector<std::string> config_meta(const RunConfig& c) {
  return {"preset=" + c.str("preset"), "n_dir=" + std::to_string(c.integer("n_dir")),
          "nodes_per_axis=" + std::to_string(c.integer("grid.nodes_per_axis"))};
}

fs::path out_root(const RunConfig& c) { return fs::path(c.output_dir()); }

int cmd_forward(const RunConfig& c, std::ostream& out) {
  Stage st(out_root(c) / "forward", "forward");
  auto t0 = Clock::now();
  auto s = build_solver(c);
  const Solution sol = s->solve_forward();
  st.time("solve", since(t0));
  const ScalarField& S = s->medium().source;
  const BoundaryTrace outflow = s->outflow(sol.u, S, nullptr);
  ScalarField density(s->grid(), 0.0);
  for (int d = 0; d < s->directions().size(); ++d)
    for (int a = 0; a < density.size(); ++a) density[a] += s->directions().weight(d) * sol.u.at(d, a);
  const auto meta = config_meta(c);
  st.write("u.csv", angular_csv(sol.u, s->directions(), meta));
  st.write("outflow.csv", trace_csv(outflow, meta));
  st.write("density.csv", scalar_csv(density, meta));
  st.write("source.csv", scalar_csv(S, meta));
  Json k = report_json(sol.report);
  k["upwind_residual"] = residual_norm(*s, sol.u, S, ResidualMode::Forward);
  k["boundary_samples"] = outflow.size();
  st.finish(c, certificate_json(s->certificate()), k);
  out << "forward: " << sol.report.iterations << " iterations, max |u| = " << sol.u.max_abs() << ", "
      << s->certificate().mode_name() << " certificate\n";
  return kExitOk;
}

int cmd_adjoint(const RunConfig& c, std::ostream& out) {
  Stage st(out_root(c) / "adjoint", "adjoint");
  auto t0 = Clock::now();
  auto s = build_solver(c);
  std::vector<double> per_dir;
  for (int d = 0; d < s->directions().size(); ++d)
    per_dir.push_back(c.number("adjoint.value") + c.number("adjoint.cos_amplitude") * std::cos(s->directions().angle(d)));
  const BoundaryTrace g = BoundaryTrace::angular(BoundarySide::GammaPlus, s->sampling(), per_dir);
  const Solution sol = s->solve_adjoint(g);
  st.time("solve", since(t0));
  const auto meta = config_meta(c);
  st.write("v.csv", angular_csv(sol.u, s->directions(), meta));
  st.write("g.csv", trace_csv(g, meta));
  Json k = report_json(sol.report);
  k["upwind_residual"] = residual_norm(*s, sol.u, ScalarField(s->grid(), 0.0), ResidualMode::Adjoint);
  st.finish(c, certificate_json(s->certificate()), k);
  out << "adjoint: " << sol.report.iterations << " iterations, max |v| = " << sol.u.max_abs() << "\n";
  return kExitOk;
}

int cmd_control(const RunConfig& c, std::ostream& out) {
  Stage st(out_root(c) / "control", "control");
  auto s = build_solver(c);
  const Vec2 x0 = c.vec2("control.x0");
  if (!s->grid()->domain().contains(x0, 0.0)) throw ValidationError("control.x0: must lie inside the domain");
  const AngularProfile h = build_profile(c, s->directions());
  ControlOptions o;
  o.tol = c.number("control.tol");
  o.max_refine = c.integer("control.max_refine");
  o.polish = c.flag("control.polish");
  ControlCache cache((out_root(c) / "control_cache").string());
  auto t0 = Clock::now();
  std::optional<ControlResult> hit = cache.load(*s, x0, h, o.tol);
  ControlResult r = hit ? std::move(*hit) : control_point(*s, x0, h, o);
  if (!hit) cache.store(*s, r, o.tol);
  st.time(hit ? "control (cache hit)" : "control", since(t0));
  const auto meta = config_meta(c);
  st.write("g.csv", trace_csv(r.g, meta));
  st.write("v.csv", angular_csv(r.v, s->directions(), meta));
  Json log = {{"method", r.method},
              {"x0", {x0.x, x0.y}},
              {"h", h.h},
              {"v_at_x0", r.v_at_x0},
              {"g_norms", r.g_norms},
              {"ratios", r.ratios},
              {"iterations", r.iterations}};
  st.write("log.json", log.dump(2) + "\n");
  const Json k = {{"achieved_error", r.achieved_error}, {"pre_correction_error", r.pre_correction_error},
                  {"norm_constant", r.norm_constant},   {"tau_a", r.tau_a},
                  {"growth", r.growth},                 {"tolerance", o.tol}};
  st.finish(c, certificate_json(s->certificate()), k);
  out << "control: " << r.method << ", max |v(x0,.) - h| = " << r.achieved_error << (hit ? " (cached)" : "") << "\n";
  if (!(r.achieved_error <= o.tol))
    throw NumericalError("control did not reach control.tol: error " + format_double(r.achieved_error));
  return kExitOk;
}

std::vector<MeasurementSet> do_measure(const RunConfig& c, const RteSolver& s, const fs::path& dir, std::ostream& out,
                                       Stage& st) {
  auto t0 = Clock::now();
  MeasureStats stats;
  auto sets = measure_resumable(s, build_lattice(c, *s.grid()), c.numbers("modulation.eps"), dir.string(), &stats);
  st.time("sweep", since(t0));
  out << "measure: " << stats.computed_points << " lattice points swept, " << stats.reused_points
      << " reused from a previous run\n";
  return sets;
}

Json measurement_constants(const std::vector<MeasurementSet>& sets) {
  int failed = 0, max_it = 0, traces = 0;
  for (const auto& m : sets)
    for (const auto& t : m.traces) {
      ++traces;
      failed += !t.ok;
      max_it = std::max(max_it, t.iterations);
    }
  return {{"levels", sets.size()}, {"traces", traces}, {"failed_traces", failed}, {"max_iterations", max_it}};
}

int cmd_measure(const RunConfig& c, std::ostream& out) {
  const fs::path dir = out_root(c) / "measurements";
  Stage st(dir, "measure");
  auto s = build_solver(c);
  const auto sets = do_measure(c, *s, dir, out, st);
  for (size_t i = 0; i < sets.size(); ++i) st.record_file("level_" + std::to_string(i) + "/manifest.json");
  st.finish(c, certificate_json(s->certificate()), measurement_constants(sets));
  for (const auto& m : sets)
    if (m.partial) throw NumericalError("some traces failed; rerun measure to retry them");
  return kExitOk;
}

int cmd_reconstruct(const RunConfig& c, const RunArgs& args, std::ostream& out) {
  Stage st(out_root(c) / "reconstruct", "reconstruct");
  auto s = build_solver(c);
  std::string input = args.input;
  if (input.empty()) {
    const fs::path dir = out_root(c) / "measurements";
    Stage ms(dir, "measure");
    const auto sets = do_measure(c, *s, dir, out, ms);
    for (size_t i = 0; i < sets.size(); ++i) ms.record_file("level_" + std::to_string(i) + "/manifest.json");
    ms.finish(c, certificate_json(s->certificate()), measurement_constants(sets));
    input = dir.string();
  }
  ReconstructOptions o;
  o.gradient.bump_width = c.number("reconstruction.bump_width");
  o.gradient.source = c.str("reconstruction.lattice") == "family" ? ControlSource::Family : ControlSource::PointControl;
  o.gradient.control.tol = c.number("reconstruction.tol");
  auto t0 = Clock::now();
  AngularControlFamily family(*s);
  st.time("family", since(t0));
  const auto meta = config_meta(c);
  const ScalarField& truth = s->medium().source;
  st.write("S_true.csv", scalar_csv(truth, meta));
  Json levels = Json::array();
  int level = 0;
  bool partial = false;
  for (const std::string& dir : measurement_levels(input)) {
    t0 = Clock::now();
    const MeasurementSet m = read_measurement_set(dir, *s);
    Reconstruction r = reconstruct(family, m, o);
    st.time("reconstruct level " + std::to_string(level), since(t0));
    const std::string p = "level_" + std::to_string(level) + "/";
    ScalarField mask(s->grid(), 0.0);
    for (int a = 0; a < mask.size(); ++a) mask[a] = r.valid[a] ? 1.0 : 0.0;
    st.write(p + "S_hat.csv", scalar_csv(r.S_hat, meta));
    st.write(p + "spread.csv", scalar_csv(r.spread, meta));
    st.write(p + "valid.csv", scalar_csv(mask, meta));
    if (c.flag("reconstruction.dump_stages")) {
      st.write(p + "gradient.csv", angular_csv(r.gradient.values, s->directions(), meta));
      const BackIntegration b = integrate_back(r.gradient, m.lambda0, o.quad_order);
      st.write(p + "u_back.csv", angular_csv(b.u, s->directions(), meta));
    }
    const double err = relative_interior_error(r.S_hat, truth, &r.valid);
    double spread = 0.0;
    for (int a = 0; a < r.spread.size(); ++a)
      if (r.valid[a]) spread = std::max(spread, r.spread[a]);
    levels.push_back({{"eps", r.eps},
                      {"relative_interior_error", err},
                      {"error_budget", r.error_budget},
                      {"bump_width", r.bump_width},
                      {"max_direction_spread", spread},
                      {"skipped_nodes", r.gradient.skipped},
                      {"max_condition", r.gradient.max_condition},
                      {"method", r.method}});
    out << "reconstruct: eps = " << r.eps << ", relative interior error " << err << ", " << r.gradient.skipped
        << " nodes skipped\n";
    partial = partial || r.gradient.partial();
    ++level;
  }
  st.finish(c, certificate_json(s->certificate()), {{"levels", levels}, {"h", s->grid()->h()}});
  if (partial) throw NumericalError("some nodes could not be reconstructed (see valid.csv)");
  return kExitOk;
}

int cmd_oracle(const RunConfig& c, std::ostream& out) {
  Stage st(out_root(c) / "oracle", "oracle");
  auto t0 = Clock::now();
  const auto checks = run_oracle_suite(static_cast<std::uint64_t>(c.integer("seed")));
  st.time("suite", since(t0));
  const std::string table = oracle_table(checks);
  out << table;
  st.write("oracle.txt", table);
  Json k = Json::array();
  bool all = true;
  for (const auto& ch : checks) {
    k.push_back({{"name", ch.name}, {"value", ch.value}, {"tolerance", ch.tolerance}, {"pass", ch.pass}});
    all = all && ch.pass;
  }
  st.finish(c, Json(), {{"checks", k}, {"all_pass", all}});
  if (!all) throw NumericalError("oracle suite has failing checks");
  return kExitOk;
}

int cmd_stability(const RunConfig& c, std::ostream& out) {
  Stage st(out_root(c) / "stability", "stability");
  auto s = build_solver(c);
  auto t0 = Clock::now();
  AngularControlFamily family(*s);
  const StabilityBatch b = stability_batch(*s, c.integer("stability.pairs"), c.number("stability.eps"),
                                           static_cast<std::uint64_t>(c.integer("seed")), build_lattice(c, *s->grid()),
                                           family);
  st.time("batch", since(t0));
  Json pairs = Json::array();
  for (const auto& r : b.reports)
    pairs.push_back({{"source_diff", r.source_diff},
                     {"lambda0_diff", r.lambda0_diff},
                     {"lambda_eps_diff", r.lambda_eps_diff},
                     {"functional_diff", r.functional_diff},
                     {"measurement_ratio", r.measurement_constant},
                     {"functional_ratio", r.functional_constant}});
  st.write("pairs.json", pairs.dump(2) + "\n");
  const Json k = {{"norms", StabilityReport::norms},
                  {"measurement_C", b.measurement_C},
                  {"functional_C", b.functional_C},
                  {"measurement_spread", b.measurement_spread},
                  {"functional_spread", b.functional_spread},
                  {"linearity_error", b.linearity_error},
                  {"measurement_holds", b.measurement_holds},
                  {"functional_holds", b.functional_holds}};
  st.finish(c, certificate_json(s->certificate()), k);
  out << "stability: C(measurements) = " << b.measurement_C << " (spread " << b.measurement_spread
      << "), C(functional) = " << b.functional_C << " (spread " << b.functional_spread << "), linearity "
      << b.linearity_error << "\n";
  if (!b.measurement_holds || !b.functional_holds) throw NumericalError("a stability estimate failed on the batch");
  return kExitOk;
}

}  // namespace

int run(const std::string& sub, const RunConfig& c, const RunArgs& args, std::ostream& out, std::ostream& err) {
  try {
    if (sub == "forward") return cmd_forward(c, out);
    if (sub == "adjoint") return cmd_adjoint(c, out);
    if (sub == "control") return cmd_control(c, out);
    if (sub == "measure") return cmd_measure(c, out);
    if (sub == "reconstruct") return cmd_reconstruct(c, args, out);
    if (sub == "oracle") return cmd_oracle(c, out);
    if (sub == "stability") return cmd_stability(c, out);
    throw ValidationError("unknown subcommand \"" + sub + "\"");
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Json::exception& e) {
    err << "error: malformed artifact: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Radiative transfer inverse source toolkit: forward and adjoint solves, boundary controls, "
               "modulated measurements and source reconstruction"};
  app.require_subcommand(1);
  app.footer("\n" + config_help() +
             "\nEnvironment: UMBLT_OUTPUT_DIR overrides output_dir, UMBLT_WORKERS overrides workers.\n"
             "Exit status: 0 success, 1 invalid input, 2 numerical failure.");
  std::string config_path;
  std::vector<std::string> sets;
  RunArgs args;
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"forward", "solve the forward problem; writes u, the outflow trace and the density"},
      {"adjoint", "solve the adjoint problem with boundary data from adjoint.*"},
      {"control", "point control at control.x0 for control.profile; writes g, v and the iteration log"},
      {"measure", "sweep the q-lattice for every modulation.eps level (resumable)"},
      {"reconstruct", "recover S from a measure output (measures first when --input is absent)"},
      {"oracle", "run the dense and closed-form oracle suite; prints a pass/fail table"},
      {"stability", "probe both stability estimates over random smooth source pairs"}};
  for (const auto& [name, doc] : subs) {
    CLI::App* sc = app.add_subcommand(name, doc);
    sc->add_option("-c,--config", config_path, "JSON configuration file (defaults apply when omitted)");
    sc->add_option("-s,--set", sets, "override one key, e.g. --set solver.rtol=1e-12 (value parsed as JSON)");
    if (name == "reconstruct") sc->add_option("-i,--input", args.input, "measure output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  RunConfig c;
  try {
    Json j = Json::object();
    std::string base = ".";
    if (!config_path.empty()) {
      try {
        j = Json::parse(read_text(config_path));
      } catch (const Json::parse_error& e) {
        throw ValidationError("config: " + config_path + " is not valid JSON: " + e.what());
      }
      base = fs::path(config_path).parent_path().string();
      if (base.empty()) base = ".";
    }
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw ValidationError("--set expects key=value, got \"" + kv + "\"");
      std::string key = kv.substr(0, eq);
      for (char& ch : key)
        if (ch == '.') ch = '/';
      const std::string value = kv.substr(eq + 1);
      Json v;
      try {
        v = Json::parse(value);
      } catch (const Json::parse_error&) {
        v = value;
      }
      j[Json::json_pointer("/" + key)] = v;
    }
    c = parse_config(j, base);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Json::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kExitValidation;
  }
  return run(sub, c, args, std::cout, std::cerr);
}

}  // namespace umblt
