#include "umblt/io/store.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <numbers>
#include <set>
#include <tuple>

#include "umblt/core/errors.hpp"
#include "umblt/io/export.hpp"

namespace fs = std::filesystem;

namespace umblt {

namespace {

using TraceKey = std::tuple<int, int, bool>;

std::string trace_file(int kx, int ky, bool sine) {
  return "traces/q_" + std::to_string(kx) + "_" + std::to_string(ky) + (sine ? "_sin" : "_cos") + ".csv";
}

Json lattice_json(const QLattice& l) {
  return {{"nx", l.nx}, {"ny", l.ny}, {"h", l.h}, {"origin", {l.origin.x, l.origin.y}},
          {"half_space", l.half_space}, {"extent", l.extent}};
}

Json geometry_json(const RteSolver& s) {
  const SpatialGrid& g = *s.grid();
  return {{"nx", g.nx()},
          {"ny", g.ny()},
          {"h", g.h()},
          {"origin", {g.origin().x, g.origin().y}},
          {"active_nodes", g.active_count()},
          {"domain", g.domain().describe()},
          {"n_dir", s.directions().size()},
          {"boundary_samples", s.sampling()->total()}};
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

/// Hash-checked trace entries of one level, or empty when the level is absent or incompatible.
std::map<TraceKey, std::string> valid_entries(const std::string& dir, const RteSolver& s, const QLattice& l, double eps) {
  std::map<TraceKey, std::string> ok;
  const std::string mpath = dir + "/manifest.json";
  if (!fs::exists(mpath)) return ok;
  Json m;
  try {
    m = Json::parse(read_text(mpath));
  } catch (const Json::exception&) {
    return ok;
  }
  if (!m.contains("eps") || m["eps"] != eps || m.value("lattice", Json()) != lattice_json(l) ||
      m.value("geometry", Json()) != geometry_json(s))
    return ok;
  for (const auto& e : m.value("traces", Json::array())) {
    if (!e.value("ok", false)) continue;
    const std::string file = dir + "/" + e["file"].get<std::string>();
    if (!fs::exists(file) || sha256_file(file) != e["sha256"].get<std::string>()) continue;
    ok[{e["kx"].get<int>(), e["ky"].get<int>(), e["phase"] == "sin"}] = file;
  }
  return ok;
}

}  // namespace

Json write_measurement_set(const std::string& dir, const MeasurementSet& m, const RteSolver& solver) {
  fs::create_directories(dir + "/traces");
  Json man;
  man["kind"] = "measurement_set";
  man["eps"] = m.eps;
  man["lattice"] = lattice_json(m.lattice);
  man["geometry"] = geometry_json(solver);
  man["partial"] = m.partial;
  const std::string l0 = trace_csv(m.lambda0, {"lambda0 (unmodulated outflow trace)"});
  write_text(dir + "/lambda0.csv", l0);
  man["lambda0"] = {{"file", "lambda0.csv"}, {"sha256", sha256_hex(l0)}};
  Json traces = Json::array();
  for (const auto& t : m.traces) {
    const bool sine = t.wave.is_sine();
    Json e = {{"kx", t.kx}, {"ky", t.ky}, {"phase", sine ? "sin" : "cos"}, {"ok", t.ok}, {"iterations", t.iterations}};
    if (t.ok) {
      const std::string rel = trace_file(t.kx, t.ky, sine);
      const std::string text = trace_csv(t.values);
      write_text(dir + "/" + rel, text);
      e["file"] = rel;
      e["sha256"] = sha256_hex(text);
    } else {
      e["error"] = t.error;
    }
    traces.push_back(e);
  }
  man["traces"] = traces;
  write_text(dir + "/manifest.json", man.dump(2) + "\n");
  return man;
}

MeasurementSet read_measurement_set(const std::string& dir, const RteSolver& solver) {
  const Json man = read_json(dir + "/manifest.json");
  if (man.value("kind", "") != "measurement_set") throw ValidationError(dir + ": not a measurement set");
  if (man["geometry"] != geometry_json(solver))
    throw ValidationError(dir + ": measurement set was taken on a different grid, direction set or sampling");
  MeasurementSet m;
  m.eps = man["eps"].get<double>();
  const Json& lj = man["lattice"];
  m.lattice = QLattice::for_grid(*solver.grid(), lj["half_space"].get<bool>(), lj["extent"].get<int>());
  if (lattice_json(m.lattice) != lj) throw ValidationError(dir + ": q-lattice does not match the grid");
  m.partial = man.value("partial", false);
  auto checked = [&](const Json& e) {
    const std::string file = dir + "/" + e["file"].get<std::string>();
    const std::string text = read_text(file);
    if (sha256_hex(text) != e["sha256"].get<std::string>()) throw ValidationError(file + ": content hash mismatch");
    return parse_trace(text, solver.sampling(), BoundarySide::GammaPlus, file);
  };
  m.lambda0 = checked(man["lambda0"]);
  for (const auto& e : man["traces"]) {
    MeasurementTrace t;
    t.kx = e["kx"].get<int>();
    t.ky = e["ky"].get<int>();
    const bool sine = e["phase"] == "sin";
    t.wave = PlaneWave{m.lattice.frequency(t.kx, t.ky), sine ? std::numbers::pi / 2 : 0.0, m.eps};
    t.iterations = e.value("iterations", 0);
    t.ok = e.value("ok", false);
    if (t.ok) {
      t.values = checked(e);
    } else {
      t.error = e.value("error", "");
      m.partial = true;
    }
    m.traces.push_back(std::move(t));
  }
  return m;
}

std::vector<std::string> measurement_levels(const std::string& dir) {
  auto is_set = [](const std::string& d) {
    if (!fs::exists(d + "/manifest.json")) return false;
    try {
      return Json::parse(read_text(d + "/manifest.json")).value("kind", "") == "measurement_set";
    } catch (const Json::exception&) {
      return false;
    }
  };
  if (is_set(dir)) return {dir};
  std::vector<std::string> out;
  for (int i = 0; is_set(dir + "/level_" + std::to_string(i)); ++i)
    out.push_back(dir + "/level_" + std::to_string(i));
  if (out.empty()) throw ValidationError(dir + ": no measurement set found");
  return out;
}

std::vector<MeasurementSet> measure_resumable(const RteSolver& solver, const QLattice& lattice,
                                              const std::vector<double>& eps_levels, const std::string& dir,
                                              MeasureStats* stats) {
  if (eps_levels.empty()) throw ValidationError("modulation.eps: at least one level is required");
  auto level_dir = [&](size_t i) { return dir + "/level_" + std::to_string(i); };
  std::vector<std::map<TraceKey, std::string>> have;
  for (size_t i = 0; i < eps_levels.size(); ++i) have.push_back(valid_entries(level_dir(i), solver, lattice, eps_levels[i]));

  // A point is reused only when both phases are valid on every level, so warm
  // starts across levels stay those of a fresh sweep.
  std::vector<QPoint> todo;
  int reused = 0;
  for (const QPoint& p : lattice.points()) {
    bool all = true;
    for (const auto& h : have) all = all && h.count({p.kx, p.ky, false}) && h.count({p.kx, p.ky, true});
    if (all)
      ++reused;
    else
      todo.push_back(p);
  }
  std::vector<MeasurementSet> fresh = sweep_levels(solver, lattice, eps_levels, &todo);

  std::vector<MeasurementSet> out;
  for (size_t i = 0; i < eps_levels.size(); ++i) {
    std::map<TraceKey, MeasurementTrace*> computed;
    for (auto& t : fresh[i].traces) computed[{t.kx, t.ky, t.wave.is_sine()}] = &t;
    MeasurementSet m;
    m.eps = eps_levels[i];
    m.lattice = lattice;
    m.lambda0 = fresh[i].lambda0;
    for (const QPoint& p : lattice.points())
      for (bool sine : {false, true}) {
        auto it = computed.find({p.kx, p.ky, sine});
        MeasurementTrace t;
        if (it != computed.end()) {
          t = std::move(*it->second);
        } else {
          const std::string& file = have[i].at({p.kx, p.ky, sine});
          t.kx = p.kx;
          t.ky = p.ky;
          t.wave = PlaneWave{p.q, sine ? std::numbers::pi / 2 : 0.0, m.eps};
          t.values = import_trace(file, solver.sampling(), BoundarySide::GammaPlus);
          t.ok = true;
        }
        m.partial = m.partial || !t.ok;
        m.traces.push_back(std::move(t));
      }
    // Iteration counts of reused traces come from the previous manifest.
    if (fs::exists(level_dir(i) + "/manifest.json")) {
      std::map<TraceKey, int> iters;
      try {
        const Json old = read_json(level_dir(i) + "/manifest.json");
        for (const auto& e : old.at("traces"))
          iters[{e["kx"].get<int>(), e["ky"].get<int>(), e["phase"] == "sin"}] = e.value("iterations", 0);
      } catch (const std::exception&) {
      }
      for (auto& t : m.traces)
        if (!computed.count({t.kx, t.ky, t.wave.is_sine()}) && iters.count({t.kx, t.ky, t.wave.is_sine()}))
          t.iterations = iters[{t.kx, t.ky, t.wave.is_sine()}];
    }
    write_measurement_set(level_dir(i), m, solver);
    out.push_back(std::move(m));
  }
  if (stats) {
    stats->computed_points = static_cast<int>(todo.size());
    stats->reused_points = reused;
  }
  return out;
}

std::string medium_hash(const RteSolver& s, bool with_source) {
  const OpticalMedium& m = s.medium();
  const SolverOptions& o = s.options();
  std::string blob = s.grid()->domain().describe() + "\n" + scalar_csv(m.sigma) + scalar_csv(m.kernel_amplitude);
  if (with_source) blob += scalar_csv(m.source);
  for (double v : m.kernel.circulant_row(s.directions())) blob += format_double(v) + ",";
  blob += "\nn_dir=" + std::to_string(s.directions().size()) + " rtol=" + format_double(o.rtol) +
          " atol=" + format_double(o.atol) + " max_iter=" + std::to_string(o.max_iter) +
          " quad=" + std::to_string(o.quad_order) + " oversample=" + std::to_string(o.boundary_oversample);
  return sha256_hex(blob);
}

std::string ControlCache::key(const RteSolver& s, Vec2 x0, const AngularProfile& h, double tol) const {
  std::string blob = medium_hash(s) + " x0=" + format_double(x0.x) + "," + format_double(x0.y) + " tol=" + format_double(tol) + " h=";
  for (double v : h.h) blob += format_double(v) + ",";
  return sha256_hex(blob);
}

std::optional<ControlResult> ControlCache::load(const RteSolver& s, Vec2 x0, const AngularProfile& h, double tol) const {
  const std::string base = dir_ + "/" + key(s, x0, h, tol);
  if (!fs::exists(base + ".json") || !fs::exists(base + ".g.csv")) return std::nullopt;
  try {
    const Json meta = read_json(base + ".json");
    const std::string text = read_text(base + ".g.csv");
    if (sha256_hex(text) != meta.at("g_sha256").get<std::string>()) return std::nullopt;
    ControlResult r;
    r.form = ControlForm::Forward;
    r.x0 = x0;
    r.h = h;
    r.g = parse_trace(text, s.sampling(), BoundarySide::GammaMinus, base + ".g.csv");
    const ScalarField zero(s.grid(), 0.0);
    r.v = s.solve_forward(zero, r.g).u;
    r.v_at_x0 = s.evaluate_at(x0, r.v, zero, &r.g);
    for (int i = 0; i < h.size(); ++i) r.achieved_error = std::max(r.achieved_error, std::abs(r.v_at_x0[i] - h.h[i]));
    r.iterations = meta.at("iterations").get<int>();
    r.ratios = meta.at("ratios").get<std::vector<double>>();
    r.g_norms = meta.at("g_norms").get<std::vector<double>>();
    r.pre_correction_error = meta.at("pre_correction_error").get<double>();
    r.norm_constant = meta.at("norm_constant").get<double>();
    r.tau_a = meta.at("tau_a").get<double>();
    r.growth = meta.at("growth").get<double>();
    r.method = meta.at("method").get<std::string>();
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void ControlCache::store(const RteSolver& s, const ControlResult& r, double tol) const {
  if (r.form != ControlForm::Forward) throw ValidationError("control cache holds forward-form controls only");
  const std::string base = dir_ + "/" + key(s, r.x0, r.h, tol);
  const std::string text = trace_csv(r.g);
  write_text(base + ".g.csv", text);
  const Json meta = {{"g_sha256", sha256_hex(text)},
                     {"iterations", r.iterations},
                     {"ratios", r.ratios},
                     {"g_norms", r.g_norms},
                     {"pre_correction_error", r.pre_correction_error},
                     {"achieved_error", r.achieved_error},
                     {"norm_constant", r.norm_constant},
                     {"tau_a", r.tau_a},
                     {"growth", r.growth},
                     {"method", r.method}};
  write_text(base + ".json", meta.dump(2) + "\n");
}

}  // namespace umblt
