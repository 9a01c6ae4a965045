#include "umblt/io/config.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "umblt/core/errors.hpp"
#include "umblt/io/export.hpp"

namespace umblt {

namespace {

const std::vector<std::string> kPresets = {"absorption", "transparent", "smallness"};

// Preset values, applied below explicit config values and above schema fallbacks.
const std::map<std::string, std::map<std::string, Json>>& preset_table() {
  static const std::map<std::string, std::map<std::string, Json>> t = {
      {"absorption", {{"domain.radius", 1.0}, {"medium.sigma", 2.0}, {"medium.scattering", 1.0}}},
      {"transparent", {{"domain.radius", 1.0}, {"medium.sigma", 1.0}, {"medium.scattering", 0.0}}},
      {"smallness",
       {{"domain.radius", 0.2}, {"medium.sigma", 0.5}, {"medium.scattering", 2.0}, {"control.x0", Json::array({0.05, 0.0})},
        {"medium.source.center", Json::array({0.02, 0.01})}, {"medium.source.width", 0.05}}},
  };
  return t;
}

std::vector<std::string> split(const std::string& dotted) {
  std::vector<std::string> parts;
  std::stringstream ss(dotted);
  std::string p;
  while (std::getline(ss, p, '.')) parts.push_back(p);
  return parts;
}

Json::json_pointer pointer(const std::string& dotted) {
  std::string s;
  for (const auto& p : split(dotted)) s += "/" + p;
  return Json::json_pointer(s);
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ValidationError(path + ": " + msg); }

void check_type(const std::string& path, const std::string& type, const Json& v) {
  auto finite = [&](const Json& x) { return x.is_number() && std::isfinite(x.get<double>()); };
  if (type == "number") {
    if (!finite(v)) fail(path, "expected a finite number");
  } else if (type == "integer") {
    if (!v.is_number_integer()) fail(path, "expected an integer");
  } else if (type == "bool") {
    if (!v.is_boolean()) fail(path, "expected true or false");
  } else if (type == "string") {
    if (!v.is_string()) fail(path, "expected a string");
  } else if (type == "vec2") {
    if (!v.is_array() || v.size() != 2 || !finite(v[0]) || !finite(v[1])) fail(path, "expected [x, y]");
  } else if (type == "numbers") {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
    for (const auto& x : v)
      if (!finite(x)) fail(path, "expected a non-empty array of numbers");
  }
}

void walk_unknown(const Json& j, const std::string& prefix, const std::set<std::string>& leaves,
                  const std::set<std::string>& groups) {
  if (!j.is_object()) fail(prefix.empty() ? "config" : prefix, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (leaves.count(path)) continue;
    if (groups.count(path)) {
      walk_unknown(it.value(), path, leaves, groups);
      continue;
    }
    fail(path, "unknown key");
  }
}

void one_of(const RunConfig& c, const std::string& k, const std::vector<std::string>& allowed) {
  const std::string v = c.str(k);
  for (const auto& a : allowed)
    if (v == a) return;
  std::string list;
  for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
  fail(k, "must be one of " + list + " (got \"" + v + "\")");
}

void validate_ranges(const RunConfig& c) {
  one_of(c, "preset", kPresets);
  one_of(c, "domain.shape", {"disk", "rectangle"});
  if (c.str("domain.shape") == "disk" && !(c.number("domain.radius") > 0.0)) fail("domain.radius", "must be positive");
  if (c.str("domain.shape") == "rectangle") {
    const Vec2 lo = c.vec2("domain.lo"), hi = c.vec2("domain.hi");
    if (!(hi.x > lo.x && hi.y > lo.y)) fail("domain.hi", "must exceed domain.lo in both coordinates");
  }
  if (c.integer("grid.nodes_per_axis") < 3) fail("grid.nodes_per_axis", "must be at least 3");
  const int nd = c.integer("n_dir");
  if (nd < 4 || nd % 2) fail("n_dir", "must be even and at least 4");
  if (!(c.number("medium.sigma") >= 0.0)) fail("medium.sigma", "must be nonnegative");
  if (!(c.number("medium.scattering") >= 0.0)) fail("medium.scattering", "must be nonnegative");
  one_of(c, "medium.kernel", {"isotropic", "henyey_greenstein"});
  if (!(std::abs(c.number("medium.anisotropy")) < 1.0)) fail("medium.anisotropy", "must lie in (-1, 1)");
  one_of(c, "medium.source.type", {"gaussian", "constant", "linear", "file"});
  if (!(c.number("medium.source.width") > 0.0)) fail("medium.source.width", "must be positive");
  if (c.str("medium.source.type") == "file" && c.str("medium.source.path").empty())
    fail("medium.source.path", "required when medium.source.type is \"file\"");
  if (!(c.number("solver.rtol") > 0.0)) fail("solver.rtol", "must be positive");
  if (!(c.number("solver.atol") >= 0.0)) fail("solver.atol", "must be nonnegative");
  if (c.integer("solver.max_iter") < 0) fail("solver.max_iter", "must be nonnegative");
  if (c.integer("solver.quad_order") < 1 || c.integer("solver.quad_order") > 16)
    fail("solver.quad_order", "must lie in [1, 16]");
  if (c.integer("solver.boundary_oversample") < 1) fail("solver.boundary_oversample", "must be at least 1");
  for (double e : c.numbers("modulation.eps"))
    if (!(e >= 0.0 && e < 1.0)) fail("modulation.eps", "each level must lie in [0, 1)");
  if (c.integer("modulation.extent") < -1) fail("modulation.extent", "must be -1 (full lattice) or nonnegative");
  one_of(c, "control.profile", {"bump", "harmonic"});
  if (!(c.number("control.tol") > 0.0)) fail("control.tol", "must be positive");
  if (c.integer("control.max_refine") < 0) fail("control.max_refine", "must be nonnegative");
  if (!(c.number("control.width") >= 0.0)) fail("control.width", "must be nonnegative");
  if (!(c.number("reconstruction.bump_width") >= 0.0)) fail("reconstruction.bump_width", "must be nonnegative");
  one_of(c, "reconstruction.lattice", {"family", "point"});
  if (!(c.number("reconstruction.tol") > 0.0)) fail("reconstruction.tol", "must be positive");
  if (c.integer("stability.pairs") < 1) fail("stability.pairs", "must be at least 1");
  if (!(c.number("stability.eps") >= 0.0 && c.number("stability.eps") < 1.0)) fail("stability.eps", "must lie in [0, 1)");
  if (c.integer("workers") < 0) fail("workers", "must be nonnegative");
  if (c.integer("seed") < 0) fail("seed", "must be nonnegative");
  if (c.str("output_dir").empty()) fail("output_dir", "must not be empty");
}

}  // namespace

const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> s = {
      {"preset", "string", "absorption",
       "medium preset: absorption (sigma 2, unit-mass isotropic kernel), transparent (k = 0), smallness (small disk)"},
      {"domain.shape", "string", "disk", "disk or rectangle"},
      {"domain.center", "vec2", Json::array({0.0, 0.0}), "disk center"},
      {"domain.radius", "number", 1.0, "disk radius (preset dependent)"},
      {"domain.lo", "vec2", Json::array({-1.0, -1.0}), "rectangle lower corner"},
      {"domain.hi", "vec2", Json::array({1.0, 1.0}), "rectangle upper corner"},
      {"grid.nodes_per_axis", "integer", 33, "grid nodes along the longer side of the bounding box"},
      {"n_dir", "integer", 16, "number of equispaced directions (even, >= 4)"},
      {"medium.sigma", "number", 2.0, "constant attenuation (preset dependent)"},
      {"medium.sigma_file", "string", "", "gridded text field replacing medium.sigma"},
      {"medium.scattering", "number", 1.0, "kernel mass on the quadrature (preset dependent)"},
      {"medium.kernel", "string", "isotropic", "isotropic or henyey_greenstein"},
      {"medium.anisotropy", "number", 0.0, "Henyey-Greenstein g"},
      {"medium.source.type", "string", "gaussian", "gaussian, constant, linear or file"},
      {"medium.source.value", "number", 1.0, "constant value, or offset of the linear source"},
      {"medium.source.center", "vec2", Json::array({0.1, 0.05}), "gaussian center"},
      {"medium.source.width", "number", 0.2236067977499790, "gaussian standard deviation"},
      {"medium.source.amplitude", "number", 1.0, "gaussian peak"},
      {"medium.source.gradient", "vec2", Json::array({0.0, 0.0}), "linear source gradient"},
      {"medium.source.path", "string", "", "gridded text field for type file"},
      {"solver.rtol", "number", 1e-10, "relative update tolerance of the Neumann iteration"},
      {"solver.atol", "number", 1e-14, "absolute update tolerance"},
      {"solver.max_iter", "integer", 0, "iteration cap, 0 for the certificate-derived cap"},
      {"solver.quad_order", "integer", 4, "Gauss-Legendre points per ray piece"},
      {"solver.boundary_oversample", "integer", 2, "boundary chords per grid spacing"},
      {"modulation.eps", "numbers", Json::array({1e-3}), "modulation depths; measure writes one set per level"},
      {"modulation.extent", "integer", -1, "q-lattice truncation max(|kx|,|ky|), -1 for the full DFT lattice"},
      {"modulation.half_space", "bool", true, "measure one of each +-q pair"},
      {"adjoint.value", "number", 1.0, "adjoint boundary data g(theta) = value + cos_amplitude cos(theta)"},
      {"adjoint.cos_amplitude", "number", 0.0, "see adjoint.value"},
      {"control.x0", "vec2", Json::array({0.1, 0.0}), "control point (preset dependent)"},
      {"control.profile", "string", "bump", "bump (around control.theta0) or harmonic (cos(m theta))"},
      {"control.theta0", "number", 0.0, "bump center angle"},
      {"control.width", "number", 0.0, "bump support length, 0 for four direction spacings"},
      {"control.m", "integer", 0, "harmonic index"},
      {"control.tol", "number", 1e-6, "target max |v(x0, .) - h|"},
      {"control.max_refine", "integer", 8, "propagation refinement passes"},
      {"control.polish", "bool", true, "close the remaining residual with the angular-data family"},
      {"reconstruction.bump_width", "number", 0.0, "bump support length, 0 for four direction spacings"},
      {"reconstruction.lattice", "string", "family", "family (angular-data controls) or point (control_point per lattice point)"},
      {"reconstruction.tol", "number", 1e-8, "control tolerance for the point lattice"},
      {"reconstruction.dump_stages", "bool", false, "write gradient and back-integrated fields"},
      {"stability.pairs", "integer", 10, "random smooth source pairs"},
      {"stability.eps", "number", 1e-2, "modulation depth of the probe"},
      {"output_dir", "string", "umblt_out", "artifact directory (UMBLT_OUTPUT_DIR overrides)"},
      {"seed", "integer", 1, "seed for randomized suites"},
      {"workers", "integer", 0, "worker threads, 0 for UMBLT_WORKERS or 1 (UMBLT_WORKERS overrides)"},
  };
  return s;
}

std::string config_help() {
  std::ostringstream os;
  os << "Configuration keys (JSON, nested by the dots):\n";
  for (const auto& k : config_schema())
    os << "  " << k.path << " (" << k.type << ", default " << k.fallback.dump() << ")\n      " << k.doc << "\n";
  os << "Presets set domain.radius, medium.sigma and medium.scattering (smallness also moves control.x0 and the source);\n"
        "explicit keys override them.\n";
  return os.str();
}

const Json& RunConfig::at(const std::string& dotted) const { return effective.at(pointer(dotted)); }

Vec2 RunConfig::vec2(const std::string& k) const {
  const Json& v = at(k);
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<double> RunConfig::numbers(const std::string& k) const { return at(k).get<std::vector<double>>(); }

Domain RunConfig::domain() const {
  if (str("domain.shape") == "disk") return Domain::disk(vec2("domain.center"), number("domain.radius"));
  return Domain::rectangle(vec2("domain.lo"), vec2("domain.hi"));
}

DirectionSet RunConfig::directions() const { return DirectionSet::uniform(integer("n_dir")); }

SolverOptions RunConfig::solver_options() const {
  SolverOptions o;
  o.rtol = number("solver.rtol");
  o.atol = number("solver.atol");
  o.max_iter = integer("solver.max_iter");
  o.quad_order = integer("solver.quad_order");
  o.boundary_oversample = integer("solver.boundary_oversample");
  o.workers = std::getenv("UMBLT_WORKERS") ? 0 : integer("workers");
  return o;
}

std::string RunConfig::output_dir() const { return str("output_dir"); }

RunConfig parse_config(const Json& j, const std::string& base_dir) {
  std::set<std::string> leaves, groups;
  for (const auto& k : config_schema()) {
    leaves.insert(k.path);
    const auto parts = split(k.path);
    std::string g;
    for (size_t i = 0; i + 1 < parts.size(); ++i) groups.insert(g += (i ? "." : "") + parts[i]);
  }
  walk_unknown(j, "", leaves, groups);

  std::string preset = "absorption";
  if (j.contains("preset")) {
    check_type("preset", "string", j["preset"]);
    preset = j["preset"].get<std::string>();
    if (!preset_table().count(preset)) fail("preset", "must be one of absorption, transparent, smallness");
  }
  const auto& pre = preset_table().at(preset);
  RunConfig c;
  c.base_dir = base_dir;
  c.effective = Json::object();
  for (const auto& k : config_schema()) {
    const auto ptr = pointer(k.path);
    Json v;
    if (j.contains(ptr)) {
      v = j.at(ptr);
      // A single number is accepted where a list of levels is expected.
      if (k.type == "numbers" && v.is_number()) v = Json::array({v});
      check_type(k.path, k.type, v);
    } else if (pre.count(k.path)) {
      v = pre.at(k.path);
    } else {
      v = k.fallback;
    }
    c.effective[ptr] = v;
  }
  c.effective["preset"] = preset;
  if (const char* od = std::getenv("UMBLT_OUTPUT_DIR"); od && *od) c.effective["output_dir"] = std::string(od);
  validate_ranges(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ValidationError("config: " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j, std::filesystem::path(path).parent_path().string());
}

OpticalMedium build_medium(const RunConfig& c) {
  const Domain dom = c.domain();
  const DirectionSet dirs = c.directions();
  GridPtr grid = SpatialGrid::covering(dom, c.integer("grid.nodes_per_axis"));
  auto model = std::make_shared<MediumModel>();
  const double sigma = c.number("medium.sigma");
  model->sigma = [sigma](Vec2) { return sigma; };
  const std::string st = c.str("medium.source.type");
  if (st == "gaussian") {
    const Vec2 x0 = c.vec2("medium.source.center");
    const double w = c.number("medium.source.width"), amp = c.number("medium.source.amplitude");
    model->source = [=](Vec2 x) {
      const Vec2 d = x - x0;
      return amp * std::exp(-dot(d, d) / (2.0 * w * w));
    };
  } else if (st == "constant") {
    const double v = c.number("medium.source.value");
    model->source = [v](Vec2) { return v; };
  } else if (st == "linear") {
    const double v = c.number("medium.source.value");
    const Vec2 g = c.vec2("medium.source.gradient");
    model->source = [=](Vec2 x) { return v + dot(g, x); };
  } else {
    model->source = [](Vec2) { return 0.0; };
  }
  const double mass = c.number("medium.scattering");
  ScatteringKernel k = c.str("medium.kernel") == "isotropic"
                           ? ScatteringKernel::isotropic(1.0)
                           : ScatteringKernel::henyey_greenstein(c.number("medium.anisotropy"), dirs.size() / 2);
  model->kernel = mass > 0.0 ? k.normalized(dirs).scaled(mass) : ScatteringKernel::isotropic(0.0);
  model->label = c.str("preset");
  OpticalMedium m = OpticalMedium::sample(model, grid);
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? p : (std::filesystem::path(c.base_dir) / fp).string();
  };
  if (!c.str("medium.sigma_file").empty()) {
    m.sigma = import_scalar(resolve(c.str("medium.sigma_file")), grid);
    m.model = nullptr;
  }
  if (st == "file") {
    m.source = import_scalar(resolve(c.str("medium.source.path")), grid);
    m.model = nullptr;
  }
  m.validate();
  return m;
}

std::shared_ptr<RteSolver> build_solver(const RunConfig& c) {
  return std::make_shared<RteSolver>(build_medium(c), c.directions(), c.solver_options());
}

QLattice build_lattice(const RunConfig& c, const SpatialGrid& grid) {
  return QLattice::for_grid(grid, c.flag("modulation.half_space"), c.integer("modulation.extent"));
}

AngularProfile build_profile(const RunConfig& c, const DirectionSet& dirs) {
  if (c.str("control.profile") == "bump") {
    const double w = c.number("control.width");
    return bump_profile(dirs, c.number("control.theta0"), w > 0.0 ? w : default_bump_width(dirs));
  }
  const int m = c.integer("control.m");
  return AngularProfile::from_function(dirs, [m](double t) { return std::cos(m * t); });
}

}  // namespace umblt
