#include "umblt/io/export.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include "umblt/core/errors.hpp"

namespace umblt {

namespace {

void header_block(std::string& out, const std::vector<std::string>& meta, const char* header) {
  for (const auto& m : meta) out += "# " + m + "\n";
  out += header;
  out += "\n";
}

struct Row {
  std::vector<double> cells;
  int line = 0;
};

/// Header check plus numeric rows; every row must have the header's column count.
std::vector<Row> parse_rows(const std::string& text, const std::string& header, const std::string& what) {
  std::istringstream in(text);
  std::string line;
  bool seen_header = false;
  const size_t cols = std::count(header.begin(), header.end(), ',') + 1;
  std::vector<Row> rows;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      if (line != header) throw ValidationError(what + ": expected header \"" + header + "\", got \"" + line + "\"");
      seen_header = true;
      continue;
    }
    Row r;
    r.line = n;
    const char* p = line.c_str();
    while (true) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) throw ValidationError(what + ": line " + std::to_string(n) + " is not numeric");
      r.cells.push_back(v);
      p = end;
      if (*p == ',') {
        ++p;
        continue;
      }
      if (*p != '\0') throw ValidationError(what + ": line " + std::to_string(n) + " has trailing text");
      break;
    }
    if (r.cells.size() != cols)
      throw ValidationError(what + ": line " + std::to_string(n) + " has " + std::to_string(r.cells.size()) +
                            " columns, expected " + std::to_string(cols));
    for (double v : r.cells)
      if (!std::isfinite(v)) throw ValidationError(what + ": line " + std::to_string(n) + " is not finite");
    rows.push_back(std::move(r));
  }
  if (!seen_header) throw ValidationError(what + ": missing header");
  return rows;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a) + std::abs(b)); }

int node_at(const SpatialGrid& g, double x, double y, const std::string& what, int line) {
  const Vec2 o = g.origin();
  const int i = static_cast<int>(std::lround((x - o.x) / g.h()));
  const int j = static_cast<int>(std::lround((y - o.y) / g.h()));
  const int a = (i < 0 || j < 0 || i >= g.nx() || j >= g.ny()) ? -1 : g.active_of_box(j * g.nx() + i);
  if (a < 0 || !close(g.node(a).x, x) || !close(g.node(a).y, y))
    throw ValidationError(what + ": line " + std::to_string(line) + " is not at an active grid node");
  return a;
}

int direction_at(const DirectionSet& dirs, double angle, const std::string& what, int line) {
  const int d = static_cast<int>(std::lround(angle / dirs.spacing()));
  if (d < 0 || d >= dirs.size() || !close(dirs.angle(d), angle))
    throw ValidationError(what + ": line " + std::to_string(line) + " has an angle off the direction set");
  return d;
}

void mark(std::vector<char>& seen, size_t k, const std::string& what, int line) {
  if (seen[k]) throw ValidationError(what + ": line " + std::to_string(line) + " repeats an entry");
  seen[k] = 1;
}

void require_complete(size_t rows, size_t expected, const std::string& what) {
  if (rows != expected)
    throw ValidationError(what + ": " + std::to_string(rows) + " rows, expected " + std::to_string(expected));
}

std::vector<int> nodes_lexicographic(const SpatialGrid& g) {
  std::vector<int> idx(g.active_count());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::tuple(g.node(a).x, g.node(a).y) < std::tuple(g.node(b).x, g.node(b).y);
  });
  return idx;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string scalar_csv(const ScalarField& f, const std::vector<std::string>& meta) {
  std::string out;
  header_block(out, meta, "x,y,value");
  const SpatialGrid& g = *f.grid();
  for (int a : nodes_lexicographic(g))
    out += format_double(g.node(a).x) + "," + format_double(g.node(a).y) + "," + format_double(f[a]) + "\n";
  return out;
}

std::string angular_csv(const AngularField& f, const DirectionSet& dirs, const std::vector<std::string>& meta) {
  if (f.n_dir() != dirs.size()) throw ValidationError("angular field and direction set differ in size");
  std::string out;
  header_block(out, meta, "x,y,angle,value");
  const SpatialGrid& g = *f.grid();
  // Angles ascend with the index, so per-node rows in index order are sorted.
  for (int a : nodes_lexicographic(g)) {
    const std::string xy = format_double(g.node(a).x) + "," + format_double(g.node(a).y) + ",";
    for (int d = 0; d < dirs.size(); ++d) out += xy + format_double(dirs.angle(d)) + "," + format_double(f.at(d, a)) + "\n";
  }
  return out;
}

std::string trace_csv(const BoundaryTrace& t, const std::vector<std::string>& meta) {
  const BoundarySampling& s = *t.sampling();
  struct Key {
    double x, y, angle;
    int d, j;
  };
  std::vector<Key> keys;
  keys.reserve(t.size());
  for (int d = 0; d < s.n_dir(); ++d)
    for (int j = 0; j < s.rays(d); ++j) {
      const Vec2 p = t.point(d, j);
      keys.push_back({p.x, p.y, s.directions().angle(d), d, j});
    }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    return std::tie(a.x, a.y, a.angle, a.d, a.j) < std::tie(b.x, b.y, b.angle, b.d, b.j);
  });
  std::string out;
  header_block(out, meta, "x,y,angle,dir,ray,value");
  for (const Key& k : keys)
    out += format_double(k.x) + "," + format_double(k.y) + "," + format_double(k.angle) + "," + std::to_string(k.d) +
           "," + std::to_string(k.j) + "," + format_double(t.at(k.d, k.j)) + "\n";
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
  out.close();
  if (!out) throw ValidationError("failed writing " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void export_scalar(const std::string& path, const ScalarField& f, const std::vector<std::string>& meta) {
  write_text(path, scalar_csv(f, meta));
}

void export_angular(const std::string& path, const AngularField& f, const DirectionSet& dirs,
                    const std::vector<std::string>& meta) {
  write_text(path, angular_csv(f, dirs, meta));
}

void export_trace(const std::string& path, const BoundaryTrace& t, const std::vector<std::string>& meta) {
  write_text(path, trace_csv(t, meta));
}

ScalarField parse_scalar(const std::string& text, const GridPtr& grid, const std::string& what) {
  const auto rows = parse_rows(text, "x,y,value", what);
  ScalarField f(grid, 0.0);
  std::vector<char> seen(f.size(), 0);
  for (const Row& r : rows) {
    const int a = node_at(*grid, r.cells[0], r.cells[1], what, r.line);
    mark(seen, a, what, r.line);
    f[a] = r.cells[2];
  }
  require_complete(rows.size(), f.size(), what);
  return f;
}

AngularField parse_angular(const std::string& text, const GridPtr& grid, const DirectionSet& dirs,
                           const std::string& what) {
  const auto rows = parse_rows(text, "x,y,angle,value", what);
  AngularField f(grid, dirs.size(), 0.0);
  std::vector<char> seen(f.size(), 0);
  for (const Row& r : rows) {
    const int a = node_at(*grid, r.cells[0], r.cells[1], what, r.line);
    const int d = direction_at(dirs, r.cells[2], what, r.line);
    mark(seen, static_cast<size_t>(d) * f.n_nodes() + a, what, r.line);
    f.at(d, a) = r.cells[3];
  }
  require_complete(rows.size(), f.size(), what);
  return f;
}

BoundaryTrace parse_trace(const std::string& text, const SamplingPtr& s, BoundarySide side, const std::string& what) {
  const auto rows = parse_rows(text, "x,y,angle,dir,ray,value", what);
  BoundaryTrace t(side, s, 0.0);
  std::vector<char> seen(t.size(), 0);
  for (const Row& r : rows) {
    const double dd = r.cells[3], jj = r.cells[4];
    const int d = static_cast<int>(dd), j = static_cast<int>(jj);
    if (d != dd || j != jj || d < 0 || d >= s->n_dir() || j < 0 || j >= s->rays(d))
      throw ValidationError(what + ": line " + std::to_string(r.line) + " names no boundary sample");
    const Vec2 p = t.point(d, j);
    if (!close(p.x, r.cells[0]) || !close(p.y, r.cells[1]) || !close(s->directions().angle(d), r.cells[2]))
      throw ValidationError(what + ": line " + std::to_string(r.line) + " does not match the boundary sampling");
    mark(seen, s->start(d) + j, what, r.line);
    t.at(d, j) = r.cells[5];
  }
  require_complete(rows.size(), t.size(), what);
  return t;
}

ScalarField import_scalar(const std::string& path, const GridPtr& grid) {
  return parse_scalar(read_text(path), grid, path);
}

AngularField import_angular(const std::string& path, const GridPtr& grid, const DirectionSet& dirs) {
  return parse_angular(read_text(path), grid, dirs, path);
}

BoundaryTrace import_trace(const std::string& path, const SamplingPtr& s, BoundarySide side) {
  return parse_trace(read_text(path), s, side, path);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw NumericalError("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_text(path)); }

}  // namespace umblt
