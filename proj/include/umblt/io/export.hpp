#pragma once

#include <string>
#include <vector>

#include "umblt/core/boundary.hpp"
#include "umblt/core/fields.hpp"

namespace umblt {

/// Comma-separated text with '#' metadata lines, one header row and values
/// printed with %.17g, so a re-import is bitwise identical. Rows are sorted
/// lexicographically in (x, y) for scalar fields and (x, y, angle) otherwise.
///
///  scalar:  x,y,value                   one row per active node
///  angular: x,y,angle,value             one row per (node, direction)
///  trace:   x,y,angle,dir,ray,value     one row per boundary sample; (x, y) is
///                                       the exit point on Γ+ or the entry point on Γ−
std::string scalar_csv(const ScalarField& f, const std::vector<std::string>& meta = {});
std::string angular_csv(const AngularField& f, const DirectionSet& dirs, const std::vector<std::string>& meta = {});
std::string trace_csv(const BoundaryTrace& t, const std::vector<std::string>& meta = {});

/// Writes the text; throws ValidationError when the path is not writable.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

void export_scalar(const std::string& path, const ScalarField& f, const std::vector<std::string>& meta = {});
void export_angular(const std::string& path, const AngularField& f, const DirectionSet& dirs,
                    const std::vector<std::string>& meta = {});
void export_trace(const std::string& path, const BoundaryTrace& t, const std::vector<std::string>& meta = {});

/// Imports validate the header, every coordinate against the grid or sampling
/// and that each node or sample appears exactly once (ValidationError otherwise).
ScalarField parse_scalar(const std::string& text, const GridPtr& grid, const std::string& what = "scalar field");
AngularField parse_angular(const std::string& text, const GridPtr& grid, const DirectionSet& dirs,
                           const std::string& what = "angular field");
BoundaryTrace parse_trace(const std::string& text, const SamplingPtr& s, BoundarySide side,
                          const std::string& what = "trace");
ScalarField import_scalar(const std::string& path, const GridPtr& grid);
AngularField import_angular(const std::string& path, const GridPtr& grid, const DirectionSet& dirs);
BoundaryTrace import_trace(const std::string& path, const SamplingPtr& s, BoundarySide side);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// %.17g.
std::string format_double(double v);

}  // namespace umblt
