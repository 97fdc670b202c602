#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "c2trace/pipeline.hpp"

namespace c2trace {

using Json = nlohmann::json;  // std::map objects, so keys come out sorted

// Domain files: {"outer": [[x, y], ...], "holes": [[[x, y], ...]], "slits": [...]}.
// Coordinates are JSON numbers or strings ("3/8", "-0.125", "1e-3").
struct ParsedDomain {
  PolygonalDomain domain;
  bool dyadic = true;  // every coordinate is exactly a dyadic rational
};

ParsedDomain parse_domain_json(const Json& doc);
ParsedDomain parse_domain(const std::filesystem::path& path);
Json domain_to_json(const PolygonalDomain& domain);
// Parses "p/q" and decimal strings; `exact` tells whether the double equals the text.
double parse_coordinate(const std::string& text, bool& exact);

// Shortest decimal that reads back to the same double.
std::string format_number(double v);

Json to_json(Point p);
Json to_json(const Cube& q);
Json to_json(const SplitElement& e);
Json to_json(const DecompositionStats& s);
Json to_json(const PipelineReport& r);
Json to_json(const FinitenessReport& r);
Json to_json(const VisibleReport& r);
Json to_json(const Selection& s);
Json to_json(const JetCompatReport& r);

// Sorted keys, two-space indent, trailing newline.
std::string dump_report(const Json& report);
// Header "index,cx,cy,r,depth,aQx,aQy,sector_id".
std::string cubes_csv(const WhitneyDecomposition& dec, std::span<const CubeAnchor> anchors);

enum class ReportFormat { json, csv };
// Writes text to `path`, or to stdout when the path is empty or "-".
void emit_text(const std::string& text, const std::filesystem::path& path);
void emit_report(const Json& report, const std::filesystem::path& path, ReportFormat format = ReportFormat::json);

// Boundary data files map "x,y,sector" keys to values, or name a closed-form
// field: {"analytic": "slit-witness"}.
struct BoundaryDataFile {
  std::optional<BoundaryData> table;
  std::optional<FieldSpec> analytic;
};
BoundaryDataFile parse_boundary_data(const Json& doc);
BoundaryDataFile parse_boundary_data(const std::filesystem::path& path);
Json boundary_data_to_json(const BoundaryData& data);

// {"n": 2, "nodes": [{"id": i, "constraint": {"kind": "hyperplane", "h": [...], "b": v} |
//  {"kind": "full"} | {"kind": "empty"}}], "edges": [{"a": i, "b": j, "w": v}]}
SelectionProblem parse_selection_problem(const Json& doc);

// {"f": {"<cube>": v}, "g": {"<cube>": [gx, gy]}, "eta": e}; every cube of
// the decomposition needs both entries ("missing cube data").
BoundaryJet parse_jet(const Json& doc, std::size_t cubes);
Json jet_to_json(const BoundaryJet& jet);

Json read_json(const std::filesystem::path& path, const std::string& what);

// Field descriptors: "affine:a1,a2,b", "quadratic:A11,A12,A21,A22,a1,a2,b",
// "slit-witness".
FieldSpec parse_field_spec(const std::string& text);

struct Tolerances {
  double equiv = 1e-4;
  double lp = 1e-9;
  double probe = 1e-5;
};

struct RunConfig {
  std::string command;
  std::filesystem::path domain;
  int depth = 5;
  std::uint64_t seed = 0;
  std::size_t budget = 200;
  Tolerances tol;
  std::filesystem::path out;
  std::filesystem::path csv;

  // Throws ValidationError for non-positive tolerances or depth.
  void validate() const;
  // WHITNEY_SEED, when set, replaces the seed.
  void apply_environment();
};

std::uint64_t parse_seed(const std::string& text);

}  // namespace c2trace
