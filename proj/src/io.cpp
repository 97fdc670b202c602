#include "c2trace/io.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "c2trace/error.hpp"

namespace c2trace {

namespace {

// Exact rational value of a decimal or p/q string.
std::optional<mpq_class> exact_value(const std::string& text) {
  if (text.empty()) return std::nullopt;
  if (text.find('/') != std::string::npos) {
    mpq_class q;
    if (q.set_str(text, 10) != 0 || q.get_den() == 0) return std::nullopt;
    q.canonicalize();
    return q;
  }
  std::size_t i = 0;
  bool neg = false;
  if (text[i] == '+' || text[i] == '-') neg = text[i++] == '-';
  std::string digits;
  long exp10 = 0;
  bool any = false, dot = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      any = true;
      if (dot) --exp10;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  if (!any) return std::nullopt;
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') return std::nullopt;
    const char* b = text.data() + i + 1;
    if (*b == '+') ++b;
    long e = 0;
    auto [p, ec] = std::from_chars(b, text.data() + text.size(), e);
    if (ec != std::errc{} || p != text.data() + text.size() || std::abs(e) > 400) return std::nullopt;
    exp10 += e;
  }
  mpz_class m(digits, 10);
  if (neg) m = -m;
  mpz_class p10;
  mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(std::abs(exp10)));
  mpq_class q = exp10 >= 0 ? mpq_class(m * p10) : mpq_class(m, p10);
  q.canonicalize();
  return q;
}

Point parse_point(const Json& j, bool& dyadic, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("malformed domain file: " + where + " is not an [x, y] pair");
  double xy[2];
  for (int k = 0; k < 2; ++k) {
    const Json& c = j[k];
    bool exact = true;
    if (c.is_number()) {
      xy[k] = c.get<double>();
      exact = std::isfinite(xy[k]) && exact_value(format_number(xy[k])) == mpq_class(xy[k]);
    } else if (c.is_string()) {
      xy[k] = parse_coordinate(c.get<std::string>(), exact);
    } else {
      throw ValidationError("malformed domain file: " + where + " has a non-numeric coordinate");
    }
    if (!std::isfinite(xy[k])) throw ValidationError("malformed domain file: " + where + " is not finite");
    dyadic = dyadic && exact;
  }
  return {xy[0], xy[1]};
}

std::vector<Point> parse_ring(const Json& j, bool& dyadic, const std::string& where) {
  if (!j.is_array()) throw ValidationError("malformed domain file: " + where + " is not a list of points");
  std::vector<Point> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_point(j[i], dyadic, where + " point " + std::to_string(i)));
  return out;
}

Json ring_json(std::span<const Point> ring) {
  Json out = Json::array();
  for (Point p : ring) out.push_back(to_json(p));
  return out;
}

void write_json(std::ostream& os, const Json& j, int indent) {
  const std::string pad(2 * (indent + 1), ' '), close(2 * indent, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << Json(it.key()).dump() << ": ";
        write_json(os, it.value(), indent + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Short numeric arrays stay on one line.
      const bool flat = j.size() <= 4 && std::all_of(j.begin(), j.end(), [](const Json& v) { return v.is_primitive(); });
      os << (flat ? "[" : "[\n");
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << (flat ? ", " : ",\n");
        if (!flat) os << pad;
        write_json(os, j[i], indent + 1);
      }
      os << (flat ? "]" : "\n" + close + "]");
      return;
    }
    case Json::value_t::number_float:
      os << format_number(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

std::vector<double> split_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    bool exact = true;
    out.push_back(parse_coordinate(item, exact));
  }
  return out;
}

}  // namespace

double parse_coordinate(const std::string& text, bool& dyadic) {
  const auto q = exact_value(text);
  if (!q) throw ValidationError("malformed number '" + text + "'");
  double v;
  if (text.find('/') != std::string::npos) {
    v = q->get_num().get_d() / q->get_den().get_d();
  } else {
    char* end = nullptr;
    v = std::strtod(text.c_str(), &end);
  }
  if (!std::isfinite(v)) throw ValidationError("number out of range '" + text + "'");
  dyadic = mpq_class(v) == *q;
  return v;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  if (v == 0.0) return "0";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

ParsedDomain parse_domain_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("outer")) throw ValidationError("malformed domain file: missing \"outer\"");
  ParsedDomain out;
  auto outer = parse_ring(doc["outer"], out.dyadic, "outer ring");
  std::vector<std::vector<Point>> holes, slits;
  if (doc.contains("holes")) {
    if (!doc["holes"].is_array()) throw ValidationError("malformed domain file: \"holes\" is not a list");
    for (std::size_t i = 0; i < doc["holes"].size(); ++i)
      holes.push_back(parse_ring(doc["holes"][i], out.dyadic, "hole " + std::to_string(i)));
  }
  if (doc.contains("slits")) {
    if (!doc["slits"].is_array()) throw ValidationError("malformed domain file: \"slits\" is not a list");
    for (std::size_t i = 0; i < doc["slits"].size(); ++i)
      slits.push_back(parse_ring(doc["slits"][i], out.dyadic, "slit " + std::to_string(i)));
  }
  out.domain = PolygonalDomain::create(std::move(outer), std::move(holes), std::move(slits));
  return out;
}

ParsedDomain parse_domain(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open domain file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("malformed domain file " + path.string() + ": " + e.what());
  }
  return parse_domain_json(doc);
}

Json domain_to_json(const PolygonalDomain& domain) {
  Json out;
  out["outer"] = ring_json(domain.outer());
  out["holes"] = Json::array();
  for (const auto& h : domain.holes()) out["holes"].push_back(ring_json(h));
  out["slits"] = Json::array();
  for (const auto& s : domain.slits()) out["slits"].push_back(ring_json(s));
  return out;
}

Json to_json(Point p) { return Json::array({p.x, p.y}); }

Json to_json(const Cube& q) { return {{"center", to_json(q.center)}, {"half_side", q.half_side}}; }

Json to_json(const SplitElement& e) {
  return {{"anchor", to_json(e.anchor.point)},
          {"carrier", e.anchor.carrier},
          {"sector", Json::array({e.sector.theta0, e.sector.theta1})},
          {"sector_id", e.sector_id},
          {"witness", to_json(e.witness)}};
}

Json to_json(const DecompositionStats& s) {
  return {{"min_depth", s.min_depth},
          {"max_depth", s.max_depth},
          {"max_neighbors", s.max_neighbors},
          {"covering_multiplicity", s.covering_multiplicity},
          {"covered_area", s.covered_area},
          {"skirt_area", s.skirt_area},
          {"skirt_fraction", s.skirt_fraction}};
}

Json to_json(const PipelineReport& r) {
  Json residuals = Json::array();
  for (const auto& t : r.trace_residuals)
    residuals.push_back({{"cube", t.cube},
                         {"t", t.t},
                         {"residual", t.residual},
                         {"last_residual", t.last_residual},
                         {"distance", t.distance}});
  // Timings are left out so that reports are byte-stable.
  return {{"cubes", r.cubes},
          {"nodes", r.nodes},
          {"edges", r.edges},
          {"max_neighbors", r.max_neighbors},
          {"skirt_fraction", r.skirt_fraction},
          {"solver", r.solver},
          {"eta_min", r.eta_min},
          {"lambda_full", r.lambda_full},
          {"lambda_subset_max", r.lambda_subset_max},
          {"gamma_hat", r.gamma_hat},
          {"seminorm_out", r.seminorm_out},
          {"eta_over_lambda", r.eta_over_lambda},
          {"trace_residuals", residuals}};
}

Json to_json(const FinitenessReport& r) {
  Json subsets = Json::array();
  for (const auto& s : r.subsets)
    subsets.push_back({{"nodes", s.nodes},
                       {"cubes", s.cubes},
                       {"elements", s.elements},
                       {"feasible", s.feasible},
                       {"lambda", s.lambda}});
  return {{"base", to_json(r.base)},
          {"seed", r.seed},
          {"budget", r.budget},
          {"m", r.m},
          {"full_feasible", r.full_feasible},
          {"monotone", r.monotone},
          {"max_monotone_excess", r.max_monotone_excess},
          {"max_elements", r.max_elements},
          {"infeasible_subsets", r.infeasible_subsets},
          {"subsets", subsets},
          {"histogram_edges", r.histogram_edges},
          {"histogram", r.histogram},
          {"corrupted_cube", r.corrupted_cube}};
}

Json to_json(const VisibleReport& r) {
  Json visible_at = Json::object();
  for (const auto& [alpha, count] : r.visible_at) visible_at[format_number(alpha)] = count;
  return {{"finiteness", to_json(r.finiteness)},
          {"triples", r.triples},
          {"degenerate_triples", r.degenerate_triples},
          {"invisible_triples", r.invisible_triples},
          {"alpha_hat", r.alpha_hat},
          {"alpha_max_needed", r.alpha_max_needed},
          {"visible_at", visible_at},
          {"gamma_all", r.gamma_all},
          {"gamma_visible", r.gamma_visible},
          {"visible_subsets", r.visible_subsets}};
}

Json to_json(const Selection& s) {
  return {{"values", s.values},
          {"seminorm", s.seminorm},
          {"lp_objective", s.lp_objective},
          {"pinned", s.pinned},
          {"solver", s.solver}};
}

Json to_json(const JetCompatReport& r) {
  Json worst = Json::array();
  for (const auto& w : r.worst)
    worst.push_back({{"q", w.q}, {"q2", w.q2}, {"fg_ratio", w.fg_ratio}, {"g_ratio", w.g_ratio}});
  return {{"max_fg_ratio", r.max_fg_ratio},
          {"max_g_ratio", r.max_g_ratio},
          {"eta_min", r.eta_min},
          {"pass", r.pass},
          {"worst", worst}};
}

std::string dump_report(const Json& report) {
  std::ostringstream os;
  write_json(os, report, 0);
  os << "\n";
  return os.str();
}

std::string cubes_csv(const WhitneyDecomposition& dec, std::span<const CubeAnchor> anchors) {
  if (!anchors.empty() && anchors.size() != dec.size()) throw ValidationError("anchors do not match cubes");
  std::string out = "index,cx,cy,r,depth,aQx,aQy,sector_id\n";
  for (std::size_t i = 0; i < dec.size(); ++i) {
    const Cube& q = dec.cube(i);
    out += std::to_string(i) + "," + format_number(q.center.x) + "," + format_number(q.center.y) + "," +
           format_number(q.half_side) + "," + std::to_string(dec.depth(i)) + ",";
    if (anchors.empty()) {
      out += ",,\n";
    } else {
      const auto& a = anchors[i];
      out += format_number(a.a.point.x) + "," + format_number(a.a.point.y) + "," + std::to_string(a.omega.sector_id) + "\n";
    }
  }
  return out;
}

void emit_text(const std::string& text, const std::filesystem::path& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw ValidationError("cannot write " + path.string());
}

void emit_report(const Json& report, const std::filesystem::path& path, ReportFormat format) {
  if (format == ReportFormat::json) {
    emit_text(dump_report(report), path);
    return;
  }
  // CSV: an array of flat objects, columns from the first row's sorted keys.
  if (!report.is_array()) throw ValidationError("csv report needs an array of rows");
  std::string out;
  if (!report.empty()) {
    std::vector<std::string> cols;
    for (auto it = report[0].begin(); it != report[0].end(); ++it) cols.push_back(it.key());
    for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "," : "") + cols[c];
    out += "\n";
    for (const auto& row : report) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out += ",";
        if (!row.contains(cols[c])) continue;
        const Json& v = row[cols[c]];
        out += v.is_number_float() ? format_number(v.get<double>()) : v.is_string() ? v.get<std::string>() : v.dump();
      }
      out += "\n";
    }
  }
  emit_text(out, path);
}

Json read_json(const std::filesystem::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + what + " " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("malformed " + what + " " + path.string() + ": " + e.what());
  }
}

BoundaryDataFile parse_boundary_data(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("malformed boundary data: expected an object");
  BoundaryDataFile out;
  if (doc.contains("analytic")) {
    if (!doc["analytic"].is_string()) throw ValidationError("malformed boundary data: \"analytic\" is not a string");
    out.analytic = parse_field_spec(doc["analytic"].get<std::string>());
    return out;
  }
  std::map<ElementKey, double> table;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    const auto c1 = key.find(','), c2 = key.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos || !it.value().is_number())
      throw ValidationError("malformed boundary data entry '" + key + "'");
    bool exact = true;
    const Point a{parse_coordinate(key.substr(0, c1), exact), parse_coordinate(key.substr(c1 + 1, c2 - c1 - 1), exact)};
    int sector = 0;
    const std::string sid = key.substr(c2 + 1);
    auto [p, ec] = std::from_chars(sid.data(), sid.data() + sid.size(), sector);
    if (ec != std::errc{} || p != sid.data() + sid.size()) throw ValidationError("malformed boundary data entry '" + key + "'");
    table[{a, sector}] = it.value().get<double>();
  }
  out.table = BoundaryData::from_table(std::move(table));
  return out;
}

BoundaryDataFile parse_boundary_data(const std::filesystem::path& path) {
  return parse_boundary_data(read_json(path, "boundary data file"));
}

Json boundary_data_to_json(const BoundaryData& data) {
  Json out = Json::object();
  for (const auto& [key, v] : data.table())
    out[format_number(key.anchor.x) + "," + format_number(key.anchor.y) + "," + std::to_string(key.sector_id)] = v;
  return out;
}

SelectionProblem parse_selection_problem(const Json& doc) {
  if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges"))
    throw ValidationError("malformed graph file: needs \"nodes\" and \"edges\"");
  try {
    SelectionProblem p;
    p.dim = doc.value("n", 2);
    if (p.dim < 1) throw ValidationError("malformed graph file: n must be at least 1");
    const std::size_t count = doc["nodes"].size();
    std::vector<std::optional<AffineConstraint>> cons(count);
    for (std::size_t i = 0; i < count; ++i) {
      const Json& node = doc["nodes"][i];
      const std::size_t id = node.contains("id") ? node["id"].get<std::size_t>() : i;
      if (id >= count || cons[id]) throw ValidationError("malformed graph file: bad node id " + std::to_string(id));
      const Json c = node.value("constraint", Json{{"kind", "full"}});
      const std::string kind = c.value("kind", "full");
      if (kind == "full") {
        cons[id] = AffineConstraint::full_space();
      } else if (kind == "empty") {
        cons[id] = AffineConstraint::empty_set();
      } else if (kind == "hyperplane") {
        Vec h = c.at("h").get<Vec>();
        if (static_cast<int>(h.size()) != p.dim)
          throw ValidationError("malformed graph file: node " + std::to_string(id) + " normal has wrong dimension");
        cons[id] = AffineConstraint::hyperplane(std::move(h), c.at("b").get<double>());
      } else {
        throw ValidationError("malformed graph file: unknown constraint kind '" + kind + "'");
      }
    }
    for (auto& c : cons) p.constraints.push_back(*c);
    for (const auto& e : doc["edges"]) {
      WeightedEdge w{e.at("a").get<int>(), e.at("b").get<int>(), e.at("w").get<double>()};
      const int nn = static_cast<int>(count);
      if (w.a < 0 || w.b < 0 || w.a >= nn || w.b >= nn || w.a == w.b || !(w.w > 0.0) || !std::isfinite(w.w))
        throw ValidationError("malformed graph file: bad edge " + e.dump());
      p.edges.push_back(w);
    }
    return p;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed graph file: ") + e.what());
  }
}

BoundaryJet parse_jet(const Json& doc, std::size_t cubes) {
  if (!doc.is_object() || !doc.contains("f") || !doc.contains("g")) throw ValidationError("malformed jet file");
  BoundaryJet jet;
  jet.f.resize(cubes);
  jet.g.resize(cubes);
  jet.eta = doc.value("eta", 0.0);
  try {
    for (std::size_t k = 0; k < cubes; ++k) {
      const std::string key = std::to_string(k);
      if (!doc["f"].contains(key) || !doc["g"].contains(key)) throw ValidationError("missing cube data for cube " + key);
      jet.f[k] = doc["f"][key].get<double>();
      const auto g = doc["g"][key].get<std::vector<double>>();
      if (g.size() != 2) throw ValidationError("malformed jet file: gradient of cube " + key);
      jet.g[k] = {g[0], g[1]};
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed jet file: ") + e.what());
  }
  return jet;
}

Json jet_to_json(const BoundaryJet& jet) {
  Json f = Json::object(), g = Json::object();
  for (std::size_t k = 0; k < jet.f.size(); ++k) {
    f[std::to_string(k)] = jet.f[k];
    g[std::to_string(k)] = to_json(jet.g[k]);
  }
  return {{"f", f}, {"g", g}, {"eta", jet.eta}};
}

FieldSpec parse_field_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::vector<double> v = colon == std::string::npos ? std::vector<double>{} : split_numbers(text.substr(colon + 1));
  if (kind == "slit-witness" && v.empty()) return FieldSpec::slit_witness();
  if (kind == "affine" && v.size() == 3) return FieldSpec::affine({v[0], v[1]}, v[2]);
  if (kind == "quadratic" && v.size() == 7) return FieldSpec::quadratic({v[0], v[1], v[2], v[3]}, {v[4], v[5]}, v[6]);
  throw ValidationError("bad field descriptor '" + text + "'");
}

std::uint64_t parse_seed(const std::string& text) {
  std::uint64_t s = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), s);
  if (ec != std::errc{} || p != text.data() + text.size()) throw ValidationError("bad seed '" + text + "'");
  return s;
}

void RunConfig::validate() const {
  if (depth < 1) throw ValidationError("depth must be positive");
  if (!(tol.equiv > 0.0) || !(tol.lp > 0.0) || !(tol.probe > 0.0)) throw ValidationError("tolerances must be positive");
}

void RunConfig::apply_environment() {
  if (const char* s = std::getenv("WHITNEY_SEED"); s && *s) seed = parse_seed(s);
}

}  // namespace c2trace
