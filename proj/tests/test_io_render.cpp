#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "c2trace/error.hpp"
#include "c2trace/io.hpp"
#include "c2trace/svg.hpp"

using namespace c2trace;

namespace {

const std::string fixtures = C2TRACE_FIXTURES;

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("coordinates") {
  bool exact = false;
  CHECK(parse_coordinate("3/8", exact) == 0.375);
  CHECK(exact);
  CHECK(parse_coordinate("-0.125", exact) == -0.125);
  CHECK(exact);
  CHECK(parse_coordinate("0.1", exact) == 0.1);
  CHECK_FALSE(exact);
  CHECK(parse_coordinate("1e-3", exact) == 0.001);
  CHECK_FALSE(exact);
  CHECK_THROWS_AS(parse_coordinate("abc", exact), ValidationError);
  CHECK_THROWS_AS(parse_coordinate("1/0", exact), ValidationError);
}

TEST_CASE("numbers print shortest round trip") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_number(std::nan("")) == "null");
  for (double v : {1e-300, 123456.789, -2.5e17, 0.3})
    CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
}

TEST_CASE("domain files round trip") {
  for (const char* name : {"unit_square", "slit_square", "hub", "comb"}) {
    const auto parsed = parse_domain(fixtures + "/" + name + ".json");
    CHECK(parsed.dyadic);
    const auto again = parse_domain_json(domain_to_json(parsed.domain));
    CHECK(again.domain.outer() == parsed.domain.outer());
    CHECK(again.domain.slits() == parsed.domain.slits());
    CHECK(dump_report(domain_to_json(again.domain)) == dump_report(domain_to_json(parsed.domain)));
  }
  const auto thirds = parse_domain_json(Json::parse(R"({"outer": [[0, 0], ["1/3", 0], ["1/3", "1/3"], [0, "1/3"]]})"));
  CHECK_FALSE(thirds.dyadic);
  CHECK_THROWS_AS(parse_domain_json(Json::parse(R"({"outer": [[0, 0], [1, 0]]})")), ValidationError);
  CHECK_THROWS_AS(parse_domain(fixtures + "/missing.json"), ValidationError);
}

TEST_CASE("reports are stable text") {
  const auto d = parse_domain(fixtures + "/slit_square.json").domain;
  const auto dec = whitney_decompose(d, 4);
  const auto anchors = compute_anchors(dec, d);
  const std::string a = dump_report(to_json(dec.stats()));
  CHECK(a == dump_report(to_json(dec.stats())));
  CHECK(a.back() == '\n');
  const auto j = Json::parse(a);
  CHECK(j.is_object());
  CHECK(dump_report(Json::object()) == "{}\n");

  const std::string csv = cubes_csv(dec, anchors);
  CHECK(csv.starts_with("index,cx,cy,r,depth,aQx,aQy,sector_id\n"));
  CHECK(count(csv, "\n") == dec.size() + 1);

  const auto se = to_json(anchors.front().omega);
  for (const char* key : {"anchor", "carrier", "sector", "sector_id", "witness"}) CHECK(se.contains(key));
}

TEST_CASE("selection and jet files") {
  const auto p = parse_selection_problem(Json::parse(R"({"n": 2, "nodes": [
      {"id": 0, "constraint": {"kind": "hyperplane", "h": [0, 1], "b": 0}},
      {"id": 1, "constraint": {"kind": "hyperplane", "h": [0, 1], "b": 1}},
      {"id": 2, "constraint": {"kind": "full"}}],
      "edges": [{"a": 0, "b": 1, "w": 2}]})"));
  CHECK(p.constraints.size() == 3);
  CHECK(p.constraints[2].kind == AffineConstraint::Kind::full);
  CHECK(lipschitz_selection(p).seminorm == doctest::Approx(0.5));

  BoundaryJet jet{{1.0, 2.5}, {{0, 1}, {0.25, -3}}, 0.5};
  const auto back = parse_jet(jet_to_json(jet), 2);
  CHECK(back.f == jet.f);
  CHECK(back.g == jet.g);
  CHECK(back.eta == 0.5);
  CHECK_THROWS_WITH(parse_jet(jet_to_json(jet), 3), "missing cube data for cube 2");
}

TEST_CASE("field descriptors and boundary data") {
  CHECK(parse_field_spec("affine:1,2,3").kind == FieldKind::affine);
  const auto q = parse_field_spec("quadratic:1,0,0,1,0,0,0");
  CHECK(q.kind == FieldKind::quadratic);
  CHECK(q.A[3] == 1.0);
  CHECK(parse_field_spec("slit-witness").kind == FieldKind::slit_witness);
  CHECK_THROWS_WITH(parse_field_spec("cubic:1"), doctest::Contains("bad field descriptor"));

  const auto analytic = parse_boundary_data(Json::parse(R"({"analytic": "slit-witness"})"));
  CHECK(analytic.analytic);
  const auto table = parse_boundary_data(Json::parse(R"({"0,0.5,0": 1.5, "1/2,1,0": -2})"));
  REQUIRE(table.table);
  CHECK(table.table->table().size() == 2);
  const auto again = parse_boundary_data(boundary_data_to_json(*table.table));
  CHECK(again.table->table() == table.table->table());
}

TEST_CASE("run configuration") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  c.tol.lp = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK(parse_seed("42") == 42);
  CHECK_THROWS_WITH(parse_seed("x"), doctest::Contains("bad seed"));
  setenv("WHITNEY_SEED", "7", 1);
  RunConfig e;
  e.apply_environment();
  CHECK(e.seed == 7);
  unsetenv("WHITNEY_SEED");
}

TEST_CASE("svg layers") {
  const auto d = parse_domain(fixtures + "/slit_square.json").domain;
  const auto dec = whitney_decompose(d, 4);
  const auto anchors = compute_anchors(dec, d);
  const auto graph = build_pair_graph(dec);
  RenderArtifacts art;
  art.decomposition = &dec;
  art.anchors = anchors;
  art.graph = &graph;
  for (Point p : {Point{0, 0}, Point{0.5, 0}}) {
    const auto e = split_elements_at(d, boundary_sample(d, p));
    art.elements.insert(art.elements.end(), e.begin(), e.end());
  }
  RenderSpec spec;
  spec.layers = {Layer::domain, Layer::cubes, Layer::split_elements, Layer::anchors, Layer::pair_graph};
  const std::string svg = render_svg(d, spec, art);
  CHECK(svg.starts_with("<svg"));
  CHECK(count(svg, "<rect") == dec.size());
  CHECK(count(svg, "class=\"sector\"") == 3);
  CHECK(svg == render_svg(d, spec, art));

  spec.layers = {Layer::field_heatmap};
  CHECK_THROWS_WITH(render_svg(d, spec, art), "layer data missing: field-heatmap");
  CHECK(parse_layer("pair-graph") == Layer::pair_graph);
  CHECK(to_string(Layer::split_elements) == "split-elements");
  CHECK_THROWS_AS(parse_layer("bogus"), ValidationError);
}

TEST_CASE("heatmap of the slit witness") {
  const auto d = parse_domain(fixtures + "/slit_square.json").domain;
  const auto w = synthesize_test_field(d, FieldSpec::slit_witness());
  const auto h = rasterize_field(d, *w, {{-1, -1}, {1, 1}}, 64, 64);
  CHECK(h.at(32, 20) == doctest::Approx(0.0));  // above the slit
  CHECK(h.at(32, 44) == doctest::Approx(1.0));  // below
  CHECK(h.lo == doctest::Approx(0.0));
  CHECK(h.hi == doctest::Approx(1.0));
  const auto outside = rasterize_field(d, *w, {{-2, -2}, {2, 2}}, 8, 8);
  CHECK(std::isnan(outside.at(0, 0)));

  RenderArtifacts art;
  art.field = w.get();
  RenderSpec spec;
  spec.layers = {Layer::field_heatmap};
  spec.resolution = 32;
  const std::string svg = render_svg(d, spec, art);
  CHECK(svg.find("data:image/bmp;base64,") != std::string::npos);
  spec.resolution = 0;
  CHECK_THROWS_AS(render_svg(d, spec, art), ValidationError);
}

TEST_CASE("command line tool") {
  const std::string cli = C2TRACE_CLI;
  const auto dir = std::filesystem::temp_directory_path() / "c2trace_cli_test";
  std::filesystem::create_directories(dir);
  auto run = [&](const std::string& args) { return std::system((cli + " " + args + " > /dev/null 2>&1").c_str()) >> 8; };
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  CHECK(run("metric dist --domain " + fixtures + "/slit_square.json --from 0,0.1 --to 0,-0.1 --out " + (dir / "d.json").string()) == 0);
  CHECK(Json::parse(slurp(dir / "d.json"))["distance"].get<double>() == doctest::Approx(1.0));

  CHECK(run("whitney decompose --domain " + fixtures + "/unit_square.json --depth 4 --out " + (dir / "c.csv").string()) == 0);
  CHECK(slurp(dir / "c.csv").starts_with("index,cx,cy,r,depth,aQx,aQy,sector_id"));

  CHECK(run("boundary split --domain " + fixtures + "/hub.json --point 0,0 --out " + (dir / "s.json").string()) == 0);
  CHECK(slurp(dir / "s.json").find("\"count\": 6") != std::string::npos);

  CHECK(run("whitney decompose --domain " + fixtures + "/unit_square.json --depth 0") == 2);
  CHECK(run("metric dist --domain " + fixtures + "/unit_square.json --from 5,5 --to 0.5,0.5") == 2);
  CHECK(run("check-fp --domain " + fixtures + "/slit_square.json --field slit-witness --depth 4 --corrupt --budget 20") == 3);
  CHECK(run("frobnicate") == 2);
  std::filesystem::remove_all(dir);
}
