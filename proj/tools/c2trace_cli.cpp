#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>

#include "c2trace/error.hpp"
#include "c2trace/io.hpp"
#include "c2trace/pipeline.hpp"
#include "c2trace/svg.hpp"

using namespace c2trace;

namespace {

Point parse_point_arg(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ValidationError("expected x,y but got '" + text + "'");
  bool exact = true;
  return {parse_coordinate(text.substr(0, comma), exact), parse_coordinate(text.substr(comma + 1), exact)};
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    bool exact = true;
    out.push_back(parse_coordinate(text.substr(start, comma - start), exact));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Flavor parse_flavor(const std::string& s) {
  if (s == "standard") return Flavor::standard;
  if (s == "refined") return Flavor::refined;
  throw ValidationError("flavor must be standard or refined");
}

LpSolver parse_solver(const std::string& s) {
  if (s == "auto") return LpSolver::automatic;
  if (s == "simplex") return LpSolver::simplex;
  if (s == "ipm") return LpSolver::ipm;
  throw ValidationError("solver must be auto, simplex or ipm");
}

struct Common {
  RunConfig cfg;
  std::string flavor = "standard";
  std::string solver = "auto";
  std::string field;
  std::string data;

  void add_domain(CLI::App* app) {
    app->add_option("--domain", cfg.domain, "domain JSON file")->required()->check(CLI::ExistingFile);
  }
  void add_tolerances(CLI::App* app) {
    app->add_option("--equiv-tol", cfg.tol.equiv, "element equivalence tolerance");
    app->add_option("--lp-tol", cfg.tol.lp, "LP tolerance");
    app->add_option("--probe-tol", cfg.tol.probe, "trace probe tolerance");
  }
  void add_data(CLI::App* app) {
    auto* f = app->add_option("--field", field, "affine:a1,a2,b | quadratic:A11,A12,A21,A22,a1,a2,b | slit-witness");
    auto* d = app->add_option("--data", data, "boundary data JSON file")->check(CLI::ExistingFile);
    f->excludes(d);
  }

  PipelineOptions pipeline() const {
    PipelineOptions o;
    o.depth = cfg.depth;
    o.flavor = parse_flavor(flavor);
    o.solver = parse_solver(solver);
    o.seed = cfg.seed;
    o.lp_tol = cfg.tol.lp;
    o.probe_tol = cfg.tol.probe;
    o.equiv_tol = cfg.tol.equiv;
    return o;
  }

  BoundaryData boundary(const PolygonalDomain& domain, std::shared_ptr<const TestField>& keep) const {
    std::optional<FieldSpec> spec;
    if (!data.empty()) {
      auto file = parse_boundary_data(std::filesystem::path(data));
      if (file.table) return std::move(*file.table);
      spec = file.analytic;
    } else if (!field.empty()) {
      spec = parse_field_spec(field);
    } else {
      throw ValidationError("one of --field or --data is required");
    }
    keep = synthesize_test_field(domain, *spec);
    return trace_data(keep);
  }
};

Json decomposition_report(const WhitneyDecomposition& dec, const PolygonalDomain& domain, bool dyadic) {
  std::size_t ok = 0;
  for (const Cube& q : dec.cubes()) {
    const double d = cube_dist_to_boundary(domain, q);
    const bool pass = dec.flavor() == Flavor::standard ? (q.diam() <= d && d <= 4.0 * q.diam())
                                                       : (4.0 * q.diam() <= d && d <= 20.0 * q.diam());
    ok += pass;
  }
  return {{"cubes", dec.size()},
          {"flavor", dec.flavor() == Flavor::standard ? "standard" : "refined"},
          {"dyadic_input", dyadic},
          {"distance_band_ok", ok},
          {"stats", to_json(dec.stats())}};
}

// Sample points for the split-elements layer and the accessibility scan.
std::vector<Point> boundary_points(const PolygonalDomain& domain, int per_feature) {
  std::vector<Point> pts(domain.vertices().begin(), domain.vertices().end());
  for (const auto& f : domain.features())
    for (int k = 1; k < per_feature; ++k) {
      const double t = static_cast<double>(k) / per_feature;
      pts.push_back(f.seg.a + t * (f.seg.b - f.seg.a));
    }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// `count` points spread over the boundary by arc length.
std::vector<Point> spread_boundary_points(const PolygonalDomain& domain, int count) {
  double total = 0.0;
  for (const auto& f : domain.features()) total += dist_inf(f.seg.a, f.seg.b);
  std::vector<Point> pts;
  double acc = 0.0;
  int next = 0;
  for (const auto& f : domain.features()) {
    const double len = dist_inf(f.seg.a, f.seg.b);
    while (next < count && (next + 0.5) * total / count < acc + len) {
      const double t = ((next + 0.5) * total / count - acc) / len;
      pts.push_back(f.seg.a + t * (f.seg.b - f.seg.a));
      ++next;
    }
    acc += len;
  }
  return pts;
}

int run(int argc, char** argv) {
  CLI::App app{"Whitney extension and split-boundary trace toolkit"};
  app.require_subcommand(1);
  Common c;
  std::string seed_text;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed_text, "random seed (WHITNEY_SEED overrides)");
    sub->add_option("--out,--report", c.cfg.out, "report path, stdout when omitted");
  };

  // whitney decompose
  auto* whitney = app.add_subcommand("whitney", "Whitney decomposition");
  whitney->require_subcommand(1);
  auto* decompose = whitney->add_subcommand("decompose", "decompose a domain into Whitney cubes");
  c.add_domain(decompose);
  add_common(decompose);
  decompose->add_option("--depth", c.cfg.depth, "depth limit");
  decompose->add_option("--flavor", c.flavor, "standard or refined");
  decompose->add_option("--csv", c.cfg.csv, "cube table (also written when --out ends in .csv)");

  // metric dist
  auto* metric = app.add_subcommand("metric", "intrinsic metric");
  metric->require_subcommand(1);
  auto* dist = metric->add_subcommand("dist", "geodesic distance between two points");
  c.add_domain(dist);
  add_common(dist);
  std::string from, to;
  dist->add_option("--from", from)->required();
  dist->add_option("--to", to)->required();

  // boundary split | scan
  auto* boundary = app.add_subcommand("boundary", "split boundary");
  boundary->require_subcommand(1);
  auto* split = boundary->add_subcommand("split", "split-boundary elements at a boundary point");
  c.add_domain(split);
  add_common(split);
  std::string point;
  int split_samples = 0;
  auto* point_opt = split->add_option("--point", point, "boundary point x,y");
  split->add_option("--samples", split_samples, "number of evenly spread boundary samples")->excludes(point_opt);
  auto* scan = boundary->add_subcommand("scan", "accessibility scan of boundary samples");
  c.add_domain(scan);
  add_common(scan);
  int per_feature = 4;
  double bound = 10.0;
  scan->add_option("--per-feature", per_feature, "samples per boundary segment");
  scan->add_option("--bound", bound, "geodesic length bound");

  // extend
  auto* extend = app.add_subcommand("extend", "extend boundary data to a C^2 field");
  c.add_domain(extend);
  add_common(extend);
  c.add_tolerances(extend);
  c.add_data(extend);
  int trace_samples = 50;
  extend->add_option("--depth", c.cfg.depth, "depth limit");
  extend->add_option("--flavor", c.flavor, "standard or refined");
  extend->add_option("--solver", c.solver, "auto, simplex or ipm");
  extend->add_option("--trace-samples", trace_samples, "number of trace probes");
  extend->add_option("--csv", c.cfg.csv, "cube table");
  std::string jet_path;
  int eval_grid = 5;
  extend->add_option("--jet", jet_path, "jet file; skips the selection step")->check(CLI::ExistingFile);
  extend->add_option("--eval-grid", eval_grid, "seminorm samples per cube side");

  // select
  auto* select = app.add_subcommand("select", "Lipschitz selection on a graph file");
  add_common(select);
  std::string graph_path, mode = "min";
  double lambda = 0.0;
  select->add_option("--graph", graph_path, "graph JSON file")->required()->check(CLI::ExistingFile);
  select->add_option("--mode", mode, "min or feas");
  select->add_option("--lambda", lambda, "threshold for feasibility mode");
  select->add_option("--solver", c.solver, "auto, simplex or ipm");

  // check-fp
  auto* checkfp = app.add_subcommand("check-fp", "finiteness check over small subsets");
  c.add_domain(checkfp);
  add_common(checkfp);
  c.add_tolerances(checkfp);
  c.add_data(checkfp);
  int m = 2;
  bool visible = false, corrupt = false;
  std::string alphas = "1,2,4,8";
  checkfp->add_option("--depth", c.cfg.depth, "depth limit");
  checkfp->add_option("--budget", c.cfg.budget, "number of subsets");
  checkfp->add_option("--m", m, "edges per subset");
  checkfp->add_option("--solver", c.solver, "auto, simplex or ipm");
  checkfp->add_flag("--visible", visible, "restrict to visible triples on the refined decomposition");
  checkfp->add_option("--alpha", alphas, "alpha sweep for --visible");
  checkfp->add_flag("--corrupt", corrupt, "perturb one datum to make the data inconsistent");

  // render
  auto* render = app.add_subcommand("render", "SVG rendering");
  c.add_domain(render);
  add_common(render);
  c.add_data(render);
  std::string layers = "domain", viewport;
  int resolution = 512;
  bool render_extension = false;
  render->add_option("--layers", layers, "comma separated layers");
  render->add_option("--depth", c.cfg.depth, "depth limit");
  render->add_option("--flavor", c.flavor, "standard or refined");
  render->add_option("--resolution", resolution, "pixels along the longer side");
  render->add_option("--viewport", viewport, "x0,y0,x1,y1");
  render->add_flag("--extension", render_extension, "heatmap of the extension instead of the test field");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (!seed_text.empty()) c.cfg.seed = parse_seed(seed_text);
  c.cfg.apply_environment();
  c.cfg.validate();

  auto load = [&] { return parse_domain(c.cfg.domain); };

  if (*whitney) {
    c.cfg.command = "whitney decompose";
    const auto parsed = load();
    auto dec = whitney_decompose(parsed.domain, c.cfg.depth);
    if (parse_flavor(c.flavor) == Flavor::refined) dec = refine_4n(dec);
    const auto anchors = compute_anchors(dec, parsed.domain);
    if (c.cfg.out.extension() == ".csv") {
      emit_text(cubes_csv(dec, anchors), c.cfg.out);
    } else {
      emit_report(decomposition_report(dec, parsed.domain, parsed.dyadic), c.cfg.out);
    }
    if (!c.cfg.csv.empty()) emit_text(cubes_csv(dec, anchors), c.cfg.csv);
    return 0;
  }

  if (*metric) {
    const auto parsed = load();
    const IntrinsicMetric im(parsed.domain);
    const Point x = parse_point_arg(from), y = parse_point_arg(to);
    if (!contains(parsed.domain, x) || !contains(parsed.domain, y)) throw ValidationError("outside domain");
    const auto path = im.path(x, y);
    Json verts = Json::array();
    for (Point p : path.vertices) verts.push_back(to_json(p));
    emit_report({{"from", to_json(x)}, {"to", to_json(y)}, {"distance", path.length}, {"path", verts},
                 {"uniform_distance", dist_inf(x, y)}},
                c.cfg.out);
    return 0;
  }

  if (*split) {
    const auto parsed = load();
    std::vector<Point> pts;
    if (!point.empty()) {
      pts.push_back(parse_point_arg(point));
    } else if (split_samples > 0) {
      pts = spread_boundary_points(parsed.domain, split_samples);
    } else {
      throw ValidationError("one of --point or --samples is required");
    }
    Json arr = Json::array();
    std::size_t count = 0;
    for (Point p : pts) {
      const auto els = split_elements_at(parsed.domain, boundary_sample(parsed.domain, p));
      count += els.size();
      for (const auto& e : els) arr.push_back(to_json(e));
    }
    emit_report({{"count", count}, {"elements", arr}}, c.cfg.out);
    return 0;
  }

  if (*scan) {
    const auto parsed = load();
    const IntrinsicMetric im(parsed.domain);
    std::vector<BoundarySample> samples;
    for (Point p : boundary_points(parsed.domain, per_feature)) samples.push_back(boundary_sample(parsed.domain, p));
    const auto reports = accessibility_scan(im, samples, bound);
    Json arr = Json::array();
    std::size_t suspected = 0;
    for (const auto& r : reports) {
      const bool bad = r.status == Access::suspected_inaccessible;
      suspected += bad;
      arr.push_back({{"point", to_json(r.sample.point)}, {"suspected_inaccessible", bad}, {"distance", r.distance}});
    }
    emit_report({{"bound", bound}, {"samples", arr}, {"suspected", suspected}}, c.cfg.out);
    return 0;
  }

  if (*extend && !jet_path.empty()) {
    const auto parsed = load();
    auto dec = std::make_shared<const WhitneyDecomposition>(whitney_decompose(parsed.domain, c.cfg.depth));
    const auto anchors = compute_anchors(*dec, parsed.domain);
    const BoundaryJet jet = parse_jet(read_json(jet_path, "jet file"), dec->size());
    const auto compat = check_jet_compat(jet, *dec, anchors);
    const auto field = whitney_extend(dec, anchors, jet);
    const auto semi = seminorm_estimate(field, GridSampler{eval_grid, 3});
    emit_report({{"cubes", dec->size()},
                 {"compatibility", to_json(compat)},
                 {"seminorm_out", semi.value},
                 {"seminorm_samples", semi.samples},
                 {"gamma_hat", compat.eta_min > 0.0 ? semi.value / compat.eta_min : 0.0}},
                c.cfg.out);
    if (!compat.pass) std::cerr << "warning: jet fails the compatibility check at eta " << format_number(jet.eta) << "\n";
    return 0;
  }

  if (*extend) {
    const auto parsed = load();
    std::shared_ptr<const TestField> field;
    const BoundaryData data = c.boundary(parsed.domain, field);
    auto opts = c.pipeline();
    opts.trace_samples = trace_samples;
    const auto res = extend_from_boundary(parsed.domain, data, opts);
    Json report = to_json(res.report);
    if (field) report["field_seminorm"] = field->seminorm();
    report["seed"] = c.cfg.seed;
    emit_report(report, c.cfg.out);
    if (!c.cfg.csv.empty()) emit_text(cubes_csv(*res.dec, res.anchors), c.cfg.csv);
    return 0;
  }

  if (*select) {
    std::ifstream in(graph_path);
    Json doc;
    try {
      doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ValidationError(std::string("malformed graph file: ") + e.what());
    }
    const auto problem = parse_selection_problem(doc);
    SelectionOptions so;
    so.solver = parse_solver(c.solver);
    if (mode == "feas" || mode == "feasibility") {
      so.mode = SolveMode::feasibility;
      so.lambda = lambda;
    } else if (mode != "min") {
      throw ValidationError("mode must be min or feas");
    }
    const auto sel = lipschitz_selection(problem, so);
    Json report = to_json(sel);
    report["constraint_residual"] = max_constraint_residual(problem, sel.values);
    emit_report(report, c.cfg.out);
    return 0;
  }

  if (*checkfp) {
    const auto parsed = load();
    std::shared_ptr<const TestField> field;
    const BoundaryData data = c.boundary(parsed.domain, field);
    FinitenessOptions fo;
    fo.pipeline = c.pipeline();
    fo.m = m;
    fo.budget = c.cfg.budget;
    fo.corrupt = corrupt;
    if (visible) {
      VisibleCheckOptions vo;
      vo.finiteness = fo;
      vo.alphas = parse_list(alphas);
      const auto rep = visible_subset_check(parsed.domain, data, vo);
      emit_report(to_json(rep), c.cfg.out);
      return rep.finiteness.full_feasible ? 0 : exit_code(ErrorKind::infeasible);
    }
    const auto rep = check_finiteness(parsed.domain, data, fo);
    emit_report(to_json(rep), c.cfg.out);
    return rep.full_feasible ? 0 : exit_code(ErrorKind::infeasible);
  }

  if (*render) {
    const auto parsed = load();
    RenderSpec spec;
    spec.layers.clear();
    std::size_t start = 0;
    while (start <= layers.size()) {
      const auto comma = layers.find(',', start);
      spec.layers.push_back(parse_layer(layers.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    spec.resolution = resolution;
    if (!viewport.empty()) {
      const auto v = parse_list(viewport);
      if (v.size() != 4) throw ValidationError("viewport needs x0,y0,x1,y1");
      spec.viewport = Box{{v[0], v[1]}, {v[2], v[3]}};
    }
    auto has = [&](Layer l) { return std::find(spec.layers.begin(), spec.layers.end(), l) != spec.layers.end(); };

    RenderArtifacts art;
    std::optional<ExtensionResult> res;
    std::shared_ptr<const WhitneyDecomposition> dec;
    std::vector<CubeAnchor> anchors;
    PairGraph graph;
    std::shared_ptr<const TestField> field;
    if (has(Layer::field_heatmap) && render_extension) {
      res = extend_from_boundary(parsed.domain, c.boundary(parsed.domain, field), c.pipeline());
      dec = res->dec;
      anchors = res->anchors;
      graph = res->graph;
      art.field = &*res->field;
    } else {
      if (has(Layer::field_heatmap)) {
        if (field.get() == nullptr && !c.field.empty()) field = synthesize_test_field(parsed.domain, parse_field_spec(c.field));
        art.field = field.get();
      }
      if (has(Layer::cubes) || has(Layer::anchors) || has(Layer::pair_graph)) {
        auto d = whitney_decompose(parsed.domain, c.cfg.depth);
        if (parse_flavor(c.flavor) == Flavor::refined) d = refine_4n(d);
        dec = std::make_shared<const WhitneyDecomposition>(std::move(d));
        anchors = compute_anchors(*dec, parsed.domain);
        if (has(Layer::pair_graph)) graph = build_pair_graph(*dec);
      }
    }
    art.decomposition = dec.get();
    art.anchors = anchors;
    if (has(Layer::pair_graph)) art.graph = &graph;
    if (has(Layer::split_elements))
      for (Point p : boundary_points(parsed.domain, 2))
        for (const auto& e : split_elements_at(parsed.domain, boundary_sample(parsed.domain, p))) art.elements.push_back(e);
    emit_text(render_svg(parsed.domain, spec, art), c.cfg.out);
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
