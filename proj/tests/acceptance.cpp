// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "c2trace/error.hpp"
#include "c2trace/io.hpp"
#include "c2trace/pipeline.hpp"

using namespace c2trace;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Fixture {
  std::string name;
  PolygonalDomain domain;
};

std::vector<Fixture> load_fixtures() {
  std::vector<Fixture> out;
  for (const char* name : {"unit_square", "slit_square", "hub", "comb"})
    out.push_back({name, parse_domain(std::filesystem::path(C2TRACE_FIXTURES) / (std::string(name) + ".json")).domain});
  return out;
}

const Fixture& fixture(const std::vector<Fixture>& all, const std::string& name) {
  return *std::find_if(all.begin(), all.end(), [&](const Fixture& f) { return f.name == name; });
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Point random_point(const PolygonalDomain& d, std::mt19937_64& rng) {
  const Box b = d.bbox();
  std::uniform_real_distribution<double> ux(b.lo.x, b.hi.x), uy(b.lo.y, b.hi.y);
  for (;;) {
    const Point p{ux(rng), uy(rng)};
    if (contains(d, p)) return p;
  }
}

// Sum over the second-order multi-indices of the sup on a dense grid.
double sampled_seminorm(const SmoothField& f, const PolygonalDomain& d, int grid = 401) {
  const Box b = d.bbox();
  double xx = 0.0, xy = 0.0, yy = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const Point p{b.lo.x + (i + 0.5) * (b.hi.x - b.lo.x) / grid, b.lo.y + (j + 0.5) * (b.hi.y - b.lo.y) / grid};
      if (!contains(d, p)) continue;
      const Jet2 v = f.eval(p);
      xx = std::max(xx, std::abs(v.hess.xx));
      xy = std::max(xy, std::abs(v.hess.xy));
      yy = std::max(yy, std::abs(v.hess.yy));
    }
  return xx + xy + yy;
}

std::vector<FieldSpec> synthesized_fields(const std::string& fixture) {
  std::vector<FieldSpec> out{
      FieldSpec::affine({0.5, -0.25}, 1.0),
      FieldSpec::quadratic({1, 0, 0, 0}, {0, 0}, 0),
      FieldSpec::quadratic({0, 0.5, 0.5, 0}, {0, 0}, 0),
      FieldSpec::quadratic({0.5, 0.25, 0.25, -0.75}, {1, -1}, 0.5),
  };
  out.push_back(fixture == "slit_square" ? FieldSpec::slit_witness() : FieldSpec::quadratic({-1, 0, 0, 2}, {0.25, 0}, 0));
  return out;
}

// Whitney band, neighbor size ratios and neighbor counts.
Outcome whitney_invariants(const std::vector<Fixture>& fx) {
  bool ok = true;
  std::size_t checked = 0;
  std::string nhat;
  for (const auto& f : fx) {
    int n = 0;
    for (int depth = 5; depth <= 8; ++depth) {
      const auto dec = whitney_decompose(f.domain, depth);
      for (std::size_t k = 0; k < dec.size(); ++k) {
        const Cube& q = dec.cube(k);
        const double d = cube_dist_to_boundary(f.domain, q);
        ok &= q.diam() <= d && d <= 4.0 * q.diam();
        for (int j : dec.neighbors(k)) {
          const double r = dec.cube(j).diam() / q.diam();
          ok &= 0.25 <= r && r <= 4.0;
        }
        n = std::max<int>(n, static_cast<int>(dec.neighbors(k).size()));
        ++checked;
      }
      ok &= dec.stats().max_neighbors <= n;
      const auto ref = refine_4n(dec);
      for (const Cube& q : ref.cubes()) {
        const double d = cube_dist_to_boundary(f.domain, q);
        ok &= 4.0 * q.diam() <= d && d <= 20.0 * q.diam();
        ++checked;
      }
    }
    nhat += (nhat.empty() ? "" : " ") + f.name + "=" + std::to_string(n);
  }
  return {ok, std::to_string(checked) + " cubes exact; measured N: " + nhat};
}

// A point whose cube K has its whole dilation K* inside the covered region.
bool fully_covered(const WhitneyDecomposition& dec, Point x) {
  const auto k = dec.locate(x);
  if (!k) return false;
  const Cube star = dilate(dec.cube(*k), 9.0 / 8.0);
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; j <= 4; ++j)
      if (!dec.locate({star.lo().x + i * star.diam() / 4, star.lo().y + j * star.diam() / 4})) return false;
  return true;
}

Outcome partition_of_unity(const std::vector<Fixture>& fx) {
  bool ok = true;
  double worst_sum = 0.0;
  std::string detail;
  std::mt19937_64 rng(0);
  for (const char* name : {"unit_square", "slit_square"}) {
    const auto& f = fixture(fx, name);
    std::vector<double> c1, c2;
    for (int depth = 5; depth <= 8; ++depth) {
      auto dec = std::make_shared<const WhitneyDecomposition>(whitney_decompose(f.domain, depth));
      const PartitionOfUnity pou(dec);
      int taken = 0;
      while (taken < 1250) {
        const Point x = random_point(f.domain, rng);
        if (!fully_covered(*dec, x)) continue;
        double sum = 0.0;
        for (const auto& b : pou.evaluate(x)) sum += b.phi;
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        ++taken;
      }
      const auto pb = partition_bounds(pou);
      c1.push_back(pb.c1);
      c2.push_back(pb.c2);
    }
    const double s1 = *std::max_element(c1.begin(), c1.end()) / *std::min_element(c1.begin(), c1.end());
    const double s2 = *std::max_element(c2.begin(), c2.end()) / *std::min_element(c2.begin(), c2.end());
    ok &= s1 <= 1.1 && s2 <= 1.1;
    detail += std::string(detail.empty() ? "" : "; ") + name + " C1=" + fmt(c1.back()) + " (spread " + fmt(s1) +
              ") C2=" + fmt(c2.back()) + " (spread " + fmt(s2) + ")";
  }
  ok &= worst_sum <= 1e-12;
  return {ok, "10000 points, max |sum-1|=" + fmt(worst_sum) + "; " + detail};
}

BoundaryJet exact_jet(const TestField& field, std::span<const CubeAnchor> anchors) {
  BoundaryJet jet;
  for (const auto& a : anchors) {
    const Jet2 t = field.trace(a.omega);
    jet.f.push_back(t.value);
    jet.g.push_back(t.grad);
  }
  return jet;
}

// Pass/fail at the default depth 5. Depth 7 is reported: rounding in data at
// non-dyadic anchors grows like diam^-2 in the second derivatives.
Outcome affine_reproduction(const std::vector<Fixture>& fx) {
  double err = 0.0, semi = 0.0, semi7 = 0.0;
  const TestField L(FieldSpec::affine({0.75, -0.625}, 0.25));
  for (const auto& f : fx)
    for (int depth : {5, 7}) {
      auto dec = std::make_shared<const WhitneyDecomposition>(whitney_decompose(f.domain, depth));
      const auto anchors = compute_anchors(*dec, f.domain);
      const auto field = whitney_extend(dec, anchors, exact_jet(L, anchors));
      for (Point x : sample_points(*dec, GridSampler{})) err = std::max(err, std::abs(field.eval(x).value - L.eval(x).value));
      double& s = depth == 5 ? semi : semi7;
      s = std::max(s, seminorm_estimate(field).value);
    }
  return {err <= 1e-9 && semi <= 1e-10, "max|F-L|=" + fmt(err) + " (depths 5, 7); seminorm " + fmt(semi) +
                                            " at depth 5, " + fmt(semi7) + " at depth 7"};
}

Outcome extension_constant(const std::vector<Fixture>& fx) {
  bool ok = true;
  std::string detail;
  const std::vector<FieldSpec> fields{FieldSpec::quadratic({1, 0, 0, 0}, {0, 0}, 0),
                                      FieldSpec::quadratic({0.5, 0.25, 0.25, -0.75}, {1, -1}, 0.5)};
  for (const char* name : {"unit_square", "slit_square"}) {
    const auto& f = fixture(fx, name);
    for (std::size_t fi = 0; fi < fields.size(); ++fi) {
      const TestField q(fields[fi]);
      std::vector<double> gammas;
      for (int depth = 5; depth <= 7; ++depth) {
        auto dec = std::make_shared<const WhitneyDecomposition>(whitney_decompose(f.domain, depth));
        const auto anchors = compute_anchors(*dec, f.domain);
        const FieldJet fj = jet_from_field(q, *dec, anchors);
        const double eta = check_jet_compat(fj.jet, *dec, anchors).eta_min;
        const double s = seminorm_estimate(whitney_extend(dec, anchors, fj.jet)).value;
        gammas.push_back(eta > 0.0 ? s / eta : std::numeric_limits<double>::infinity());
      }
      const double lo = *std::min_element(gammas.begin(), gammas.end());
      const double hi = *std::max_element(gammas.begin(), gammas.end());
      ok &= std::isfinite(hi) && hi < 2.0 * lo;
      detail += std::string(detail.empty() ? "" : "; ") + name + "/q" + std::to_string(fi + 1) + " gamma=" + fmt(gammas[0]) +
                "," + fmt(gammas[1]) + "," + fmt(gammas[2]);
    }
  }
  return {ok, detail};
}

Outcome taylor_suite(const std::vector<Fixture>& fx) {
  std::size_t pairs = 0, violations = 0;
  double worst = 0.0;
  std::mt19937_64 rng(0);
  for (const auto& f : fx) {
    const IntrinsicMetric metric(f.domain);
    std::vector<std::pair<Point, Point>> samples;
    for (int i = 0; i < 10000; ++i) samples.emplace_back(random_point(f.domain, rng), random_point(f.domain, rng));
    for (const auto& spec : synthesized_fields(f.name)) {
      const auto field = synthesize_test_field(f.domain, spec);
      const double s = sampled_seminorm(*field, f.domain);
      const auto rep = verify_taylor(*field, metric, samples, s, 1e-8);
      pairs += rep.pairs;
      violations += rep.violations.size();
      worst = std::max({worst, rep.max_remainder_ratio, rep.max_gradient_ratio});
    }
  }
  return {violations == 0, std::to_string(pairs) + " pairs, " + std::to_string(violations) +
                               " violations, largest bound ratio " + fmt(worst)};
}

Outcome trace_recovery(const std::vector<Fixture>& fx) {
  bool ok = true;
  double worst_final = 0.0, c_hat = 0.0;
  std::size_t rays = 0;
  for (const auto& f : fx) {
    const auto base = whitney_decompose(f.domain, 5);
    const auto base_anchors = compute_anchors(base, f.domain);
    std::vector<int> all(base.size()), picks;
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(0);
    std::sample(all.begin(), all.end(), std::back_inserter(picks), 50, rng);
    PipelineOptions opts;
    opts.depth = 5;
    opts.focus_depth = 24;
    std::vector<SplitElement> probes;
    for (int k : picks) {
      opts.focus.push_back({base_anchors[k].a.point, base.cube(k).center});
      probes.push_back(with_witness(base_anchors[k].omega, base.cube(k).center));
    }
    TraceOptions topts;
    topts.steps = 16;
    for (const auto& spec : {FieldSpec::affine({0.75, -0.625}, 0.25), FieldSpec::quadratic({1, 0, 0, 0}, {0, 0}, 0)}) {
      const auto field = synthesize_test_field(f.domain, spec);
      const auto data = trace_data(field);
      const auto res = extend_from_boundary(f.domain, data, opts);
      for (const auto& omega : probes) {
        const TraceProbe p = trace_probe(*res.field, omega, topts);
        const double fw = data(omega);
        std::vector<double> r;
        for (const auto& s : p.samples) r.push_back(std::abs(s.value - fw));
        ++rays;
        if (spec.kind == FieldKind::affine) {
          for (std::size_t i = 6; i < r.size(); ++i) ok &= r[i] <= r[i - 1] + 1e-12;
          ok &= p.samples.back().t == std::ldexp(1.0, -16) && r.back() <= 1e-4;
          worst_final = std::max(worst_final, r.back());
        } else {
          for (std::size_t i = 0; i < r.size(); ++i) {
            const double t = p.samples[i].t;
            c_hat = std::max(c_hat, r[i] / (t * t + t));
          }
        }
      }
    }
  }
  ok &= std::isfinite(c_hat);
  return {ok, std::to_string(rays) + " rays to t=2^-16; affine final residual max " + fmt(worst_final) +
                  "; quadratic C=" + fmt(c_hat)};
}

// Smallest uniform-norm Lipschitz constant by grid search over points on
// each constraint line, refined around the best point.
double brute_force_lambda(const SelectionProblem& p) {
  const std::size_t n = p.constraints.size();
  std::vector<Point> base(n), dir(n);
  for (std::size_t v = 0; v < n; ++v) {
    const auto& c = p.constraints[v];
    const double hh = c.h[0] * c.h[0] + c.h[1] * c.h[1];
    base[v] = {c.b * c.h[0] / hh, c.b * c.h[1] / hh};
    const double hn = std::sqrt(hh);
    dir[v] = {-c.h[1] / hn, c.h[0] / hn};
  }
  auto lambda_at = [&](const std::vector<double>& s) {
    double lam = 0.0;
    for (const auto& e : p.edges) {
      const Point a = base[e.a] + s[e.a] * dir[e.a], b = base[e.b] + s[e.b] * dir[e.b];
      lam = std::max(lam, dist_inf(a, b) / e.w);
    }
    return lam;
  };
  const int pts = n <= 3 ? 41 : 25;
  std::vector<double> center(n, 0.0);
  double half = 8.0, best = std::numeric_limits<double>::infinity();
  for (int level = 0; level < 14; ++level) {
    const double step = 2.0 * half / (pts - 1);
    std::vector<int> idx(n, 0);
    std::vector<double> s(n), arg = center;
    for (;;) {
      for (std::size_t v = 0; v < n; ++v) s[v] = center[v] - half + idx[v] * step;
      const double lam = lambda_at(s);
      if (lam < best) {
        best = lam;
        arg = s;
      }
      std::size_t v = 0;
      while (v < n && ++idx[v] == pts) idx[v++] = 0;
      if (v == n) break;
    }
    center = arg;
    half = 4.0 * step;
  }
  return best;
}

Outcome lp_correctness() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coef(-4, 4), nodes_d(2, 4), wd(1, 6);
  double worst_gap = 0.0, worst_res = 0.0;
  for (int inst = 0; inst < 25; ++inst) {
    SelectionProblem p;
    const int n = nodes_d(rng);
    for (int v = 0; v < n; ++v) {
      Vec h{0.0, 0.0};
      while (h[0] == 0.0 && h[1] == 0.0) h = {coef(rng) / 4.0, coef(rng) / 4.0};
      p.constraints.push_back(AffineConstraint::hyperplane(h, coef(rng) / 4.0));
    }
    for (int v = 1; v < n; ++v) p.edges.push_back({std::uniform_int_distribution<int>(0, v - 1)(rng), v, wd(rng) / 2.0});
    if (n >= 3 && rng() % 2) p.edges.push_back({0, n - 1, wd(rng) / 2.0});
    const auto sel = lipschitz_selection(p, {SolveMode::min_seminorm, 0.0, LpSolver::simplex});
    const auto ipm = lipschitz_selection(p, {SolveMode::min_seminorm, 0.0, LpSolver::ipm});
    const double bf = brute_force_lambda(p);
    worst_gap = std::max({worst_gap, std::abs(sel.seminorm - bf), std::abs(ipm.seminorm - sel.seminorm)});
    worst_res = std::max({worst_res, max_constraint_residual(p, sel.values), max_constraint_residual(p, ipm.values)});
    for (std::size_t v = 0; v < p.constraints.size(); ++v) {
      const Vec once = project_to_affine(sel.values[v], p.constraints[v]);
      worst_res = std::max(worst_res, affine_distance(once, p.constraints[v]));
    }
  }
  return {worst_gap <= 1e-3 && worst_res <= 1e-9,
          "25 instances, max |lambda - grid| " + fmt(worst_gap) + ", max residual " + fmt(worst_res)};
}

Outcome paper_constants(const std::vector<Fixture>& fx) {
  double fg = 0.0, g = 0.0, eta_ratio = 0.0;
  for (const auto& f : fx) {
    auto dec = whitney_decompose(f.domain, 5);
    const auto anchors = compute_anchors(dec, f.domain);
    for (const auto& spec : synthesized_fields(f.name)) {
      if (spec.kind == FieldKind::affine) continue;
      const auto field = synthesize_test_field(f.domain, spec);
      const FieldJet fj = jet_from_field(*field, dec, anchors);
      const auto c = field_jet_constants(fj.jet, dec, anchors, sampled_seminorm(*field, f.domain));
      fg = std::max(fg, c.fg_factor);
      g = std::max(g, c.g_factor);
    }
    PipelineOptions opts;
    opts.depth = 5;
    for (const auto& spec : synthesized_fields(f.name)) {
      if (spec.kind == FieldKind::affine) continue;
      const auto res = extend_from_boundary(f.domain, trace_data(synthesize_test_field(f.domain, spec)), opts);
      eta_ratio = std::max(eta_ratio, res.report.eta_over_lambda);
    }
  }
  return {fg <= 40.0 && g <= 10.0 && eta_ratio <= 60.0,
          "value-gradient factor " + fmt(fg) + " (<= 40), gradient factor " + fmt(g) + " (<= 10), eta/lambda " +
              fmt(eta_ratio) + " (<= 60)"};
}

Outcome finiteness(const std::vector<Fixture>& fx) {
  const auto& f = fixture(fx, "slit_square");
  const auto data = trace_data(synthesize_test_field(f.domain, FieldSpec::slit_witness()));
  bool ok = true;
  std::vector<double> gammas;
  int max_el = 0;
  for (int depth = 5; depth <= 7; ++depth) {
    FinitenessOptions o;
    o.pipeline.depth = depth;
    o.budget = 200;
    const auto rep = check_finiteness(f.domain, data, o);
    ok &= rep.full_feasible && rep.monotone && rep.infeasible_subsets == 0 && rep.max_elements <= 6;
    // (a) without solver slack: the subset optimum never exceeds the full one
    for (const auto& s : rep.subsets) ok &= s.lambda <= rep.base.lambda_full * (1.0 + 1e-9) + 1e-12;
    gammas.push_back(rep.base.gamma_hat);
    max_el = std::max(max_el, rep.max_elements);
  }
  const double lo = *std::min_element(gammas.begin(), gammas.end()), hi = *std::max_element(gammas.begin(), gammas.end());
  ok &= std::isfinite(hi) && hi <= 2.0 * lo;

  FinitenessOptions bad;
  bad.pipeline.depth = 5;
  bad.corrupt = true;
  const auto rep = check_finiteness(f.domain, data, bad);
  bool six = false;
  for (const auto& s : rep.subsets) six |= !s.feasible && s.elements <= 6;
  ok &= !rep.full_feasible && six;
  return {ok, "gamma " + fmt(gammas[0]) + "," + fmt(gammas[1]) + "," + fmt(gammas[2]) + " at depths 5-7, at most " +
                  std::to_string(max_el) + " elements per subset; corrupted datum: " +
                  std::to_string(rep.infeasible_subsets) + "/" + std::to_string(rep.subsets.size()) +
                  " subsets infeasible, full problem infeasible"};
}

Outcome visibility(const std::vector<Fixture>& fx) {
  const auto& f = fixture(fx, "slit_square");
  VisibleCheckOptions o;
  o.finiteness.pipeline.depth = 5;
  o.finiteness.budget = 200;
  const auto rep = visible_subset_check(f.domain, trace_data(synthesize_test_field(f.domain, FieldSpec::slit_witness())), o);
  const bool ok = rep.invisible_triples == 0 && rep.alpha_hat >= 1.0 && rep.alpha_hat <= 8.0 &&
                  rep.gamma_visible >= rep.gamma_all;
  return {ok, std::to_string(rep.triples) + " triples (" + std::to_string(rep.degenerate_triples) +
                  " with one anchor), alpha=" + fmt(rep.alpha_hat) + " (needed " + fmt(rep.alpha_max_needed) +
                  "), gamma visible " + fmt(rep.gamma_visible) + " >= all " + fmt(rep.gamma_all)};
}

Outcome split_topology(const std::vector<Fixture>& fx) {
  bool ok = true;
  auto count = [&](const std::string& name, Point p) {
    const auto& d = fixture(fx, name).domain;
    return split_elements_at(d, boundary_sample(d, p)).size();
  };
  for (double x : {-0.375, -0.25, 0.0, 0.125, 0.4375}) ok &= count("slit_square", {x, 0.0}) == 2;
  ok &= count("slit_square", {0.5, 0.0}) == 1 && count("slit_square", {-0.5, 0.0}) == 1;
  for (const char* name : {"unit_square", "slit_square", "hub", "comb"})
    for (Point p : fixture(fx, name).domain.outer()) ok &= count(name, p) == 1;
  ok &= count("hub", {0.0, 0.0}) == 6;
  ok &= count("hub", {0.5, 0.0}) == 1;

  double excess = 0.0;
  std::size_t pairs = 0;
  for (const auto& f : fx) {
    const IntrinsicMetric metric(f.domain);
    const auto dec = whitney_decompose(f.domain, 5);
    const auto rep = check_anchor_distances(metric, dec, compute_anchors(dec, f.domain));
    ok &= rep.shared_anchor_same_element;
    excess = std::max(excess, rep.max_excess);
    pairs += rep.pairs;
  }
  ok &= excess <= 1e-2;
  return {ok, "element counts exact (slit 2, tips and corners 1, hub center 6); " + std::to_string(pairs) +
                  " intersecting pairs, max excess over 2|a-a'| " + fmt(excess)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no CLI path given"};
  const auto dir = std::filesystem::temp_directory_path() / "c2trace_acceptance";
  std::filesystem::create_directories(dir);
  const std::string fix = C2TRACE_FIXTURES;
  {
    std::ofstream g(dir / "graph.json");
    g << R"({"n": 2, "nodes": [{"id": 0, "constraint": {"kind": "hyperplane", "h": [0, 1], "b": 0}},)"
      << R"({"id": 1, "constraint": {"kind": "hyperplane", "h": [0, 1], "b": 1}}, {"id": 2, "constraint": {"kind": "full"}}],)"
      << R"("edges": [{"a": 0, "b": 1, "w": 2}, {"a": 1, "b": 2, "w": 1}]})";
    auto domain = parse_domain(fix + "/unit_square.json").domain;
    auto dec = whitney_decompose(domain, 4);
    const auto anchors = compute_anchors(dec, domain);
    const TestField q(FieldSpec::quadratic({1, 0, 0, 0}, {0, 0}, 0));
    auto jet = exact_jet(q, anchors);
    std::ofstream(dir / "jet.json") << dump_report(jet_to_json(jet));
    std::ofstream(dir / "data.json") << R"({"analytic": "slit-witness"})";
  }
  const std::vector<std::string> commands{
      "whitney decompose --domain " + fix + "/hub.json --depth 6",
      "whitney decompose --domain " + fix + "/slit_square.json --depth 5 --flavor refined",
      "metric dist --domain " + fix + "/slit_square.json --from 0,0.1 --to 0,-0.1",
      "boundary split --domain " + fix + "/hub.json --samples 40",
      "boundary scan --domain " + fix + "/comb.json --bound 1",
      "extend --domain " + fix + "/slit_square.json --field slit-witness --depth 5",
      "extend --domain " + fix + "/unit_square.json --depth 4 --jet " + (dir / "jet.json").string(),
      "select --graph " + (dir / "graph.json").string(),
      "select --graph " + (dir / "graph.json").string() + " --mode feas --lambda 1",
      "check-fp --domain " + fix + "/slit_square.json --data " + (dir / "data.json").string() + " --depth 5 --budget 200",
      "check-fp --domain " + fix + "/slit_square.json --field slit-witness --depth 4 --visible --alpha 1,2,4,8",
      "render --domain " + fix + "/slit_square.json --layers domain,cubes,anchors,pair-graph,split-elements,field-heatmap "
      "--field slit-witness --depth 4 --resolution 128",
  };
  std::size_t same = 0;
  std::string bad;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::string out[2];
    for (int rep = 0; rep < 2; ++rep) {
      const auto path = dir / ("out" + std::to_string(i) + "_" + std::to_string(rep));
      const std::string cmd = "WHITNEY_SEED=0 \"" + cli + "\" " + commands[i] + " --seed 0 --out " + path.string();
      const int rc = std::system(cmd.c_str());
      out[rep] = rc == 0 ? slurp(path) : "";
    }
    if (!out[0].empty() && out[0] == out[1]) {
      ++same;
    } else {
      bad += " [" + commands[i].substr(0, commands[i].find(" --")) + "]";
    }
  }
  std::filesystem::remove_all(dir);
  return {same == commands.size(),
          std::to_string(same) + "/" + std::to_string(commands.size()) + " commands byte-identical" + bad};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const auto fx = load_fixtures();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"whitney-invariants", [&] { return whitney_invariants(fx); }},
      {"partition-of-unity", [&] { return partition_of_unity(fx); }},
      {"affine-reproduction", [&] { return affine_reproduction(fx); }},
      {"extension-seminorm-constant", [&] { return extension_constant(fx); }},
      {"taylor-verifier", [&] { return taylor_suite(fx); }},
      {"trace-recovery", [&] { return trace_recovery(fx); }},
      {"lp-correctness", [] { return lp_correctness(); }},
      {"jet-and-selection-constants", [&] { return paper_constants(fx); }},
      {"finiteness", [&] { return finiteness(fx); }},
      {"visible-triples", [&] { return visibility(fx); }},
      {"split-boundary-topology", [&] { return split_topology(fx); }},
      {"cli-determinism", [&] { return determinism(cli); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("[%s] %02zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
