#include "c2trace/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <cmath>
#include <queue>
#include <random>
#include <set>

#include "c2trace/error.hpp"

namespace c2trace {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Profile used by the slit witness: quintic smoothstep of (t - t0) / len.
Smoothstep ramp(double t, double t0, double len) {
  Smoothstep s = smoothstep((t - t0) / len);
  s.ds /= len;
  s.dds /= len * len;
  return s;
}

constexpr double kMaxSmoothstepSlope = 15.0 / 8.0;
const double kMaxSmoothstepCurvature = 10.0 / std::sqrt(3.0);

// Dijkstra from `from` that stops once every target is settled.
std::map<int, double> distances_to(const PairGraph& graph, int from, const std::set<int>& targets) {
  std::map<int, double> out;
  std::map<int, double> dist;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[from] = 0.0;
  pq.emplace(0.0, from);
  std::set<int> settled;
  while (!pq.empty() && out.size() < targets.size()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (!settled.insert(u).second) continue;
    if (targets.contains(u)) out[u] = d;
    for (auto [v, w] : graph.adjacent(u)) {
      const auto it = dist.find(v);
      if (it == dist.end() || d + w < it->second) {
        dist[v] = d + w;
        pq.emplace(d + w, v);
      }
    }
  }
  for (int t : targets)
    if (!out.contains(t)) out[t] = std::numeric_limits<double>::infinity();
  return out;
}

struct FiniteContext {
  std::shared_ptr<const WhitneyDecomposition> dec;
  std::vector<CubeAnchor> anchors;
  PairGraph graph;
  std::vector<double> fvals;
  std::vector<AffineConstraint> constraints;
  FinitenessReport report;
};

std::shared_ptr<const WhitneyDecomposition> decompose(const PolygonalDomain& domain, const PipelineOptions& opts) {
  DecomposeOptions dopts;
  dopts.depth_limit = opts.depth;
  dopts.focus = opts.focus;
  dopts.focus_depth = opts.focus_depth;
  auto dec = whitney_decompose(domain, dopts);
  if (opts.flavor == Flavor::refined) dec = refine_4n(dec);
  return std::make_shared<const WhitneyDecomposition>(std::move(dec));
}

double gamma_of(double full, double sub) {
  if (full <= 1e-12) return 1.0;
  return full / std::max(sub, 1e-12);
}

FiniteContext run_finiteness(const PolygonalDomain& domain, const BoundaryData& f, const FinitenessOptions& opts) {
  if (opts.m < 1) throw ValidationError("m must be at least 1");
  FiniteContext ctx;
  auto t0 = Clock::now();
  ctx.dec = decompose(domain, opts.pipeline);
  ctx.anchors = compute_anchors(*ctx.dec, domain);
  ctx.graph = build_pair_graph(*ctx.dec);
  ctx.fvals = cube_data(f, ctx.anchors);
  FinitenessReport& rep = ctx.report;
  rep.base.timings_ms["setup"] = elapsed_ms(t0);
  rep.seed = opts.pipeline.seed;
  rep.budget = opts.budget;
  rep.m = opts.m;
  const WhitneyDecomposition& dec = *ctx.dec;

  if (opts.corrupt) {
    for (std::size_t k = 0; k < dec.size() && rep.corrupted_cube < 0; ++k)
      for (int j : dec.neighbors(k))
        if (j != static_cast<int>(k) && ctx.anchors[j].a.point == ctx.anchors[k].a.point) {
          rep.corrupted_cube = static_cast<int>(k);
          break;
        }
    if (rep.corrupted_cube < 0) throw ValidationError("no shared anchor to corrupt");
    ctx.fvals[rep.corrupted_cube] += opts.corrupt_delta;
  }

  ctx.constraints = hyperplanes_from_data(ctx.graph, ctx.anchors, ctx.fvals, false);
  rep.base.cubes = dec.size();
  rep.base.nodes = ctx.graph.size();
  rep.base.edges = ctx.graph.edges().size();
  rep.base.max_neighbors = dec.stats().max_neighbors;
  rep.base.skirt_fraction = dec.stats().skirt_fraction;

  std::vector<int> focus;
  for (std::size_t v = 0; v < ctx.constraints.size(); ++v)
    if (ctx.constraints[v].kind == AffineConstraint::Kind::empty) focus.push_back(static_cast<int>(v));
  rep.full_feasible = focus.empty();

  t0 = Clock::now();
  const SelectionProblem full = SelectionProblem::from_graph(ctx.graph, ctx.constraints);
  if (rep.full_feasible) {
    SelectionOptions sopts;
    sopts.solver = opts.pipeline.solver;
    const Selection sel = lipschitz_selection(full, sopts);
    rep.base.solver = sel.solver;
    rep.base.lambda_full = sel.seminorm;
    for (const auto& e : full.edges) {
      double gap = 0.0;
      for (int i = 0; i < full.dim; ++i) gap = std::max(gap, std::abs(sel.values[e.a][i] - sel.values[e.b][i]));
      if (sel.seminorm > 0.0 && gap / e.w >= sel.seminorm * (1.0 - 1e-6)) {
        focus.push_back(e.a);
        focus.push_back(e.b);
      }
    }
    std::sort(focus.begin(), focus.end());
    focus.erase(std::unique(focus.begin(), focus.end()), focus.end());
  } else {
    rep.base.solver = "none";
    rep.base.lambda_full = std::numeric_limits<double>::infinity();
  }
  rep.base.timings_ms["full_lp"] = elapsed_ms(t0);

  t0 = Clock::now();
  const auto subsets = finiteness_subsets(ctx.graph, opts.m, opts.budget, opts.pipeline.seed, focus);
  const double lp_slack = opts.pipeline.lp_tol * (1.0 + (rep.full_feasible ? rep.base.lambda_full : 0.0));
  for (const auto& nodes : subsets) {
    SubsetResult sr;
    sr.nodes = nodes;
    std::set<int> cubes;
    for (int v : nodes) {
      cubes.insert(ctx.graph.nodes()[v].q0);
      cubes.insert(ctx.graph.nodes()[v].q1);
    }
    std::set<ElementKey> elements;
    for (int q : cubes) elements.insert(key_of(ctx.anchors[q].omega));
    sr.cubes = static_cast<int>(cubes.size());
    sr.elements = static_cast<int>(elements.size());
    rep.max_elements = std::max(rep.max_elements, sr.elements);

    SelectionProblem sub;
    sub.dim = full.dim;
    bool empty = false;
    for (int v : nodes) {
      sub.constraints.push_back(ctx.constraints[v]);
      empty |= ctx.constraints[v].kind == AffineConstraint::Kind::empty;
    }
    const std::set<int> targets(nodes.begin(), nodes.end());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto dist = distances_to(ctx.graph, nodes[i], targets);
      for (std::size_t j = i + 1; j < nodes.size(); ++j) {
        const double w = dist.at(nodes[j]);
        if (std::isfinite(w)) sub.edges.push_back({static_cast<int>(i), static_cast<int>(j), w});
      }
    }
    if (empty) {
      sr.feasible = false;
      sr.lambda = std::numeric_limits<double>::infinity();
      ++rep.infeasible_subsets;
    } else {
      SelectionOptions sopts;
      sopts.solver = LpSolver::simplex;
      sr.lambda = lipschitz_selection(sub, sopts).lp_objective;
      rep.base.lambda_subset_max = std::max(rep.base.lambda_subset_max, sr.lambda);
      if (rep.full_feasible) {
        const double excess = sr.lambda - rep.base.lambda_full;
        rep.max_monotone_excess = std::max(rep.max_monotone_excess, excess);
        if (excess > lp_slack) rep.monotone = false;
      }
    }
    rep.subsets.push_back(std::move(sr));
  }
  rep.base.timings_ms["subsets"] = elapsed_ms(t0);

  constexpr int bins = 10;
  const double top = rep.base.lambda_subset_max;
  for (int i = 0; i <= bins; ++i) rep.histogram_edges.push_back(top * i / bins);
  rep.histogram.assign(bins, 0);
  for (const auto& s : rep.subsets) {
    if (!s.feasible) continue;
    const int bin = top > 0.0 ? std::min(bins - 1, static_cast<int>(s.lambda / top * bins)) : 0;
    ++rep.histogram[bin];
  }
  rep.base.gamma_hat = rep.full_feasible ? gamma_of(rep.base.lambda_full, rep.base.lambda_subset_max)
                                         : std::numeric_limits<double>::infinity();
  return ctx;
}

}  // namespace

BoundaryData BoundaryData::from_function(Callback fn, std::string provenance) {
  BoundaryData d;
  d.fn_ = std::move(fn);
  d.provenance_ = std::move(provenance);
  return d;
}

BoundaryData BoundaryData::from_table(std::map<ElementKey, double> table) {
  BoundaryData d;
  d.table_ = std::move(table);
  d.provenance_ = "sampled-table";
  return d;
}

double BoundaryData::operator()(const SplitElement& e) const {
  if (fn_) return fn_(e);
  const auto it = table_.find(key_of(e));
  if (it == table_.end())
    throw ValidationError("missing boundary datum at (" + std::to_string(e.anchor.point.x) + ", " +
                          std::to_string(e.anchor.point.y) + ") sector " + std::to_string(e.sector_id));
  return it->second;
}

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::affine:
      return "affine";
    case FieldKind::quadratic:
      return "quadratic";
    case FieldKind::slit_witness:
      return "slit-witness";
  }
  return "unknown";
}

Jet2 TestField::eval_side(Point x, bool below) const {
  Jet2 j;
  switch (spec_.kind) {
    case FieldKind::affine:
      j.value = dot(spec_.a, x) + spec_.b;
      j.grad = spec_.a;
      return j;
    case FieldKind::quadratic: {
      const auto& A = spec_.A;
      const double off = A[1] + A[2];
      j.value = A[0] * x.x * x.x + off * x.x * x.y + A[3] * x.y * x.y + dot(spec_.a, x) + spec_.b;
      j.grad = {2.0 * A[0] * x.x + off * x.y + spec_.a.x, off * x.x + 2.0 * A[3] * x.y + spec_.a.y};
      j.hess = {2.0 * A[0], off, 2.0 * A[3]};
      return j;
    }
    case FieldKind::slit_witness: {
      // chi(x) = 1 for |x| <= 1/4, 0 for |x| >= 1/2; S(y) falls from 1 at
      // y = -1/4 to 0 at y = 1/4; H is 1 below the slit and 0 above.
      const double sx = x.x < 0.0 ? -1.0 : 1.0;
      const Smoothstep c = ramp(0.5 - std::abs(x.x), 0.0, 0.25);
      const double chi = c.s, dchi = -sx * c.ds, ddchi = c.dds;
      const Smoothstep r = ramp(x.y, -0.25, 0.5);
      const double s = 1.0 - r.s, ds = -r.ds, dds = -r.dds;
      const double h = below ? 1.0 : 0.0;
      j.value = s + chi * (h - s);
      j.grad = {dchi * (h - s), (1.0 - chi) * ds};
      j.hess = {ddchi * (h - s), -dchi * ds, (1.0 - chi) * dds};
      return j;
    }
  }
  return j;
}

Jet2 TestField::eval(Point x) const { return eval_side(x, x.y < 0.0); }

Jet2 TestField::trace(const SplitElement& omega) const {
  const Point l = omega.anchor.point;
  const bool below = l.y < 0.0 || (l.y == 0.0 && omega.witness.y < 0.0);
  return eval_side(l, below);
}

double TestField::seminorm() const {
  switch (spec_.kind) {
    case FieldKind::affine:
      return 0.0;
    case FieldKind::quadratic: {
      const auto& A = spec_.A;
      return std::abs(2.0 * A[0]) + std::abs(A[1] + A[2]) + std::abs(2.0 * A[3]);
    }
    case FieldKind::slit_witness: {
      constexpr double lc = 0.25, ls = 0.5;
      return 0.5 * kMaxSmoothstepCurvature / (lc * lc) +
             kMaxSmoothstepSlope * kMaxSmoothstepSlope / (lc * ls) + kMaxSmoothstepCurvature / (ls * ls);
    }
  }
  return 0.0;
}

std::shared_ptr<const TestField> synthesize_test_field(const PolygonalDomain& domain, const FieldSpec& spec) {
  if (spec.kind == FieldKind::slit_witness) {
    const Point a{-0.5, 0.0}, b{0.5, 0.0};
    bool found = false;
    for (const auto& s : domain.slits())
      found |= s.size() == 2 && ((s[0] == a && s[1] == b) || (s[0] == b && s[1] == a));
    if (!found) throw ValidationError("kind unsupported for domain");
  }
  return std::make_shared<const TestField>(spec);
}

BoundaryData trace_data(std::shared_ptr<const TestField> field) {
  return BoundaryData::from_function([field](const SplitElement& e) { return field->trace(e).value; },
                                     "trace-of-field");
}

std::vector<double> cube_data(const BoundaryData& f, std::span<const CubeAnchor> anchors) {
  std::vector<double> out;
  out.reserve(anchors.size());
  for (const auto& a : anchors) out.push_back(f(a.omega));
  return out;
}

FieldJet jet_from_field(const SmoothField& field, const WhitneyDecomposition& dec, std::span<const CubeAnchor> anchors,
                        const PairGraph* graph, const JetOptions& opts) {
  if (anchors.size() != dec.size()) throw ValidationError("missing cube data");
  FieldJet out;
  TraceOptions topts;
  topts.steps = opts.steps;
  topts.tol = opts.probe_tol;
  // Elements shared by several cubes are probed once.
  std::map<ElementKey, std::size_t> done;
  for (std::size_t k = 0; k < dec.size(); ++k) {
    const auto key = key_of(anchors[k].omega);
    if (const auto it = done.find(key); it != done.end()) {
      out.probes.push_back(out.probes[it->second]);
    } else {
      out.probes.push_back(trace_probe(field, anchors[k].omega, topts));
      done.emplace(key, k);
    }
    const TraceProbe& p = out.probes.back();
    if (!p.converged) throw ConvergenceError("probe did not converge");
    out.jet.f.push_back(p.extrapolated);
    out.jet.g.push_back(p.extrapolated_grad);
  }
  if (graph != nullptr) {
    const auto ys = hyperplanes_from_data(*graph, anchors, out.jet.f, false);
    for (std::size_t s = 0; s < graph->size(); ++s) {
      const Point g = out.jet.g[graph->nodes()[s].q0];
      out.node_values.push_back(ys[s].kind == AffineConstraint::Kind::empty ? Vec{g.x, g.y}
                                                                           : project_to_affine({g.x, g.y}, ys[s]));
    }
  }
  return out;
}

FieldJetConstants field_jet_constants(const BoundaryJet& jet, const WhitneyDecomposition& dec,
                                      std::span<const CubeAnchor> anchors, double seminorm) {
  FieldJetConstants c;
  const double inf = std::numeric_limits<double>::infinity();
  auto ratio = [&](double num, double den) {
    if (den > 0.0) return num / den;
    return num <= 1e-12 ? 0.0 : inf;
  };
  for (std::size_t k = 0; k < dec.size(); ++k) {
    for (int j : dec.neighbors(k)) {
      if (j == static_cast<int>(k)) continue;
      const double dsum = dec.cube(k).diam() + dec.cube(j).diam();
      const Point da = anchors[k].a.point - anchors[j].a.point;
      const double fg = std::abs(jet.f[k] - jet.f[j] - dot(jet.g[j], da));
      c.fg_factor = std::max(c.fg_factor, ratio(fg, seminorm * norm_inf(da) * dsum));
      c.g_factor = std::max(c.g_factor, ratio(norm_inf(jet.g[k] - jet.g[j]), seminorm * dsum));
    }
  }
  return c;
}

std::vector<Point> g_from_selection(const PairGraph& graph, const Selection& sel, const WhitneyDecomposition& dec) {
  std::vector<Point> g;
  g.reserve(dec.size());
  for (std::size_t k = 0; k < dec.size(); ++k) {
    int qt = -1;
    for (int j : dec.neighbors(k))
      if (j != static_cast<int>(k)) {
        qt = j;
        break;
      }
    if (qt < 0) throw ValidationError("isolated cube " + std::to_string(k));
    const auto node = graph.node_of(static_cast<int>(k), qt);
    if (!node) throw ValidationError("pair graph does not match decomposition");
    const Vec& v = sel.values.at(*node);
    g.push_back({v.at(0), v.at(1)});
  }
  return g;
}

ExtensionResult extend_from_boundary(const PolygonalDomain& domain, const BoundaryData& f, const PipelineOptions& opts) {
  ExtensionResult res;
  PipelineReport& rep = res.report;
  auto t0 = Clock::now();
  res.dec = decompose(domain, opts);
  const WhitneyDecomposition& dec = *res.dec;
  res.anchors = compute_anchors(dec, domain);
  res.graph = build_pair_graph(dec);
  rep.timings_ms["setup"] = elapsed_ms(t0);
  rep.cubes = dec.size();
  rep.nodes = res.graph.size();
  rep.edges = res.graph.edges().size();
  rep.max_neighbors = dec.stats().max_neighbors;
  rep.skirt_fraction = dec.stats().skirt_fraction;

  t0 = Clock::now();
  const std::vector<double> fvals = cube_data(f, res.anchors);
  auto constraints = hyperplanes_from_data(res.graph, res.anchors, fvals, true);
  const SelectionProblem problem = SelectionProblem::from_graph(res.graph, std::move(constraints));
  SelectionOptions sopts;
  sopts.solver = opts.solver;
  res.selection = lipschitz_selection(problem, sopts);
  rep.solver = res.selection.solver;
  rep.lambda_full = res.selection.seminorm;
  rep.timings_ms["lp"] = elapsed_ms(t0);

  t0 = Clock::now();
  res.jet.f = fvals;
  res.jet.g = g_from_selection(res.graph, res.selection, dec);
  const JetCompatReport compat = check_jet_compat(res.jet, dec, res.anchors);
  res.jet.eta = compat.eta_min;
  rep.eta_min = compat.eta_min;
  rep.eta_over_lambda = rep.lambda_full > 1e-12 ? rep.eta_min / rep.lambda_full : 0.0;
  res.field.emplace(whitney_extend(res.dec, res.anchors, res.jet));
  rep.seminorm_out = seminorm_estimate(*res.field).value;
  rep.timings_ms["extend"] = elapsed_ms(t0);

  t0 = Clock::now();
  std::vector<int> picks(dec.size());
  std::iota(picks.begin(), picks.end(), 0);
  if (static_cast<int>(picks.size()) > opts.trace_samples) {
    std::vector<int> chosen;
    std::mt19937_64 rng(opts.seed);
    std::sample(picks.begin(), picks.end(), std::back_inserter(chosen), opts.trace_samples, rng);
    picks = std::move(chosen);
  }
  TraceOptions topts;
  topts.first = 0;
  topts.stop_at_skirt = true;
  topts.tol = opts.probe_tol;
  for (int k : picks) {
    const SplitElement ray = with_witness(res.anchors[k].omega, dec.cube(k).center);
    const TraceProbe p = trace_probe(*res.field, ray, topts);
    const TraceSample& last = p.samples.back();
    rep.trace_residuals.push_back({k, last.t, std::abs(p.extrapolated - fvals[k]), std::abs(last.value - fvals[k]),
                                   last.t * dist_inf(dec.cube(k).center, res.anchors[k].a.point)});
  }
  rep.timings_ms["trace"] = elapsed_ms(t0);
  return res;
}

FinitenessReport check_finiteness(const PolygonalDomain& domain, const BoundaryData& f, const FinitenessOptions& opts) {
  return run_finiteness(domain, f, opts).report;
}

VisibleReport visible_subset_check(const PolygonalDomain& domain, const BoundaryData& f,
                                   const VisibleCheckOptions& opts) {
  FinitenessOptions fopts = opts.finiteness;
  fopts.pipeline.flavor = Flavor::refined;
  FiniteContext ctx = run_finiteness(domain, f, fopts);
  VisibleReport rep;
  std::vector<double> alphas = opts.alphas;
  std::sort(alphas.begin(), alphas.end());
  if (alphas.empty() || alphas.front() < 1.0) throw ValidationError("alpha values must be at least 1");

  // Needed alpha per distinct triple of cubes; +inf when no cube sees it.
  std::map<std::array<int, 3>, double> needed;
  std::vector<std::vector<std::array<int, 3>>> per_subset;
  for (const auto& s : ctx.report.subsets) {
    std::vector<std::array<int, 3>> triples;
    for (std::size_t i = 0; i < s.nodes.size(); ++i)
      for (std::size_t j = i + 1; j < s.nodes.size(); ++j) {
        const PairNode& a = ctx.graph.nodes()[s.nodes[i]];
        const PairNode& b = ctx.graph.nodes()[s.nodes[j]];
        std::set<int> cubes{a.q0, a.q1, b.q0, b.q1};
        if (cubes.size() != 3) continue;
        std::array<int, 3> t{};
        std::copy(cubes.begin(), cubes.end(), t.begin());
        triples.push_back(t);
      }
    per_subset.push_back(triples);
    for (const auto& t : triples) {
      if (needed.contains(t)) continue;
      const std::array<SplitElement, 3> elems{ctx.anchors[t[0]].omega, ctx.anchors[t[1]].omega,
                                              ctx.anchors[t[2]].omega};
      const Point p0 = elems[0].anchor.point;
      if (elems[1].anchor.point == p0 && elems[2].anchor.point == p0) {
        needed[t] = 0.0;
        ++rep.degenerate_triples;
        continue;
      }
      const auto vis = find_visibility_cube(domain, elems);
      needed[t] = vis ? vis->alpha : std::numeric_limits<double>::infinity();
      if (!vis) ++rep.invisible_triples;
    }
  }
  rep.triples = needed.size();
  for (const auto& [t, a] : needed) rep.alpha_max_needed = std::max(rep.alpha_max_needed, a);
  for (double a : alphas)
    if (rep.alpha_max_needed <= a) {
      rep.alpha_hat = a;
      break;
    }

  const double cutoff = rep.alpha_hat > 0.0 ? rep.alpha_hat : alphas.back();
  double visible_max = 0.0;
  for (double a : alphas) rep.visible_at[a] = 0;
  for (std::size_t i = 0; i < per_subset.size(); ++i) {
    double worst = 0.0;
    for (const auto& t : per_subset[i]) worst = std::max(worst, needed[t]);
    for (double a : alphas)
      if (worst <= a) ++rep.visible_at[a];
    const SubsetResult& s = ctx.report.subsets[i];
    if (worst <= cutoff && s.feasible) {
      ++rep.visible_subsets;
      visible_max = std::max(visible_max, s.lambda);
    }
  }
  rep.gamma_all = ctx.report.base.gamma_hat;
  rep.gamma_visible = ctx.report.full_feasible ? gamma_of(ctx.report.base.lambda_full, visible_max)
                                               : std::numeric_limits<double>::infinity();
  rep.finiteness = std::move(ctx.report);
  return rep;
}

AnchorDistanceReport check_anchor_distances(const IntrinsicMetric& metric, const WhitneyDecomposition& dec,
                                            std::span<const CubeAnchor> anchors) {
  AnchorDistanceReport rep;
  for (std::size_t k = 0; k < dec.size(); ++k) {
    for (int j : dec.neighbors(k)) {
      if (j <= static_cast<int>(k)) continue;
      ++rep.pairs;
      const auto& a = anchors[k];
      const auto& b = anchors[j];
      if (a.a.point == b.a.point) {
        ++rep.shared_anchor_pairs;
        rep.shared_anchor_same_element &= same_element(a.omega, b.omega);
        continue;
      }
      const double d = completed_distance(metric, a.omega, b.omega);
      rep.max_ratio = std::max(rep.max_ratio, d / dist_inf(a.a.point, b.a.point));
      rep.max_excess = std::max(rep.max_excess, d - 2.0 * dist_inf(a.a.point, b.a.point));
    }
  }
  return rep;
}

}  // namespace c2trace
