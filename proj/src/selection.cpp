#include "c2trace/selection.hpp"

#include <gmpxx.h>

#include <Eigen/Core>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <set>

#include "c2trace/error.hpp"
#include "c2trace/lp.hpp"

namespace c2trace {

namespace {

double dotv(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Components {
  std::vector<int> id;
  int count = 0;
};

Components components(std::size_t n, std::span<const WeightedEdge> edges) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& e : edges) {
    const int ra = find(e.a), rb = find(e.b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  Components c;
  c.id.assign(n, -1);
  std::vector<int> label(n, -1);
  for (std::size_t v = 0; v < n; ++v) {
    const int r = find(static_cast<int>(v));
    if (label[r] < 0) label[r] = c.count++;
    c.id[v] = label[r];
  }
  return c;
}

// Orthonormal basis of h-perp, as columns: the Householder reflection that
// maps h to a coordinate axis e_k, with column k dropped.
Eigen::MatrixXd null_basis(const Vec& h) {
  const auto n = static_cast<Eigen::Index>(h.size());
  Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(h.data(), n).normalized();
  Eigen::Index k = 0;
  u.cwiseAbs().maxCoeff(&k);
  Eigen::VectorXd v = u;
  v[k] += u[k] < 0.0 ? -1.0 : 1.0;
  const Eigen::MatrixXd refl = Eigen::MatrixXd::Identity(n, n) - (2.0 / v.squaredNorm()) * v * v.transpose();
  Eigen::MatrixXd out(n, n - 1);
  for (Eigen::Index j = 0, c = 0; j < n; ++j)
    if (j != k) out.col(c++) = refl.col(j);
  return out;
}

Selection solve_exact(const SelectionProblem& p, std::span<const int> nodes, std::span<const WeightedEdge> edges,
                      Selection sel) {
  const int dim = p.dim;
  std::vector<int> local(p.constraints.size(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<int>(i);
  LinearProgram<mpq_class> lp;
  for (std::size_t i = 0; i < nodes.size() * dim; ++i) lp.add_variable(0, true);
  const int lam = lp.add_variable(1, false);
  for (int v : nodes) {
    const auto& c = p.constraints[v];
    if (c.kind != AffineConstraint::Kind::hyperplane) continue;
    std::vector<std::pair<int, mpq_class>> row;
    for (int i = 0; i < dim; ++i)
      if (c.h[i] != 0.0) row.emplace_back(local[v] * dim + i, mpq_class(c.h[i]));
    lp.add_row(std::move(row), RowKind::equal, mpq_class(c.b));
  }
  for (const auto& e : edges) {
    const mpq_class w(e.w);
    for (int i = 0; i < dim; ++i) {
      const int ca = local[e.a] * dim + i, cb = local[e.b] * dim + i;
      lp.add_row({{ca, 1}, {cb, -1}, {lam, -w}}, RowKind::less_equal, 0);
      lp.add_row({{ca, -1}, {cb, 1}, {lam, -w}}, RowKind::less_equal, 0);
    }
  }
  const auto sol = solve_simplex(lp);
  if (sol.status != LpStatus::optimal) throw InfeasibleError("LP infeasible");
  for (std::size_t k = 0; k < nodes.size(); ++k)
    for (int i = 0; i < dim; ++i) sel.values[nodes[k]][i] = sol.x[k * dim + i].get_d();
  sel.lp_objective = std::max(sel.lp_objective, sol.objective.get_d());
  return sel;
}

Selection solve_interior(const SelectionProblem& p, std::span<const int> nodes, std::span<const WeightedEdge> edges,
                         Selection sel) {
  const int dim = p.dim;
  // G_S = base_S + basis_S z_S.
  std::vector<Eigen::VectorXd> base;
  std::vector<Eigen::MatrixXd> basis;
  std::vector<int> offset(p.constraints.size(), -1);
  int nz = 0;
  for (int v : nodes) {
    const auto& c = p.constraints[v];
    if (c.kind == AffineConstraint::Kind::hyperplane) {
      const Eigen::Map<const Eigen::VectorXd> h(c.h.data(), dim);
      base.emplace_back(h * (c.b / h.squaredNorm()));
      basis.push_back(null_basis(c.h));
    } else {
      base.emplace_back(Eigen::VectorXd::Zero(dim));
      basis.push_back(Eigen::MatrixXd::Identity(dim, dim));
    }
    offset[v] = nz;
    nz += static_cast<int>(basis.back().cols());
  }
  std::vector<int> local(p.constraints.size(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<int>(i);
  const int lam = nz;
  const auto rows = static_cast<Eigen::Index>(2 * dim * edges.size());
  std::vector<Eigen::Triplet<double>> trip;
  InequalityLp lp;
  lp.b.resize(rows);
  lp.q = Eigen::VectorXd::Zero(nz + 1);
  lp.q[lam] = 1.0;
  Eigen::Index r = 0;
  for (const auto& e : edges) {
    const int la = local[e.a], lb = local[e.b];
    for (int i = 0; i < dim; ++i) {
      const double diff = base[la][i] - base[lb][i];
      for (int sgn : {1, -1}) {
        for (Eigen::Index k = 0; k < basis[la].cols(); ++k)
          if (basis[la](i, k) != 0.0) trip.emplace_back(r, offset[e.a] + k, sgn * basis[la](i, k));
        for (Eigen::Index k = 0; k < basis[lb].cols(); ++k)
          if (basis[lb](i, k) != 0.0) trip.emplace_back(r, offset[e.b] + k, -sgn * basis[lb](i, k));
        trip.emplace_back(r, lam, -e.w);
        lp.b[r] = -sgn * diff;
        ++r;
      }
    }
  }
  lp.a.resize(rows, nz + 1);
  lp.a.setFromTriplets(trip.begin(), trip.end());
  const IpmSolution sol = solve_ipm(lp);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const int v = nodes[k];
    const Eigen::VectorXd g = base[k] + basis[k] * sol.x.segment(offset[v], basis[k].cols());
    for (int i = 0; i < dim; ++i) sel.values[v][i] = g[i];
  }
  sel.lp_objective = std::max(sel.lp_objective, sol.x[lam]);
  return sel;
}

}  // namespace

AffineConstraint AffineConstraint::hyperplane(Vec normal, double offset) {
  if (std::all_of(normal.begin(), normal.end(), [](double v) { return v == 0.0; }))
    throw ValidationError("hyperplane normal must be nonzero");
  return {Kind::hyperplane, std::move(normal), offset};
}

PairGraph::PairGraph(std::vector<PairNode> nodes, std::vector<WeightedEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), adj_(nodes_.size()) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_[{nodes_[i].q0, nodes_[i].q1}] = static_cast<int>(i);
  for (const auto& e : edges_) {
    if (e.a == e.b || !(e.w > 0.0) || !std::isfinite(e.w)) throw ValidationError("edge weights must be positive");
    adj_.at(e.a).emplace_back(e.b, e.w);
    adj_.at(e.b).emplace_back(e.a, e.w);
  }
}

std::optional<int> PairGraph::node_of(int qa, int qb) const {
  const auto it = index_.find({std::min(qa, qb), std::max(qa, qb)});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PairGraph build_pair_graph(const WhitneyDecomposition& dec) {
  std::vector<PairNode> nodes;
  std::vector<std::vector<int>> by_cube(dec.size());
  for (std::size_t k = 0; k < dec.size(); ++k) {
    for (int j : dec.neighbors(k)) {
      if (j <= static_cast<int>(k)) continue;
      const int id = static_cast<int>(nodes.size());
      nodes.push_back({static_cast<int>(k), j, dec.cube(k).diam() + dec.cube(j).diam()});
      by_cube[k].push_back(id);
      by_cube[j].push_back(id);
    }
  }
  std::vector<WeightedEdge> edges;
  for (const auto& list : by_cube)
    for (std::size_t i = 0; i < list.size(); ++i)
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        const int a = std::min(list[i], list[j]), b = std::max(list[i], list[j]);
        edges.push_back({a, b, nodes[a].d + nodes[b].d});
      }
  std::sort(edges.begin(), edges.end(), [](const auto& x, const auto& y) { return std::pair(x.a, x.b) < std::pair(y.a, y.b); });
  return PairGraph(std::move(nodes), std::move(edges));
}

std::vector<double> path_metric_from(const PairGraph& graph, int from) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(graph.size(), inf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist.at(from) = 0.0;
  pq.emplace(0.0, from);
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (auto [v, w] : graph.adjacent(u))
      if (d + w < dist[v]) {
        dist[v] = d + w;
        pq.emplace(dist[v], v);
      }
  }
  return dist;
}

double path_metric(const PairGraph& graph, int from, int to) {
  if (from == to) return 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(graph.size(), inf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist.at(from) = 0.0;
  pq.emplace(0.0, from);
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (u == to) return d;
    if (d > dist[u]) continue;
    for (auto [v, w] : graph.adjacent(u))
      if (d + w < dist[v]) {
        dist[v] = d + w;
        pq.emplace(dist[v], v);
      }
  }
  return inf;
}

std::vector<AffineConstraint> hyperplanes_from_data(const PairGraph& graph, std::span<const CubeAnchor> anchors,
                                                    std::span<const double> f, bool strict, double consistency_tol) {
  std::vector<AffineConstraint> out;
  std::vector<int> bad;
  out.reserve(graph.size());
  for (std::size_t s = 0; s < graph.size(); ++s) {
    const PairNode& n = graph.nodes()[s];
    if (static_cast<std::size_t>(std::max(n.q0, n.q1)) >= std::min(anchors.size(), f.size()))
      throw ValidationError("missing boundary datum for cube " + std::to_string(std::max(n.q0, n.q1)));
    const Point h = anchors[n.q0].a.point - anchors[n.q1].a.point;
    const double b = f[n.q0] - f[n.q1];
    if (h != Point{}) {
      out.push_back(AffineConstraint::hyperplane({h.x, h.y}, b));
    } else if (std::abs(b) <= consistency_tol) {
      out.push_back(AffineConstraint::full_space());
    } else {
      out.push_back(AffineConstraint::empty_set());
      bad.push_back(static_cast<int>(s));
    }
  }
  if (strict && !bad.empty()) {
    std::string msg = "inconsistent boundary data at nodes";
    for (std::size_t i = 0; i < bad.size() && i < 10; ++i) msg += " " + std::to_string(bad[i]);
    if (bad.size() > 10) msg += " ...";
    throw InfeasibleError(msg);
  }
  return out;
}

Vec project_to_affine(const Vec& z, const AffineConstraint& c) {
  switch (c.kind) {
    case AffineConstraint::Kind::full:
      return z;
    case AffineConstraint::Kind::empty:
      throw ValidationError("empty constraint");
    case AffineConstraint::Kind::hyperplane:
      break;
  }
  if (z.size() != c.h.size()) throw ValidationError("dimension mismatch");
  const double r = dotv(z, c.h) - c.b;
  // Points already on the hyperplane up to rounding are fixed, which makes
  // the projection idempotent in floating point.
  double mag = std::abs(c.b);
  for (std::size_t i = 0; i < z.size(); ++i) mag += std::abs(z[i] * c.h[i]);
  if (std::abs(r) <= 8.0 * std::numeric_limits<double>::epsilon() * mag) return z;
  const double t = r / dotv(c.h, c.h);
  Vec out = z;
  for (std::size_t i = 0; i < z.size(); ++i) out[i] -= t * c.h[i];
  return out;
}

double affine_distance(const Vec& z, const AffineConstraint& c) {
  switch (c.kind) {
    case AffineConstraint::Kind::full:
      return 0.0;
    case AffineConstraint::Kind::empty:
      return std::numeric_limits<double>::infinity();
    case AffineConstraint::Kind::hyperplane:
      break;
  }
  return std::abs(c.b - dotv(z, c.h)) / std::sqrt(dotv(c.h, c.h));
}

SelectionProblem SelectionProblem::from_graph(const PairGraph& graph, std::vector<AffineConstraint> constraints,
                                              int dim) {
  if (constraints.size() != graph.size()) throw ValidationError("one constraint per node required");
  return {dim, std::move(constraints), {graph.edges().begin(), graph.edges().end()}};
}

double selection_seminorm(std::span<const WeightedEdge> edges, std::span<const Vec> values) {
  double s = 0.0;
  for (const auto& e : edges) {
    double gap = 0.0;
    for (std::size_t i = 0; i < values[e.a].size(); ++i) gap = std::max(gap, std::abs(values[e.a][i] - values[e.b][i]));
    s = std::max(s, gap / e.w);
  }
  return s;
}

double max_constraint_residual(const SelectionProblem& problem, std::span<const Vec> values) {
  double worst = 0.0;
  for (std::size_t v = 0; v < problem.constraints.size(); ++v) {
    const auto& c = problem.constraints[v];
    if (c.kind == AffineConstraint::Kind::hyperplane) worst = std::max(worst, std::abs(dotv(values[v], c.h) - c.b));
  }
  return worst;
}

Selection lipschitz_selection(const SelectionProblem& problem, const SelectionOptions& opts) {
  const std::size_t n = problem.constraints.size();
  const int dim = problem.dim;
  if (dim < 1) throw ValidationError("dimension must be positive");
  for (std::size_t v = 0; v < n; ++v) {
    const auto& c = problem.constraints[v];
    if (c.kind == AffineConstraint::Kind::empty) throw InfeasibleError("infeasible: empty constraint at node " + std::to_string(v));
    if (c.kind == AffineConstraint::Kind::hyperplane && static_cast<int>(c.h.size()) != dim)
      throw ValidationError("constraint dimension mismatch at node " + std::to_string(v));
  }
  for (const auto& e : problem.edges)
    if (e.a < 0 || e.b < 0 || static_cast<std::size_t>(std::max(e.a, e.b)) >= n || e.a == e.b || !(e.w > 0.0))
      throw ValidationError("invalid edge");
  if (opts.mode == SolveMode::feasibility && !(opts.lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");

  Selection sel;
  sel.values.assign(n, Vec(dim, 0.0));
  const Components comp = components(n, problem.edges);
  std::vector<int> size(comp.count, 0), planes(comp.count, 0);
  for (std::size_t v = 0; v < n; ++v) {
    ++size[comp.id[v]];
    planes[comp.id[v]] += problem.constraints[v].kind == AffineConstraint::Kind::hyperplane;
  }
  std::size_t coupled = 0;
  for (std::size_t v = 0; v < n; ++v) coupled += planes[comp.id[v]] > 0 && size[comp.id[v]] > 1;
  const bool exact = opts.solver == LpSolver::simplex ||
                     (opts.solver == LpSolver::automatic && coupled <= opts.exact_limit);
  // lambda* = 0 exactly when a component's constraints share a point; the
  // interior point LP is fully degenerate there, so settle it directly.
  std::vector<std::optional<Eigen::VectorXd>> common(comp.count);
  if (!exact) {
    std::vector<std::vector<int>> members(comp.count);
    for (std::size_t v = 0; v < n; ++v)
      if (problem.constraints[v].kind == AffineConstraint::Kind::hyperplane) members[comp.id[v]].push_back(static_cast<int>(v));
    for (int c = 0; c < comp.count; ++c) {
      if (size[c] < 2 || members[c].empty()) continue;
      Eigen::MatrixXd h(members[c].size(), dim);
      Eigen::VectorXd b(members[c].size());
      for (std::size_t r = 0; r < members[c].size(); ++r) {
        const auto& con = problem.constraints[members[c][r]];
        for (int i = 0; i < dim; ++i) h(r, i) = con.h[i];
        b[r] = con.b;
      }
      const Eigen::VectorXd g = h.completeOrthogonalDecomposition().solve(b);
      const double tol = 1e-12 * (1.0 + b.lpNorm<Eigen::Infinity>()) * (1.0 + h.lpNorm<Eigen::Infinity>());
      if ((h * g - b).lpNorm<Eigen::Infinity>() <= tol) common[c] = g;
    }
  }
  std::vector<int> lp_nodes;
  for (std::size_t v = 0; v < n; ++v) {
    const int c = comp.id[v];
    if (common[c]) {
      sel.values[v].assign(common[c]->data(), common[c]->data() + dim);
    } else if (planes[c] == 0) {
      sel.pinned.push_back(static_cast<int>(v));
    } else if (size[c] == 1) {
      sel.values[v] = project_to_affine(Vec(dim, 0.0), problem.constraints[v]);
    } else {
      lp_nodes.push_back(static_cast<int>(v));
    }
  }
  std::vector<WeightedEdge> lp_edges;
  for (const auto& e : problem.edges)
    if (planes[comp.id[e.a]] > 0 && !common[comp.id[e.a]]) lp_edges.push_back(e);

  sel.solver = exact ? "simplex" : "ipm";
  if (!lp_nodes.empty()) {
    sel = exact ? solve_exact(problem, lp_nodes, lp_edges, std::move(sel))
                : solve_interior(problem, lp_nodes, lp_edges, std::move(sel));
  }
  sel.seminorm = selection_seminorm(problem.edges, sel.values);
  if (opts.mode == SolveMode::feasibility) {
    const double slack = exact ? 0.0 : 1e-9 * (1.0 + opts.lambda);
    if (sel.lp_objective > opts.lambda + slack)
      throw InfeasibleError("infeasible at lambda " + std::to_string(opts.lambda) + " (optimum " +
                            std::to_string(sel.lp_objective) + ")");
  }
  return sel;
}

std::vector<std::vector<int>> finiteness_subsets(const PairGraph& graph, int m, std::size_t budget,
                                                 std::uint64_t seed, std::span<const int> focus) {
  if (m < 1) throw ValidationError("m must be at least 1");
  const auto edges = graph.edges();
  const std::size_t ne = edges.size();
  std::vector<std::vector<int>> out;
  std::set<std::vector<int>> seen;
  auto emit = [&](std::vector<int> s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    if (seen.insert(s).second) out.push_back(std::move(s));
  };
  if (ne == 0) return out;

  // Number of edge sets of size 1..m, saturating.
  double total = 0.0, choose = 1.0;
  for (int k = 1; k <= m; ++k) {
    choose = choose * static_cast<double>(ne - k + 1) / k;
    if (k > static_cast<int>(ne)) break;
    total += choose;
  }
  if (total <= static_cast<double>(budget)) {
    std::vector<int> pick;
    auto rec = [&](auto&& self, std::size_t start) -> void {
      if (!pick.empty()) {
        std::vector<int> s;
        for (int e : pick) {
          s.push_back(edges[e].a);
          s.push_back(edges[e].b);
        }
        emit(std::move(s));
      }
      if (static_cast<int>(pick.size()) == m) return;
      for (std::size_t e = start; e < ne; ++e) {
        pick.push_back(static_cast<int>(e));
        self(self, e + 1);
        pick.pop_back();
      }
    };
    rec(rec, 0);
    return out;
  }

  std::vector<std::vector<int>> incident(graph.size());
  for (std::size_t e = 0; e < ne; ++e) {
    incident[edges[e].a].push_back(static_cast<int>(e));
    incident[edges[e].b].push_back(static_cast<int>(e));
  }
  std::vector<int> starts;
  for (int v : focus)
    if (v >= 0 && static_cast<std::size_t>(v) < graph.size())
      starts.insert(starts.end(), incident[v].begin(), incident[v].end());
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t k) { return std::uniform_int_distribution<std::size_t>(0, k - 1)(rng); };
  const std::size_t max_draws = 50 * budget + 100;
  for (std::size_t draw = 0; draw < max_draws && out.size() < budget; ++draw) {
    const int first = starts.empty() ? static_cast<int>(uniform(ne)) : starts[uniform(starts.size())];
    std::vector<int> nodes{edges[first].a, edges[first].b};
    // Further edges start from the 2-hop neighborhood of the current set, so
    // subsets stay local.
    for (int k = 1; k < m; ++k) {
      std::vector<int> hood = nodes;
      for (int v : nodes)
        for (auto [u, w] : graph.adjacent(v)) hood.push_back(u);
      std::sort(hood.begin(), hood.end());
      hood.erase(std::unique(hood.begin(), hood.end()), hood.end());
      const int u = hood[uniform(hood.size())];
      const int e = incident[u][uniform(incident[u].size())];
      nodes.push_back(edges[e].a);
      nodes.push_back(edges[e].b);
    }
    emit(std::move(nodes));
  }
  return out;
}

}  // namespace c2trace
