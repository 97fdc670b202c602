#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "c2trace/whitney.hpp"

namespace c2trace {

using Vec = std::vector<double>;

struct AffineConstraint {
  enum class Kind { hyperplane, full, empty };
  Kind kind = Kind::full;
  Vec h;  // normal, nonzero for hyperplanes
  double b = 0.0;

  static AffineConstraint full_space() { return {}; }
  static AffineConstraint hyperplane(Vec normal, double offset);
  static AffineConstraint empty_set() { return {Kind::empty, {}, 0.0}; }
};

struct PairNode {
  int q0 = -1;  // q0 < q1
  int q1 = -1;
  double d = 0.0;  // diam Q0 + diam Q1
};

struct WeightedEdge {
  int a = -1;
  int b = -1;
  double w = 0.0;
};

class PairGraph {
public:
  PairGraph() = default;
  PairGraph(std::vector<PairNode> nodes, std::vector<WeightedEdge> edges);

  std::span<const PairNode> nodes() const { return nodes_; }
  std::span<const WeightedEdge> edges() const { return edges_; }
  std::size_t size() const { return nodes_.size(); }
  // Incident (neighbor, weight) lists.
  std::span<const std::pair<int, double>> adjacent(int node) const { return adj_.at(node); }
  std::optional<int> node_of(int qa, int qb) const;

private:
  std::vector<PairNode> nodes_;
  std::vector<WeightedEdge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
  std::map<std::pair<int, int>, int> index_;
};

PairGraph build_pair_graph(const WhitneyDecomposition& dec);
// Shortest-path distance with edge weights; +inf when disconnected.
double path_metric(const PairGraph& graph, int from, int to);
// Distances from one node to all others.
std::vector<double> path_metric_from(const PairGraph& graph, int from);

// Y_S per node. With `strict`, empty constraints raise "inconsistent boundary
// data" naming the offending nodes.
std::vector<AffineConstraint> hyperplanes_from_data(const PairGraph& graph, std::span<const CubeAnchor> anchors,
                                                    std::span<const double> f, bool strict = true,
                                                    double consistency_tol = 1e-12);

Vec project_to_affine(const Vec& z, const AffineConstraint& c);
// Euclidean distance from z to the constraint set.
double affine_distance(const Vec& z, const AffineConstraint& c);

struct SelectionProblem {
  int dim = 2;
  std::vector<AffineConstraint> constraints;
  std::vector<WeightedEdge> edges;

  static SelectionProblem from_graph(const PairGraph& graph, std::vector<AffineConstraint> constraints, int dim = 2);
};

enum class SolveMode { min_seminorm, feasibility };
enum class LpSolver { automatic, simplex, ipm };

struct SelectionOptions {
  SolveMode mode = SolveMode::min_seminorm;
  double lambda = 0.0;  // feasibility threshold
  LpSolver solver = LpSolver::automatic;
  // Automatic choice uses exact simplex up to this many nodes.
  std::size_t exact_limit = 12;
};

struct Selection {
  std::vector<Vec> values;
  double seminorm = 0.0;        // realized max edge ratio
  double lp_objective = 0.0;    // lambda* as returned by the solver
  std::vector<int> pinned;      // nodes pinned to the origin
  std::string solver;
};

// Throws InfeasibleError for empty constraints or when the feasibility
// threshold is below the optimum.
Selection lipschitz_selection(const SelectionProblem& problem, const SelectionOptions& opts = {});
double selection_seminorm(std::span<const WeightedEdge> edges, std::span<const Vec> values);
double max_constraint_residual(const SelectionProblem& problem, std::span<const Vec> values);

// Node subsets covered by at most m edges, each given as sorted node ids.
// Exhaustive (in a fixed order) when the number of such edge sets is at most
// the budget, else `budget` seeded draws. When `focus` is nonempty the draws
// pick edges touching those nodes.
std::vector<std::vector<int>> finiteness_subsets(const PairGraph& graph, int m, std::size_t budget,
                                                 std::uint64_t seed, std::span<const int> focus = {});

}  // namespace c2trace
