#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "c2trace/extension.hpp"
#include "c2trace/selection.hpp"

namespace c2trace {

// Boundary values on split-boundary elements.
class BoundaryData {
public:
  using Callback = std::function<double(const SplitElement&)>;

  static BoundaryData from_function(Callback fn, std::string provenance = "analytic-callback");
  static BoundaryData from_table(std::map<ElementKey, double> table);

  double operator()(const SplitElement& e) const;
  const std::string& provenance() const { return provenance_; }
  const std::map<ElementKey, double>& table() const { return table_; }

private:
  Callback fn_;
  std::map<ElementKey, double> table_;
  std::string provenance_;
};

enum class FieldKind { affine, quadratic, slit_witness };

struct FieldSpec {
  FieldKind kind = FieldKind::affine;
  // q(x) = x^T A x + <a, x> + b; A is ignored for affine fields.
  std::array<double, 4> A{};  // row-major
  Point a;
  double b = 0.0;

  static FieldSpec affine(Point a, double b) { return {FieldKind::affine, {}, a, b}; }
  static FieldSpec quadratic(std::array<double, 4> A, Point a, double b) { return {FieldKind::quadratic, A, a, b}; }
  static FieldSpec slit_witness() { return {FieldKind::slit_witness, {}, {}, 0.0}; }
};

std::string to_string(FieldKind kind);

// Closed-form C^2 field on the domain with exact derivatives.
class TestField : public SmoothField {
public:
  explicit TestField(FieldSpec spec) : spec_(spec) {}

  Jet2 eval(Point x) const override;
  // One-sided limit at the anchor of the element, exact.
  Jet2 trace(const SplitElement& omega) const;
  // Exact sup of the C^2 seminorm (sum over the second-order multi-indices).
  double seminorm() const;
  const FieldSpec& spec() const { return spec_; }

private:
  Jet2 eval_side(Point x, bool below) const;
  FieldSpec spec_;
};

// Throws "kind unsupported for domain" when the slit witness is requested on
// a domain without the slit [-1/2, 1/2] x {0}.
std::shared_ptr<const TestField> synthesize_test_field(const PolygonalDomain& domain, const FieldSpec& spec);
BoundaryData trace_data(std::shared_ptr<const TestField> field);

struct FieldJet {
  BoundaryJet jet;
  std::vector<TraceProbe> probes;  // per cube
  std::vector<Vec> node_values;    // G(S) = Pr(g(Q_S); Y_S), when a graph is given
};

struct JetOptions {
  int steps = 20;
  double probe_tol = 1e-5;
};

// Throws ConvergenceError "probe did not converge".
FieldJet jet_from_field(const SmoothField& field, const WhitneyDecomposition& dec, std::span<const CubeAnchor> anchors,
                        const PairGraph* graph = nullptr, const JetOptions& opts = {});

// Measured constants of the jet of a field with seminorm S: the largest
// |f_Q - f_Q' - <g_Q', a_Q - a_Q'>| / (S |a_Q - a_Q'| D) and |g_Q - g_Q'| / (S D).
struct FieldJetConstants {
  double fg_factor = 0.0;
  double g_factor = 0.0;
};
FieldJetConstants field_jet_constants(const BoundaryJet& jet, const WhitneyDecomposition& dec,
                                      std::span<const CubeAnchor> anchors, double seminorm);

// g(Q) = G({Q, Q_T}) with Q_T the lowest-index neighbor other than Q.
std::vector<Point> g_from_selection(const PairGraph& graph, const Selection& sel, const WhitneyDecomposition& dec);

struct PipelineOptions {
  int depth = 5;
  Flavor flavor = Flavor::standard;
  LpSolver solver = LpSolver::automatic;
  int trace_samples = 50;
  std::uint64_t seed = 0;
  double lp_tol = 1e-9;
  double probe_tol = 1e-5;
  double equiv_tol = 1e-4;
  // Extra refinement along these segments, down to focus_depth.
  std::vector<Segment> focus;
  int focus_depth = 0;
};

struct TraceResidual {
  int cube = -1;
  double t = 0.0;
  double residual = 0.0;       // extrapolated limit minus datum
  double last_residual = 0.0;  // last sample minus datum
  double distance = 0.0;       // distance of the last sample from the anchor
};

struct PipelineReport {
  std::size_t cubes = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  int max_neighbors = 0;
  double skirt_fraction = 0.0;
  std::string solver;
  double eta_min = 0.0;
  double lambda_full = 0.0;
  double lambda_subset_max = 0.0;
  double gamma_hat = 0.0;
  double seminorm_out = 0.0;
  double eta_over_lambda = 0.0;
  std::vector<TraceResidual> trace_residuals;
  std::map<std::string, double> timings_ms;
};

struct ExtensionResult {
  std::shared_ptr<const WhitneyDecomposition> dec;
  std::vector<CubeAnchor> anchors;
  PairGraph graph;
  Selection selection;
  BoundaryJet jet;
  std::optional<ExtensionField> field;
  PipelineReport report;
};

std::vector<double> cube_data(const BoundaryData& f, std::span<const CubeAnchor> anchors);

ExtensionResult extend_from_boundary(const PolygonalDomain& domain, const BoundaryData& f, const PipelineOptions& opts);

struct FinitenessOptions {
  PipelineOptions pipeline;
  int m = 2;
  std::size_t budget = 200;
  // Adds `corrupt_delta` to the datum of one cube that shares its anchor with
  // a neighbor, making the data inconsistent.
  bool corrupt = false;
  double corrupt_delta = 1.0;
};

struct SubsetResult {
  std::vector<int> nodes;
  int cubes = 0;
  int elements = 0;
  bool feasible = true;
  double lambda = 0.0;
};

struct FinitenessReport {
  PipelineReport base;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  int m = 2;
  bool full_feasible = true;
  bool monotone = true;
  double max_monotone_excess = 0.0;
  int max_elements = 0;
  std::size_t infeasible_subsets = 0;
  std::vector<SubsetResult> subsets;
  std::vector<double> histogram_edges;
  std::vector<std::size_t> histogram;
  int corrupted_cube = -1;
};

FinitenessReport check_finiteness(const PolygonalDomain& domain, const BoundaryData& f, const FinitenessOptions& opts);

// Visibility of a triple of elements from a cube.
struct VisibleTriple {
  std::array<SplitElement, 3> elements;
  Cube witness_cube;
  double alpha = 0.0;
};

struct VisibilityResult {
  bool visible = false;
  std::string failed;  // condition that failed, empty when visible
};

VisibilityResult is_visible_triple(const PolygonalDomain& domain, const std::array<SplitElement, 3>& triple,
                                   double alpha, const Cube& cube);
// Smallest alpha needed for `cube` once the hull and ray conditions hold.
double required_alpha(const std::array<SplitElement, 3>& triple, const Cube& cube);
// Searches candidate cubes around the anchors; nullopt when none passes the
// hull and ray conditions.
std::optional<VisibleTriple> find_visibility_cube(const PolygonalDomain& domain,
                                                  const std::array<SplitElement, 3>& triple);

struct VisibleCheckOptions {
  FinitenessOptions finiteness;
  std::vector<double> alphas{1.0, 2.0, 4.0, 8.0};
};

struct VisibleReport {
  FinitenessReport finiteness;  // run on the refined decomposition
  std::size_t triples = 0;
  std::size_t degenerate_triples = 0;
  std::size_t invisible_triples = 0;  // no cube found at all
  double alpha_hat = 0.0;              // smallest swept alpha seeing every triple, 0 if none
  double alpha_max_needed = 0.0;
  std::map<double, std::size_t> visible_at;  // alpha -> subsets whose triples are all visible
  double gamma_all = 0.0;
  double gamma_visible = 0.0;
  std::size_t visible_subsets = 0;
};

VisibleReport visible_subset_check(const PolygonalDomain& domain, const BoundaryData& f, const VisibleCheckOptions& opts);

// Completed distance of omega_Q, omega_Q' against |a_Q - a_Q'| over
// intersecting cube pairs.
struct AnchorDistanceReport {
  std::size_t pairs = 0;
  std::size_t shared_anchor_pairs = 0;
  double max_ratio = 0.0;
  double max_excess = 0.0;  // largest d - 2 |a_Q - a_Q'|
  bool shared_anchor_same_element = true;
};
AnchorDistanceReport check_anchor_distances(const IntrinsicMetric& metric, const WhitneyDecomposition& dec,
                                            std::span<const CubeAnchor> anchors);

}  // namespace c2trace
