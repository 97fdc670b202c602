#pragma once

#include <optional>
#include <span>
#include <vector>

#include "c2trace/geometry.hpp"
#include "c2trace/intrinsic_metric.hpp"

namespace c2trace {

enum class Flavor { standard, refined };

struct DecomposeOptions {
  int depth_limit = 6;
  // Largest tolerated uncovered share of the domain area.
  double max_skirt_fraction = 0.9;
  // Cubes meeting one of these segments may split down to focus_depth,
  // which lets ray probes reach much closer to the boundary.
  std::vector<Segment> focus;
  int focus_depth = 0;
};

struct DecompositionStats {
  int min_depth = 0;
  int max_depth = 0;
  int max_neighbors = 0;  // measured N: largest |T(K)|
  int covering_multiplicity = 0;
  double covered_area = 0.0;
  double skirt_area = 0.0;
  double skirt_fraction = 0.0;
};

struct CubeAnchor {
  BoundarySample a;      // a_Q
  SplitElement omega;    // omega_Q, witness on the sector bisector
};

class WhitneyDecomposition {
public:
  WhitneyDecomposition() = default;

  // Builds a decomposition from explicit cubes, with brute-force adjacency.
  static WhitneyDecomposition from_cubes(std::vector<Cube> cubes, std::vector<int> depths,
                                         Flavor flavor = Flavor::standard);

  std::size_t size() const { return cubes_.size(); }
  std::span<const Cube> cubes() const { return cubes_; }
  const Cube& cube(std::size_t i) const { return cubes_.at(i); }
  int depth(std::size_t i) const { return depths_.at(i); }
  Flavor flavor() const { return flavor_; }
  const DecompositionStats& stats() const { return stats_; }
  // T(K): every cube whose closed cube meets cube k, including k itself.
  std::span<const int> neighbors(std::size_t k) const;
  // Lowest index of an accepted cube whose closed cube contains p.
  std::optional<int> locate(Point p) const;

private:
  friend WhitneyDecomposition whitney_decompose(const PolygonalDomain&, const DecomposeOptions&);
  friend WhitneyDecomposition refine_4n(const WhitneyDecomposition&);

  struct Node {
    Cube box;
    int depth = 0;
    int child = -1;  // first of four consecutive children
    int cube = -1;   // accepted cube index for leaves
  };

  void index_leaves();
  void build_adjacency();
  void finish_stats(double domain_area);
  template <class Visit>
  void visit_closed(const Cube& query, Visit visit) const;

  std::vector<Cube> cubes_;
  std::vector<int> depths_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<Node> tree_;
  Flavor flavor_ = Flavor::standard;
  DecompositionStats stats_;
  double domain_area_ = 0.0;
};

WhitneyDecomposition whitney_decompose(const PolygonalDomain& domain, const DecomposeOptions& opts);
WhitneyDecomposition whitney_decompose(const PolygonalDomain& domain, int depth_limit);
// Splits every cube into 16 equal cubes of a quarter of its side.
WhitneyDecomposition refine_4n(const WhitneyDecomposition& dec);
std::vector<CubeAnchor> compute_anchors(const WhitneyDecomposition& dec, const PolygonalDomain& domain);
int covering_multiplicity(const WhitneyDecomposition& dec);

}  // namespace c2trace
