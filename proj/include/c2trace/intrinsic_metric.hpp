#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "c2trace/geometry.hpp"

namespace c2trace {

// Open angular sector at a boundary point, running counterclockwise from
// dir0 to dir1 (dir0 == dir1 means the full turn around a slit tip).
struct Sector {
  Point dir0;
  Point dir1;
  double theta0 = 0.0;  // atan2 of dir0, in (-pi, pi]
  double theta1 = 0.0;  // theta0 < theta1 <= theta0 + 2 pi

  double width() const { return theta1 - theta0; }
  // Strict membership of a direction in the open sector.
  bool contains(Point v) const;
  // Half-open membership [dir0, dir1): a direction on dir0 belongs here.
  bool contains_half_open(Point v) const;
};

struct SplitElement {
  BoundarySample anchor;
  Point witness;
  Sector sector;
  int sector_id = 0;
};

// Identity of a split element: the anchor point and the approach sector.
struct ElementKey {
  Point anchor;
  int sector_id = 0;
  friend auto operator<=>(const ElementKey&, const ElementKey&) = default;
};

inline ElementKey key_of(const SplitElement& e) { return {e.anchor.point, e.sector_id}; }
inline bool same_element(const SplitElement& a, const SplitElement& b) { return key_of(a) == key_of(b); }
inline SplitElement with_witness(SplitElement e, Point w) {
  e.witness = w;
  return e;
}

struct GeodesicPath {
  std::vector<Point> vertices;
  double length = std::numeric_limits<double>::infinity();
};

enum class Access { accessible, suspected_inaccessible };

struct AccessReport {
  BoundarySample sample;
  Access status = Access::accessible;
  double bound_used = 0.0;
  double distance = std::numeric_limits<double>::infinity();
};

// Locates the lowest-index boundary feature through p.
BoundarySample boundary_sample(const PolygonalDomain& domain, Point p);

// Interior sectors at a boundary point, counterclockwise from the smallest
// feature angle. Throws "not a boundary point".
std::vector<Sector> interior_sectors(const PolygonalDomain& domain, Point b);
std::vector<SplitElement> split_elements_at(const PolygonalDomain& domain, const BoundarySample& b);
// The element approached from `anchor` along direction `dir`.
SplitElement element_for_direction(const PolygonalDomain& domain, const BoundarySample& anchor, Point dir);

// Geodesic distance in the uniform norm over the visibility graph of reflex
// boundary vertices. The vertex graph is built once and then read-only.
class IntrinsicMetric {
public:
  explicit IntrinsicMetric(PolygonalDomain domain);

  const PolygonalDomain& domain() const { return domain_; }
  double distance(Point x, Point y) const;
  GeodesicPath path(Point x, Point y) const;
  // Length of the shortest path from an interior point to a boundary point.
  double distance_to_boundary_point(Point x, Point b) const;
  std::size_t reflex_vertex_count() const { return nodes_.size(); }

private:
  struct Node {
    Point p;
    Sector sector;
  };
  // Dijkstra from x to a target reachable through `sees_target`.
  template <class SeesTarget>
  GeodesicPath search(Point x, Point target, SeesTarget sees_target) const;

  PolygonalDomain domain_;
  std::vector<Node> nodes_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
};

struct CompletedDistanceOptions {
  double tol = 1e-6;
  int first_level = 4;
  int last_level = 40;
};

double completed_distance(const IntrinsicMetric& metric, const SplitElement& a, const SplitElement& b,
                          const CompletedDistanceOptions& opts = {});
bool element_equiv(const IntrinsicMetric& metric, const SplitElement& a, const SplitElement& b,
                   double tol = 1e-4);

// Deterministic interior probe: the grid point farthest from the boundary.
Point default_probe(const PolygonalDomain& domain);
std::vector<AccessReport> accessibility_scan(const IntrinsicMetric& metric, std::span<const BoundarySample> samples,
                                             double bound, std::span<const Point> probes = {});

}  // namespace c2trace
