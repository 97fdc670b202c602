#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <span>
#include <vector>

namespace c2trace {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
  // Lexicographic: x first, then y.
  friend auto operator<=>(const Point&, const Point&) = default;

  Point& operator+=(Point o) { x += o.x; y += o.y; return *this; }
  Point& operator-=(Point o) { x -= o.x; y -= o.y; return *this; }
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator-(Point a) { return {-a.x, -a.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline Point operator*(Point a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }

// Uniform (max) norm, the metric used for every length in the library.
inline double norm_inf(Point a) { return std::max(std::abs(a.x), std::abs(a.y)); }
inline double dist_inf(Point a, Point b) { return norm_inf(a - b); }
inline double norm2(Point a) { return std::hypot(a.x, a.y); }

struct Cube {
  Point center;
  double half_side = 0.0;

  double diam() const { return 2.0 * half_side; }
  Point lo() const { return {center.x - half_side, center.y - half_side}; }
  Point hi() const { return {center.x + half_side, center.y + half_side}; }
  bool contains(Point p) const { return dist_inf(p, center) <= half_side; }
  bool intersects(const Cube& o) const {
    return std::abs(center.x - o.center.x) <= half_side + o.half_side &&
           std::abs(center.y - o.center.y) <= half_side + o.half_side;
  }
  friend bool operator==(const Cube&, const Cube&) = default;
};

inline Cube dilate(const Cube& q, double factor) { return {q.center, factor * q.half_side}; }

struct Segment {
  Point a;
  Point b;
};

enum class FeatureKind { outer_edge, hole_edge, slit_segment };

// One straight piece of the boundary. `ring` is the hole or slit index
// (0 for the outer ring), `index` the edge/segment index within it.
struct Feature {
  Segment seg;
  FeatureKind kind;
  int ring = 0;
  int index = 0;
};

struct BoundarySample {
  Point point;
  int carrier = -1;  // index into PolygonalDomain::features()

  friend bool operator==(const BoundarySample& a, const BoundarySample& b) { return a.point == b.point; }
};

struct Box {
  Point lo;
  Point hi;
};

// Exact sign of the orientation determinant (b-a) x (c-a) for inputs whose
// differences are representable; Kahan's fma determinant otherwise.
int orientation(Point a, Point b, Point c);
double cross(Point a, Point b);
bool on_segment(Point p, const Segment& s);
bool segments_intersect(const Segment& s, const Segment& t);
// True when t meets s at some point other than the endpoints of s.
bool meets_open_segment(const Segment& s, const Segment& t);
// Uniform-norm distance from p to the closed segment.
double point_segment_dist(Point p, const Segment& s);
// Does the segment meet {z : |z - c|_inf < r}?
bool segment_meets_open_box(const Segment& s, Point c, double r);
// Does the segment meet {z : |z - c|_inf <= r}?
bool segment_meets_closed_box(const Segment& s, Point c, double r);
double ring_signed_area(std::span<const Point> ring);
// Winding test; points on the ring are reported separately by the caller.
bool inside_ring(std::span<const Point> ring, Point p);

class PolygonalDomain {
public:
  PolygonalDomain() = default;

  // Validates and normalizes orientation (outer counterclockwise, holes
  // clockwise). Throws ValidationError naming the offending ring or segment.
  static PolygonalDomain create(std::vector<Point> outer, std::vector<std::vector<Point>> holes,
                                std::vector<std::vector<Point>> slits);

  const std::vector<Point>& outer() const { return outer_; }
  const std::vector<std::vector<Point>>& holes() const { return holes_; }
  const std::vector<std::vector<Point>>& slits() const { return slits_; }
  std::span<const Feature> features() const { return features_; }
  // Distinct endpoints of all boundary features.
  std::span<const Point> vertices() const { return vertices_; }
  Box bbox() const { return bbox_; }
  double area() const { return area_; }

private:
  std::vector<Point> outer_;
  std::vector<std::vector<Point>> holes_;
  std::vector<std::vector<Point>> slits_;
  std::vector<Feature> features_;
  std::vector<Point> vertices_;
  Box bbox_{};
  double area_ = 0.0;
};

bool on_boundary(const PolygonalDomain& domain, Point p);
bool contains(const PolygonalDomain& domain, Point p);
double dist_to_boundary(const PolygonalDomain& domain, Point p);
// Uniform-norm distance to the boundary without the membership check.
double raw_dist_to_boundary(const PolygonalDomain& domain, Point p);
BoundarySample nearest_boundary_point(const PolygonalDomain& domain, Point p);
double cube_dist_to_boundary(const PolygonalDomain& domain, const Cube& q);
bool segment_in_domain(const PolygonalDomain& domain, Point a, Point b);
// Open segment (a, b) inside the domain; a and b may lie on the boundary.
bool open_segment_in_domain(const PolygonalDomain& domain, Point a, Point b);
// Any boundary feature meeting the open / closed uniform-norm ball.
bool boundary_meets_open_box(const PolygonalDomain& domain, Point c, double r);
bool boundary_meets_closed_box(const PolygonalDomain& domain, Point c, double r);

}  // namespace c2trace
