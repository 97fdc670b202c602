#include "c2trace/geometry.hpp"

#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "c2trace/error.hpp"

namespace c2trace {

namespace {

// a*d - b*c with a single rounding error (Kahan).
double det2(double a, double b, double c, double d) {
  const double w = b * c;
  const double e = std::fma(-b, c, w);
  const double f = std::fma(a, d, -w);
  return f + e;
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool in_range(double v, double a, double b) { return std::min(a, b) <= v && v <= std::max(a, b); }

// Parameter of p along the dominant axis of s, used for collinear overlap tests.
double axis_coord(const Segment& s, Point p) {
  return std::abs(s.b.x - s.a.x) >= std::abs(s.b.y - s.a.y) ? p.x : p.y;
}

// Length of the overlap of two collinear segments along the dominant axis of s.
double collinear_overlap(const Segment& s, const Segment& t) {
  double s0 = axis_coord(s, s.a), s1 = axis_coord(s, s.b);
  double t0 = axis_coord(s, t.a), t1 = axis_coord(s, t.b);
  if (s0 > s1) std::swap(s0, s1);
  if (t0 > t1) std::swap(t0, t1);
  return std::min(s1, t1) - std::max(s0, t0);
}

bool collinear(const Segment& s, const Segment& t) {
  return orientation(s.a, s.b, t.a) == 0 && orientation(s.a, s.b, t.b) == 0;
}

// The single common point of two intersecting, non-collinear segments.
Point crossing_point(const Segment& s, const Segment& t) {
  if (on_segment(s.a, t)) return s.a;
  if (on_segment(s.b, t)) return s.b;
  if (on_segment(t.a, s)) return t.a;
  if (on_segment(t.b, s)) return t.b;
  const Point d = s.b - s.a, e = t.b - t.a, w = t.a - s.a;
  const double tt = det2(w.x, w.y, e.x, e.y) / det2(d.x, d.y, e.x, e.y);
  return s.a + tt * d;
}

std::string ring_name(int ring) { return ring < 0 ? "outer ring" : "hole " + std::to_string(ring); }

void check_ring_simple(std::span<const Point> ring, int ring_id) {
  const auto n = static_cast<int>(ring.size());
  if (n < 3) throw ValidationError(ring_name(ring_id) + ": fewer than 3 vertices");
  auto edge = [&](int i) { return Segment{ring[i], ring[(i + 1) % n]}; };
  for (int i = 0; i < n; ++i) {
    if (ring[i] == ring[(i + 1) % n])
      throw ValidationError(ring_name(ring_id) + ": zero-length edge " + std::to_string(i));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Segment s = edge(i), t = edge(j);
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (!segments_intersect(s, t)) continue;
      const bool overlapping = collinear(s, t) && collinear_overlap(s, t) > 0.0;
      if (!adjacent || overlapping)
        throw ValidationError(ring_name(ring_id) + ": non-simple ring at edge " + std::to_string(j));
    }
  }
  if (ring_signed_area(ring) == 0.0) throw ValidationError(ring_name(ring_id) + ": zero area");
}

bool on_ring(std::span<const Point> ring, Point p) {
  const auto n = ring.size();
  for (std::size_t i = 0; i < n; ++i)
    if (on_segment(p, {ring[i], ring[(i + 1) % n]})) return true;
  return false;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Counts bounded faces of the boundary arrangement with Euler's formula.
// The open set is connected iff the only bounded faces are the domain
// itself and the hole interiors.
int bounded_faces(std::span<const Feature> features) {
  const auto m = features.size();
  std::vector<std::vector<Point>> cuts(m);
  for (std::size_t i = 0; i < m; ++i) {
    cuts[i].push_back(features[i].seg.a);
    cuts[i].push_back(features[i].seg.b);
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const Segment& s = features[i].seg;
      const Segment& t = features[j].seg;
      if (!segments_intersect(s, t)) continue;
      if (collinear(s, t)) {
        if (collinear_overlap(s, t) > 0.0) throw ValidationError("overlapping boundary features");
        // Touching end to end.
        for (Point p : {t.a, t.b})
          if (on_segment(p, s)) cuts[i].push_back(p);
        for (Point p : {s.a, s.b})
          if (on_segment(p, t)) cuts[j].push_back(p);
        continue;
      }
      const Point p = crossing_point(s, t);
      cuts[i].push_back(p);
      cuts[j].push_back(p);
    }
  }
  std::map<Point, int> ids;
  auto id_of = [&](Point p) { return ids.emplace(p, static_cast<int>(ids.size())).first->second; };
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 0; i < m; ++i) {
    const Segment& s = features[i].seg;
    auto& c = cuts[i];
    const Point d = s.b - s.a;
    std::sort(c.begin(), c.end(), [&](Point p, Point q) { return dot(p - s.a, d) < dot(q - s.a, d); });
    c.erase(std::unique(c.begin(), c.end()), c.end());
    for (std::size_t k = 0; k + 1 < c.size(); ++k) edges.emplace_back(id_of(c[k]), id_of(c[k + 1]));
  }
  std::sort(edges.begin(), edges.end(), [](auto a, auto b) {
    return std::minmax(a.first, a.second) < std::minmax(b.first, b.second);
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](auto a, auto b) {
                            return std::minmax(a.first, a.second) == std::minmax(b.first, b.second);
                          }),
              edges.end());
  const int v = static_cast<int>(ids.size());
  UnionFind uf(v);
  for (auto [a, b] : edges) uf.unite(a, b);
  int components = 0;
  for (int k = 0; k < v; ++k) components += uf.find(k) == k;
  return static_cast<int>(edges.size()) - v + components;
}

}  // namespace

double cross(Point a, Point b) { return det2(a.x, a.y, b.x, b.y); }

int orientation(Point a, Point b, Point c) {
  return sign(det2(b.x - a.x, b.y - a.y, c.x - a.x, c.y - a.y));
}

bool on_segment(Point p, const Segment& s) {
  return orientation(s.a, s.b, p) == 0 && in_range(p.x, s.a.x, s.b.x) && in_range(p.y, s.a.y, s.b.y);
}

bool segments_intersect(const Segment& s, const Segment& t) {
  const int o1 = orientation(s.a, s.b, t.a);
  const int o2 = orientation(s.a, s.b, t.b);
  const int o3 = orientation(t.a, t.b, s.a);
  const int o4 = orientation(t.a, t.b, s.b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && on_segment(t.a, s)) return true;
  if (o2 == 0 && on_segment(t.b, s)) return true;
  if (o3 == 0 && on_segment(s.a, t)) return true;
  if (o4 == 0 && on_segment(s.b, t)) return true;
  return false;
}

bool meets_open_segment(const Segment& s, const Segment& t) {
  if (!segments_intersect(s, t)) return false;
  if (collinear(s, t)) {
    double s0 = axis_coord(s, s.a), s1 = axis_coord(s, s.b);
    double t0 = axis_coord(s, t.a), t1 = axis_coord(s, t.b);
    if (s0 > s1) std::swap(s0, s1);
    if (t0 > t1) std::swap(t0, t1);
    return t0 < s1 && t1 > s0;
  }
  return !on_segment(s.a, t) && !on_segment(s.b, t);
}

double point_segment_dist(Point p, const Segment& s) {
  const Point d = s.b - s.a;
  if (d.y == 0.0) {
    const double gap = std::max({0.0, std::min(s.a.x, s.b.x) - p.x, p.x - std::max(s.a.x, s.b.x)});
    return std::max(gap, std::abs(p.y - s.a.y));
  }
  if (d.x == 0.0) {
    const double gap = std::max({0.0, std::min(s.a.y, s.b.y) - p.y, p.y - std::max(s.a.y, s.b.y)});
    return std::max(gap, std::abs(p.x - s.a.x));
  }
  // f(t) = |u - t d|_inf is convex piecewise linear; its minimum sits at a
  // breakpoint or at an end of [0, 1].
  const Point u = p - s.a;
  auto f = [&](double t) {
    if (t <= 0.0) return norm_inf(u);
    if (t >= 1.0) return norm_inf(p - s.b);
    return std::max(std::abs(u.x - t * d.x), std::abs(u.y - t * d.y));
  };
  double best = std::min(f(0.0), f(1.0));
  const double cands[] = {u.x / d.x, u.y / d.y, (u.x - u.y) / (d.x - d.y), (u.x + u.y) / (d.x + d.y)};
  for (double t : cands)
    if (std::isfinite(t) && t > 0.0 && t < 1.0) best = std::min(best, f(t));
  return best;
}

bool segment_meets_open_box(const Segment& s, Point c, double r) {
  if (!(std::max(s.a.x, s.b.x) > c.x - r && std::min(s.a.x, s.b.x) < c.x + r)) return false;
  if (!(std::max(s.a.y, s.b.y) > c.y - r && std::min(s.a.y, s.b.y) < c.y + r)) return false;
  if (s.a == s.b) return true;
  bool pos = false, neg = false;
  for (Point k : {Point{c.x - r, c.y - r}, Point{c.x + r, c.y - r}, Point{c.x + r, c.y + r},
                  Point{c.x - r, c.y + r}}) {
    const int o = orientation(s.a, s.b, k);
    pos |= o > 0;
    neg |= o < 0;
  }
  return pos && neg;
}

bool segment_meets_closed_box(const Segment& s, Point c, double r) {
  if (!(std::max(s.a.x, s.b.x) >= c.x - r && std::min(s.a.x, s.b.x) <= c.x + r)) return false;
  if (!(std::max(s.a.y, s.b.y) >= c.y - r && std::min(s.a.y, s.b.y) <= c.y + r)) return false;
  if (s.a == s.b) return true;
  bool nonneg = false, nonpos = false;
  for (Point k : {Point{c.x - r, c.y - r}, Point{c.x + r, c.y - r}, Point{c.x + r, c.y + r},
                  Point{c.x - r, c.y + r}}) {
    const int o = orientation(s.a, s.b, k);
    nonneg |= o >= 0;
    nonpos |= o <= 0;
  }
  return nonneg && nonpos;
}

double ring_signed_area(std::span<const Point> ring) {
  double twice = 0.0;
  const auto n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = ring[i], b = ring[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

bool inside_ring(std::span<const Point> ring, Point p) {
  int winding = 0;
  const auto n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = ring[i], b = ring[(i + 1) % n];
    if (a.y <= p.y) {
      if (b.y > p.y && orientation(a, b, p) > 0) ++winding;
    } else if (b.y <= p.y && orientation(a, b, p) < 0) {
      --winding;
    }
  }
  return winding != 0;
}

PolygonalDomain PolygonalDomain::create(std::vector<Point> outer, std::vector<std::vector<Point>> holes,
                                        std::vector<std::vector<Point>> slits) {
  for (const auto* ring : {&outer}) {
    for (Point p : *ring)
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ValidationError("outer ring: non-finite coordinate");
  }
  check_ring_simple(outer, -1);
  if (ring_signed_area(outer) < 0.0) std::reverse(outer.begin(), outer.end());

  for (std::size_t h = 0; h < holes.size(); ++h) {
    auto& ring = holes[h];
    for (Point p : ring)
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw ValidationError(ring_name(static_cast<int>(h)) + ": non-finite coordinate");
    check_ring_simple(ring, static_cast<int>(h));
    if (ring_signed_area(ring) > 0.0) std::reverse(ring.begin(), ring.end());
    for (std::size_t k = 0; k < ring.size(); ++k) {
      if (!inside_ring(outer, ring[k]) || on_ring(outer, ring[k]))
        throw ValidationError(ring_name(static_cast<int>(h)) + ": vertex " + std::to_string(k) +
                              " not inside outer ring");
    }
    for (std::size_t k = 0; k < ring.size(); ++k) {
      const Segment e{ring[k], ring[(k + 1) % ring.size()]};
      for (std::size_t i = 0; i < outer.size(); ++i)
        if (segments_intersect(e, {outer[i], outer[(i + 1) % outer.size()]}))
          throw ValidationError(ring_name(static_cast<int>(h)) + ": edge " + std::to_string(k) +
                                " meets outer ring");
    }
  }
  for (std::size_t h = 0; h < holes.size(); ++h) {
    for (std::size_t g = h + 1; g < holes.size(); ++g) {
      const auto& a = holes[h];
      const auto& b = holes[g];
      bool touch = false;
      for (std::size_t i = 0; i < a.size() && !touch; ++i)
        for (std::size_t j = 0; j < b.size() && !touch; ++j)
          touch = segments_intersect({a[i], a[(i + 1) % a.size()]}, {b[j], b[(j + 1) % b.size()]});
      if (touch || inside_ring(a, b[0]) || inside_ring(b, a[0]))
        throw ValidationError("holes " + std::to_string(h) + " and " + std::to_string(g) + " overlap");
    }
  }

  PolygonalDomain d;
  for (std::size_t i = 0; i < outer.size(); ++i)
    d.features_.push_back({{outer[i], outer[(i + 1) % outer.size()]}, FeatureKind::outer_edge, 0,
                           static_cast<int>(i)});
  for (std::size_t h = 0; h < holes.size(); ++h)
    for (std::size_t i = 0; i < holes[h].size(); ++i)
      d.features_.push_back({{holes[h][i], holes[h][(i + 1) % holes[h].size()]}, FeatureKind::hole_edge,
                             static_cast<int>(h), static_cast<int>(i)});
  const std::size_t ring_features = d.features_.size();

  auto in_closed_region = [&](Point p) {
    if (!inside_ring(outer, p) && !on_ring(outer, p)) return false;
    for (const auto& ring : holes)
      if (inside_ring(ring, p) && !on_ring(ring, p)) return false;
    return true;
  };
  for (std::size_t s = 0; s < slits.size(); ++s) {
    const auto& poly = slits[s];
    const std::string name = "slit " + std::to_string(s);
    if (poly.size() < 2) throw ValidationError(name + ": fewer than 2 points");
    for (std::size_t k = 0; k + 1 < poly.size(); ++k) {
      const Segment seg{poly[k], poly[k + 1]};
      if (!std::isfinite(seg.a.x) || !std::isfinite(seg.a.y) || !std::isfinite(seg.b.x) ||
          !std::isfinite(seg.b.y))
        throw ValidationError(name + " segment " + std::to_string(k) + ": non-finite coordinate");
      if (seg.a == seg.b) throw ValidationError(name + " segment " + std::to_string(k) + ": zero length");
      if (!in_closed_region(seg.a) || !in_closed_region(seg.b) || !in_closed_region(0.5 * (seg.a + seg.b)))
        throw ValidationError(name + " segment " + std::to_string(k) + ": outside domain");
      for (std::size_t f = 0; f < ring_features; ++f) {
        const Segment& e = d.features_[f].seg;
        if (!segments_intersect(seg, e)) continue;
        if (collinear(seg, e)) {
          if (collinear_overlap(seg, e) > 0.0)
            throw ValidationError(name + " segment " + std::to_string(k) + ": runs along a ring");
          continue;
        }
        const Point p = crossing_point(seg, e);
        if (p != seg.a && p != seg.b)
          throw ValidationError(name + " segment " + std::to_string(k) + ": crosses a ring");
      }
      d.features_.push_back({seg, FeatureKind::slit_segment, static_cast<int>(s), static_cast<int>(k)});
    }
  }

  d.outer_ = std::move(outer);
  d.holes_ = std::move(holes);
  d.slits_ = std::move(slits);

  d.area_ = ring_signed_area(d.outer_);
  for (const auto& ring : d.holes_) d.area_ += ring_signed_area(ring);
  if (!(d.area_ > 0.0)) throw ValidationError("empty domain");

  if (bounded_faces(d.features_) != 1 + static_cast<int>(d.holes_.size()))
    throw ValidationError("disconnected domain: boundary features separate the interior");

  d.bbox_ = {d.outer_[0], d.outer_[0]};
  for (Point p : d.outer_) {
    d.bbox_.lo = {std::min(d.bbox_.lo.x, p.x), std::min(d.bbox_.lo.y, p.y)};
    d.bbox_.hi = {std::max(d.bbox_.hi.x, p.x), std::max(d.bbox_.hi.y, p.y)};
  }
  for (const auto& f : d.features_) {
    d.vertices_.push_back(f.seg.a);
    d.vertices_.push_back(f.seg.b);
  }
  std::sort(d.vertices_.begin(), d.vertices_.end());
  d.vertices_.erase(std::unique(d.vertices_.begin(), d.vertices_.end()), d.vertices_.end());
  return d;
}

bool on_boundary(const PolygonalDomain& domain, Point p) {
  for (const auto& f : domain.features())
    if (on_segment(p, f.seg)) return true;
  return false;
}

bool contains(const PolygonalDomain& domain, Point p) {
  if (on_boundary(domain, p)) return false;
  if (!inside_ring(domain.outer(), p)) return false;
  for (const auto& ring : domain.holes())
    if (inside_ring(ring, p)) return false;
  return true;
}

double raw_dist_to_boundary(const PolygonalDomain& domain, Point p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : domain.features()) best = std::min(best, point_segment_dist(p, f.seg));
  return best;
}

double dist_to_boundary(const PolygonalDomain& domain, Point p) {
  if (!contains(domain, p)) throw ValidationError("outside domain");
  return raw_dist_to_boundary(domain, p);
}

namespace {

// Lexicographically smallest point q of s with |q - p|_inf <= d.
Point lexmin_within(const Segment& s, Point p, double d) {
  const Point dir = s.b - s.a;
  if (dir.y == 0.0) return {std::max(std::min(s.a.x, s.b.x), p.x - d), s.a.y};
  if (dir.x == 0.0) return {s.a.x, std::max(std::min(s.a.y, s.b.y), p.y - d)};
  const Point u = p - s.a;
  double lo = 0.0, hi = 1.0;
  for (auto [uk, dk] : {std::pair{u.x, dir.x}, std::pair{u.y, dir.y}}) {
    double t1 = (uk - d) / dk, t2 = (uk + d) / dk;
    if (t1 > t2) std::swap(t1, t2);
    lo = std::max(lo, t1);
    hi = std::min(hi, t2);
  }
  if (lo > hi) lo = hi = std::clamp(0.5 * (lo + hi), 0.0, 1.0);
  auto at = [&](double t) { return t <= 0.0 ? s.a : (t >= 1.0 ? s.b : s.a + t * dir); };
  return std::min(at(lo), at(hi));
}

}  // namespace

BoundarySample nearest_boundary_point(const PolygonalDomain& domain, Point p) {
  if (!contains(domain, p)) throw ValidationError("outside domain");
  const double d = raw_dist_to_boundary(domain, p);
  BoundarySample best;
  bool found = false;
  const auto features = domain.features();
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (point_segment_dist(p, features[i].seg) != d) continue;
    const Point q = lexmin_within(features[i].seg, p, d);
    if (!found || q < best.point) {
      best = {q, static_cast<int>(i)};
      found = true;
    }
  }
  return best;
}

bool boundary_meets_open_box(const PolygonalDomain& domain, Point c, double r) {
  for (const auto& f : domain.features())
    if (segment_meets_open_box(f.seg, c, r)) return true;
  return false;
}

bool boundary_meets_closed_box(const PolygonalDomain& domain, Point c, double r) {
  for (const auto& f : domain.features())
    if (segment_meets_closed_box(f.seg, c, r)) return true;
  return false;
}

double cube_dist_to_boundary(const PolygonalDomain& domain, const Cube& q) {
  if (!contains(domain, q.center) || boundary_meets_open_box(domain, q.center, q.half_side))
    throw ValidationError("cube not inside domain");
  return std::max(0.0, raw_dist_to_boundary(domain, q.center) - q.half_side);
}

bool segment_in_domain(const PolygonalDomain& domain, Point a, Point b) {
  if (!contains(domain, a) || !contains(domain, b)) return false;
  if (a == b) return true;
  const Segment s{a, b};
  for (const auto& f : domain.features())
    if (segments_intersect(s, f.seg)) return false;
  return true;
}

bool open_segment_in_domain(const PolygonalDomain& domain, Point a, Point b) {
  if (a == b) return false;
  const Segment s{a, b};
  for (const auto& f : domain.features())
    if (meets_open_segment(s, f.seg)) return false;
  return contains(domain, 0.5 * (a + b));
}

}  // namespace c2trace
