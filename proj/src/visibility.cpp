#include <algorithm>
#include <cmath>
#include <numbers>

#include "c2trace/error.hpp"
#include "c2trace/pipeline.hpp"

namespace c2trace {

namespace {

// Convex hull, counterclockwise, without collinear points.
std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && orientation(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && orientation(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

bool inside_convex(std::span<const Point> hull, Point p) {
  for (std::size_t i = 0; i < hull.size(); ++i)
    if (orientation(hull[i], hull[(i + 1) % hull.size()], p) < 0) return false;
  return true;
}

bool segment_meets_convex(std::span<const Point> hull, const Segment& s) {
  if (inside_convex(hull, s.a) || inside_convex(hull, s.b)) return true;
  for (std::size_t i = 0; i < hull.size(); ++i)
    if (segments_intersect(s, {hull[i], hull[(i + 1) % hull.size()]})) return true;
  return false;
}

std::array<Point, 4> corners(const Cube& q) {
  const Point lo = q.lo(), hi = q.hi();
  return {lo, Point{hi.x, lo.y}, hi, Point{lo.x, hi.y}};
}

// conv({l} u Q) minus {l} inside the domain, for a cube Q inside the domain.
bool hull_clear(const PolygonalDomain& domain, Point l, const Cube& q) {
  const auto cs = corners(q);
  std::vector<Point> pts(cs.begin(), cs.end());
  pts.push_back(l);
  const auto hull = convex_hull(pts);
  // Extreme directions of the cone at l spanned by the cube.
  Point u = cs[0] - l, v = cs[0] - l;
  for (Point c : cs) {
    const Point d = c - l;
    if (cross(u, d) < 0.0) u = d;
    if (cross(d, v) < 0.0) v = d;
  }
  auto in_cone = [&](Point d) { return cross(u, d) >= 0.0 && cross(d, v) >= 0.0; };
  for (const auto& f : domain.features()) {
    if (on_segment(l, f.seg)) {
      for (Point end : {f.seg.a, f.seg.b})
        if (end != l && in_cone(end - l)) return false;
    } else if (segment_meets_convex(hull, f.seg)) {
      return false;
    }
  }
  return true;
}

bool cube_inside(const PolygonalDomain& domain, const Cube& q) {
  return contains(domain, q.center) && !boundary_meets_closed_box(domain, q.center, q.half_side);
}

double anchor_diameter(const std::array<SplitElement, 3>& t) {
  double d = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) d = std::max(d, dist_inf(t[i].anchor.point, t[j].anchor.point));
  return d;
}

}  // namespace

double required_alpha(const std::array<SplitElement, 3>& triple, const Cube& cube) {
  const double diam_l = anchor_diameter(triple);
  if (diam_l == 0.0) return std::numeric_limits<double>::infinity();
  double a = std::max(1.0, cube.diam() / diam_l);
  for (const auto& e : triple) a = std::max(a, dist_inf(e.anchor.point, cube.center) / cube.half_side);
  return a;
}

VisibilityResult is_visible_triple(const PolygonalDomain& domain, const std::array<SplitElement, 3>& triple,
                                   double alpha, const Cube& cube) {
  if (!(alpha >= 1.0)) throw ValidationError("alpha must be at least 1");
  if (!cube_inside(domain, cube)) return {false, "(i) cube not inside domain"};
  for (const auto& e : triple)
    if (!hull_clear(domain, e.anchor.point, cube)) return {false, "(i) hull leaves domain"};
  for (const auto& e : triple)
    if (!e.sector.contains(cube.center - e.anchor.point)) return {false, "(ii) ray does not represent element"};
  const Cube big = dilate(cube, alpha);
  for (const auto& e : triple)
    if (!big.contains(e.anchor.point)) return {false, "(iii) anchors not inside dilated cube"};
  if (cube.diam() > alpha * anchor_diameter(triple)) return {false, "(iii) cube too large"};
  return {true, {}};
}

std::optional<VisibleTriple> find_visibility_cube(const PolygonalDomain& domain,
                                                  const std::array<SplitElement, 3>& triple) {
  const double diam_l = anchor_diameter(triple);
  if (diam_l == 0.0) return std::nullopt;
  Point lo = triple[0].anchor.point, hi = lo;
  for (const auto& e : triple) {
    lo = {std::min(lo.x, e.anchor.point.x), std::min(lo.y, e.anchor.point.y)};
    hi = {std::max(hi.x, e.anchor.point.x), std::max(hi.y, e.anchor.point.y)};
  }
  const Point mid = 0.5 * (lo + hi);

  std::vector<Point> dirs;
  Point sum;
  for (const auto& e : triple) {
    const Point d = e.witness - e.anchor.point;
    const Point u = (1.0 / norm_inf(d)) * d;
    dirs.push_back(u);
    sum += u;
  }
  if (norm_inf(sum) > 0.0) dirs.push_back((1.0 / norm_inf(sum)) * sum);
  for (int k = 0; k < 16; ++k) {
    const double th = k * std::numbers::pi / 8.0;
    dirs.push_back({std::cos(th), std::sin(th)});
  }
  constexpr double offsets[] = {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0};
  constexpr double sizes[] = {1.0 / 32, 1.0 / 16, 1.0 / 8, 0.25, 0.375, 0.5, 0.75, 1.0};

  std::optional<VisibleTriple> best;
  for (Point u : dirs)
    for (double t : offsets)
      for (double s : sizes) {
        const Cube q{mid + (t * diam_l) * u, s * diam_l};
        const double a = required_alpha(triple, q);
        if (best && a >= best->alpha) continue;
        if (!is_visible_triple(domain, triple, a, q).visible) continue;
        best = VisibleTriple{triple, q, a};
      }
  return best;
}

}  // namespace c2trace
