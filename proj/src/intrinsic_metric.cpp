#include "c2trace/intrinsic_metric.hpp"

#include <cmath>
#include <numbers>

#include "c2trace/error.hpp"

namespace c2trace {

namespace {

bool same_direction(Point a, Point b) { return cross(a, b) == 0.0 && dot(a, b) > 0.0; }

struct SectorScan {
  std::vector<Sector> sectors;
  double reach = 0.01;  // witness distance along bisectors
};

SectorScan scan_sectors(const PolygonalDomain& domain, Point b) {
  std::vector<Point> dirs;
  double clearance = std::numeric_limits<double>::infinity();
  for (const auto& f : domain.features()) {
    if (!on_segment(b, f.seg)) {
      clearance = std::min(clearance, point_segment_dist(b, f.seg));
      continue;
    }
    if (f.seg.a != b) dirs.push_back(f.seg.a - b);
    if (f.seg.b != b) dirs.push_back(f.seg.b - b);
  }
  if (dirs.empty()) throw ValidationError("not a boundary point");

  std::vector<std::pair<double, Point>> by_angle;
  for (Point d : dirs) by_angle.emplace_back(std::atan2(d.y, d.x), d);
  std::sort(by_angle.begin(), by_angle.end(), [](const auto& p, const auto& q) { return p.first < q.first; });
  std::vector<std::pair<double, Point>> uniq;
  for (const auto& e : by_angle)
    if (uniq.empty() || !same_direction(uniq.back().second, e.second)) uniq.push_back(e);
  if (uniq.size() > 1 && same_direction(uniq.front().second, uniq.back().second)) uniq.pop_back();

  SectorScan out;
  out.reach = std::min(0.01, 0.5 * clearance);
  const auto m = uniq.size();
  for (std::size_t k = 0; k < m; ++k) {
    Sector s;
    s.dir0 = uniq[k].second;
    s.theta0 = uniq[k].first;
    if (k + 1 < m) {
      s.dir1 = uniq[k + 1].second;
      s.theta1 = uniq[k + 1].first;
    } else {
      s.dir1 = uniq[0].second;
      s.theta1 = uniq[0].first + 2.0 * std::numbers::pi;
    }
    const double mid = 0.5 * (s.theta0 + s.theta1);
    const Point w = b + out.reach * Point{std::cos(mid), std::sin(mid)};
    if (contains(domain, w)) out.sectors.push_back(s);
  }
  return out;
}

Point bisector_witness(Point b, const Sector& s, double reach) {
  const double mid = 0.5 * (s.theta0 + s.theta1);
  return b + reach * Point{std::cos(mid), std::sin(mid)};
}

}  // namespace

bool Sector::contains(Point v) const {
  if (v == Point{}) return false;
  const double c = cross(dir0, dir1);
  if (c == 0.0 && dot(dir0, dir1) > 0.0) return !same_direction(dir0, v);
  if (c > 0.0) return cross(dir0, v) > 0.0 && cross(v, dir1) > 0.0;
  if (c == 0.0) return cross(dir0, v) > 0.0;
  return !(cross(dir1, v) >= 0.0 && cross(v, dir0) >= 0.0);
}

bool Sector::contains_half_open(Point v) const { return contains(v) || same_direction(dir0, v); }

BoundarySample boundary_sample(const PolygonalDomain& domain, Point p) {
  const auto features = domain.features();
  for (std::size_t i = 0; i < features.size(); ++i)
    if (on_segment(p, features[i].seg)) return {p, static_cast<int>(i)};
  throw ValidationError("not a boundary point");
}

std::vector<Sector> interior_sectors(const PolygonalDomain& domain, Point b) {
  return scan_sectors(domain, b).sectors;
}

std::vector<SplitElement> split_elements_at(const PolygonalDomain& domain, const BoundarySample& b) {
  const SectorScan scan = scan_sectors(domain, b.point);
  std::vector<SplitElement> out;
  for (std::size_t k = 0; k < scan.sectors.size(); ++k)
    out.push_back({b, bisector_witness(b.point, scan.sectors[k], scan.reach), scan.sectors[k], static_cast<int>(k)});
  return out;
}

SplitElement element_for_direction(const PolygonalDomain& domain, const BoundarySample& anchor, Point dir) {
  const SectorScan scan = scan_sectors(domain, anchor.point);
  for (std::size_t k = 0; k < scan.sectors.size(); ++k) {
    if (scan.sectors[k].contains_half_open(dir))
      return {anchor, bisector_witness(anchor.point, scan.sectors[k], scan.reach), scan.sectors[k],
              static_cast<int>(k)};
  }
  throw ValidationError("direction does not enter the domain");
}

IntrinsicMetric::IntrinsicMetric(PolygonalDomain domain) : domain_(std::move(domain)) {
  for (Point v : domain_.vertices()) {
    for (const Sector& s : interior_sectors(domain_, v))
      if (s.width() > std::numbers::pi) nodes_.push_back({v, s});
  }
  const auto k = nodes_.size();
  adj_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const Point p = nodes_[i].p, q = nodes_[j].p;
      if (!nodes_[i].sector.contains(q - p) || !nodes_[j].sector.contains(p - q)) continue;
      if (!open_segment_in_domain(domain_, p, q)) continue;
      const double w = dist_inf(p, q);
      adj_[i].emplace_back(static_cast<int>(j), w);
      adj_[j].emplace_back(static_cast<int>(i), w);
    }
  }
}

template <class SeesTarget>
GeodesicPath IntrinsicMetric::search(Point x, Point target, SeesTarget sees_target) const {
  const int k = static_cast<int>(nodes_.size());
  const int src = k, dst = k + 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(k + 2, inf);
  std::vector<int> prev(k + 2, -1);
  std::vector<char> done(k + 2, 0);
  dist[src] = 0.0;
  auto point_of = [&](int i) { return i == src ? x : (i == dst ? target : nodes_[i].p); };
  for (;;) {
    int u = -1;
    for (int i = 0; i < k + 2; ++i)
      if (!done[i] && dist[i] < inf && (u < 0 || dist[i] < dist[u])) u = i;
    if (u < 0 || u == dst) break;
    done[u] = 1;
    auto relax = [&](int v, double w) {
      if (dist[u] + w < dist[v]) {
        dist[v] = dist[u] + w;
        prev[v] = u;
      }
    };
    const Point p = point_of(u);
    const Sector* at = u == src ? nullptr : &nodes_[u].sector;
    if (sees_target(p, at)) relax(dst, dist_inf(p, target));
    if (u == src) {
      for (int j = 0; j < k; ++j) {
        if (nodes_[j].sector.contains(x - nodes_[j].p) && open_segment_in_domain(domain_, x, nodes_[j].p))
          relax(j, dist_inf(x, nodes_[j].p));
      }
    } else {
      for (auto [v, w] : adj_[u]) relax(v, w);
    }
  }
  GeodesicPath path;
  if (dist[dst] == inf) return path;
  for (int v = dst; v >= 0; v = prev[v]) path.vertices.push_back(point_of(v));
  std::reverse(path.vertices.begin(), path.vertices.end());
  path.length = 0.0;
  for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i)
    path.length += dist_inf(path.vertices[i], path.vertices[i + 1]);
  return path;
}

GeodesicPath IntrinsicMetric::path(Point x, Point y) const {
  if (!contains(domain_, x) || !contains(domain_, y)) throw ValidationError("outside domain");
  if (x == y) return {{x}, 0.0};
  if (segment_in_domain(domain_, x, y)) return {{x, y}, dist_inf(x, y)};
  return search(x, y, [&](Point p, const Sector* at) {
    if (at != nullptr && !at->contains(y - p)) return false;
    return open_segment_in_domain(domain_, p, y);
  });
}

double IntrinsicMetric::distance(Point x, Point y) const { return path(x, y).length; }

double IntrinsicMetric::distance_to_boundary_point(Point x, Point b) const {
  if (!contains(domain_, x)) throw ValidationError("outside domain");
  return search(x, b, [&](Point p, const Sector* at) {
           if (at != nullptr && !at->contains(b - p)) return false;
           return open_segment_in_domain(domain_, p, b);
         })
      .length;
}

double completed_distance(const IntrinsicMetric& metric, const SplitElement& a, const SplitElement& b,
                          const CompletedDistanceOptions& opts) {
  if (same_element(a, b) && a.witness == b.witness) return 0.0;
  const Point la = a.anchor.point, lb = b.anchor.point;
  const double reach = dist_inf(a.witness, la) + dist_inf(b.witness, lb);
  double prev = std::numeric_limits<double>::quiet_NaN();
  double lower = 0.0, upper = std::numeric_limits<double>::infinity();
  for (int i = opts.first_level; i <= opts.last_level; ++i) {
    const double s = std::ldexp(1.0, -i);
    const Point x = la + s * (a.witness - la);
    const Point y = lb + s * (b.witness - lb);
    if (!contains(metric.domain(), x) || !contains(metric.domain(), y)) break;
    const double d = metric.distance(x, y);
    // The ray tails have length s*reach, which brackets the limit.
    upper = std::min(upper, d + s * reach);
    lower = std::max(lower, d - s * reach);
    if (i > opts.first_level && std::abs(d - prev) < opts.tol) return std::clamp(d, lower, upper);
    prev = d;
  }
  throw ConvergenceError("no convergence of completed distance");
}

bool element_equiv(const IntrinsicMetric& metric, const SplitElement& a, const SplitElement& b, double tol) {
  if (a.anchor.point != b.anchor.point) return false;
  return completed_distance(metric, a, b) < tol;
}

Point default_probe(const PolygonalDomain& domain) {
  constexpr int n = 64;
  const Box box = domain.bbox();
  Point best{};
  double best_d = -1.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Point p{box.lo.x + (i + 0.5) * (box.hi.x - box.lo.x) / n, box.lo.y + (j + 0.5) * (box.hi.y - box.lo.y) / n};
      if (!contains(domain, p)) continue;
      const double d = raw_dist_to_boundary(domain, p);
      if (d > best_d) {
        best_d = d;
        best = p;
      }
    }
  }
  if (best_d < 0.0) throw ValidationError("no interior probe point found");
  return best;
}

std::vector<AccessReport> accessibility_scan(const IntrinsicMetric& metric, std::span<const BoundarySample> samples,
                                             double bound, std::span<const Point> probes) {
  std::vector<AccessReport> out;
  if (samples.empty()) return out;
  std::vector<Point> probe_set(probes.begin(), probes.end());
  if (probe_set.empty()) probe_set.push_back(default_probe(metric.domain()));
  for (const auto& s : samples) {
    AccessReport r{s, Access::accessible, bound, std::numeric_limits<double>::infinity()};
    for (Point p : probe_set) r.distance = std::min(r.distance, metric.distance_to_boundary_point(p, s.point));
    r.status = r.distance <= bound ? Access::accessible : Access::suspected_inaccessible;
    out.push_back(r);
  }
  return out;
}

}  // namespace c2trace
