#include <doctest.h>

#include <cmath>
#include <queue>
#include <random>

#include "c2trace/error.hpp"
#include "c2trace/intrinsic_metric.hpp"
#include "c2trace/io.hpp"

using namespace c2trace;

namespace {

PolygonalDomain unit_square() { return PolygonalDomain::create({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {}, {}); }
PolygonalDomain slit_square() {
  return PolygonalDomain::create({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, {}, {{{-0.5, 0}, {0.5, 0}}});
}

SplitElement element_from(const PolygonalDomain& d, Point b, Point dir) {
  return element_for_direction(d, boundary_sample(d, b), dir);
}

// Dijkstra on an 8-connected lattice with uniform-norm step lengths; an
// upper bound that tightens as the lattice is refined.
double lattice_distance(const PolygonalDomain& d, Point x, Point y, int n) {
  const Box b = d.bbox();
  const double h = (b.hi.x - b.lo.x) / n;
  auto at = [&](int i, int j) { return Point{b.lo.x + i * h, b.lo.y + j * h}; };
  auto id = [&](int i, int j) { return i * (n + 1) + j; };
  std::vector<double> dist((n + 1) * (n + 1), 1e300);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  auto snap = [&](Point p) { return std::pair{static_cast<int>(std::lround((p.x - b.lo.x) / h)), static_cast<int>(std::lround((p.y - b.lo.y) / h))}; };
  const auto [sx, sy] = snap(x);
  const auto [tx, ty] = snap(y);
  dist[id(sx, sy)] = 0.0;
  pq.push({0.0, id(sx, sy)});
  while (!pq.empty()) {
    const auto [dv, v] = pq.top();
    pq.pop();
    if (dv > dist[v]) continue;
    const int i = v / (n + 1), j = v % (n + 1);
    if (i == tx && j == ty) return dv;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        const int a = i + di, c = j + dj;
        if ((di == 0 && dj == 0) || a < 0 || c < 0 || a > n || c > n) continue;
        if (!segment_in_domain(d, at(i, j), at(a, c))) continue;
        const double nd = dv + h;
        if (nd < dist[id(a, c)]) {
          dist[id(a, c)] = nd;
          pq.push({nd, id(a, c)});
        }
      }
  }
  return 1e300;
}

}  // namespace

TEST_CASE("convex domains use the straight distance") {
  const IntrinsicMetric m(unit_square());
  CHECK(m.distance({0.1, 0.1}, {0.9, 0.9}) == doctest::Approx(0.8));
  CHECK(m.distance({0.3, 0.3}, {0.3, 0.3}) == 0.0);
  CHECK(m.path({0.1, 0.1}, {0.9, 0.9}).vertices.size() == 2);
}

TEST_CASE("slit square routes around a slit end") {
  const auto s = slit_square();
  const IntrinsicMetric m(s);
  CHECK(m.distance({0, 0.1}, {0, -0.1}) == doctest::Approx(1.0));
  const auto p = m.path({0, 0.1}, {0, -0.1});
  REQUIRE(p.vertices.size() == 3);
  CHECK(std::abs(p.vertices[1].x) == 0.5);
  CHECK(m.path({0.6, 0.1}, {0.6, -0.1}).vertices.size() == 2);
  CHECK(lattice_distance(s, {0, 0.125}, {0, -0.125}, 64) == doctest::Approx(m.distance({0, 0.125}, {0, -0.125})).epsilon(0.05));
}

TEST_CASE("metric properties on random pairs") {
  for (const auto& d : {slit_square(), parse_domain(std::string(C2TRACE_FIXTURES) + "/hub.json").domain}) {
    const IntrinsicMetric m(d);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> c(-0.95, 0.95);
    std::vector<Point> pts;
    while (pts.size() < 30) {
      const Point p{c(rng), c(rng)};
      if (contains(d, p)) pts.push_back(p);
    }
    for (std::size_t i = 0; i + 2 < pts.size(); ++i) {
      const Point x = pts[i], y = pts[i + 1], z = pts[i + 2];
      const double dxy = m.distance(x, y);
      CHECK(dxy >= dist_inf(x, y) - 1e-12);
      CHECK(dxy == doctest::Approx(m.distance(y, x)));
      CHECK(dxy <= m.distance(x, z) + m.distance(z, y) + 1e-12);
    }
  }
}

TEST_CASE("split elements") {
  const auto s = slit_square();
  CHECK(split_elements_at(s, boundary_sample(s, {0, 0})).size() == 2);
  CHECK(split_elements_at(s, boundary_sample(s, {0.5, 0})).size() == 1);
  const auto u = unit_square();
  CHECK(split_elements_at(u, boundary_sample(u, {1, 1})).size() == 1);
  CHECK_THROWS_WITH(split_elements_at(u, {{0.5, 0.5}, -1}), "not a boundary point");
}

TEST_CASE("completed distance between elements") {
  const auto s = slit_square();
  const IntrinsicMetric m(s);
  const auto top = element_from(s, {0, 0}, {0, 1});
  const auto bottom = element_from(s, {0, 0}, {0, -1});
  CHECK(completed_distance(m, top, bottom) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(completed_distance(m, top, top) == 0.0);

  const auto u = unit_square();
  const IntrinsicMetric mu(u);
  const auto a = element_from(u, {0, 0.5}, {1, 0});
  const auto b = element_from(u, {0, 0.7}, {1, 0});
  CHECK(std::abs(completed_distance(mu, a, b) - 0.2) <= 1e-6);
}

TEST_CASE("element equivalence") {
  const auto s = slit_square();
  const IntrinsicMetric m(s);
  const auto top = element_from(s, {0, 0}, {0, 1});
  CHECK(element_equiv(m, top, with_witness(top, {0.001, 0.002})));
  CHECK_FALSE(element_equiv(m, top, element_from(s, {0, 0}, {0, -1})));
  CHECK_FALSE(element_equiv(m, top, element_from(s, {0.25, 0}, {0, 1})));
}

TEST_CASE("accessibility scan on the comb") {
  const auto comb = parse_domain(std::string(C2TRACE_FIXTURES) + "/comb.json").domain;
  const IntrinsicMetric m(comb);
  CHECK(accessibility_scan(m, {}, 1.0).empty());

  // The deepest pocket lies between the last two teeth; the probe must weave
  // through every earlier tooth, each detour adding its length.
  const BoundarySample deep = boundary_sample(comb, {1.0 / 64, 0.5});
  const Point probe = default_probe(comb);
  const double path = m.distance_to_boundary_point(probe, deep.point);
  CHECK(path > 2.0);
  const auto tight = accessibility_scan(m, std::vector{deep}, 1.0);
  CHECK(tight[0].status == Access::suspected_inaccessible);
  const auto loose = accessibility_scan(m, std::vector{deep}, path + 1.0);
  CHECK(loose[0].status == Access::accessible);

  const auto s = slit_square();
  const IntrinsicMetric ms(s);
  std::vector<BoundarySample> samples;
  for (int i = 0; i < 100; ++i) samples.push_back(boundary_sample(s, {-1.0 + 2.0 * i / 100.0, -1.0}));
  for (const auto& r : accessibility_scan(ms, samples, 10.0)) CHECK(r.status == Access::accessible);
}
