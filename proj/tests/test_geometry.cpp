#include <doctest.h>

#include <random>
#include <string>

#include "c2trace/error.hpp"
#include "c2trace/geometry.hpp"

using namespace c2trace;

namespace {

PolygonalDomain unit_square() { return PolygonalDomain::create({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {}, {}); }
PolygonalDomain slit_square() {
  return PolygonalDomain::create({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, {}, {{{-0.5, 0}, {0.5, 0}}});
}

std::string validation_message(auto make) {
  try {
    make();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

// Minimum uniform distance over a dense sampling of every boundary feature.
double sampled_boundary_distance(const PolygonalDomain& d, Point p) {
  double best = 1e300;
  for (const auto& f : d.features())
    for (int i = 0; i <= 4000; ++i) {
      const double t = i / 4000.0;
      best = std::min(best, dist_inf(p, f.seg.a + t * (f.seg.b - f.seg.a)));
    }
  return best;
}

}  // namespace

TEST_CASE("membership") {
  const auto u = unit_square();
  const auto s = slit_square();
  CHECK(contains(u, {0.5, 0.5}));
  CHECK_FALSE(contains(u, {0.0, 0.5}));
  CHECK_FALSE(contains(u, {1.5, 0.5}));
  CHECK_FALSE(contains(s, {0.0, 0.0}));
  CHECK(contains(s, {0.6, 0.0}));
  CHECK(on_boundary(s, {0.25, 0.0}));
}

TEST_CASE("distance to boundary") {
  const auto u = unit_square();
  const auto s = slit_square();
  CHECK(dist_to_boundary(u, {0.5, 0.5}) == 0.5);
  CHECK(dist_to_boundary(u, {0.25, 0.5}) == 0.25);
  CHECK(dist_to_boundary(s, {0.0, 0.25}) == 0.25);
  CHECK_THROWS_WITH(dist_to_boundary(u, {2.0, 2.0}), "outside domain");

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> c(-0.99, 0.99);
  for (int i = 0; i < 50; ++i) {
    const Point p{c(rng), c(rng)};
    if (!contains(s, p)) continue;
    CHECK(dist_to_boundary(s, p) == doctest::Approx(sampled_boundary_distance(s, p)).epsilon(1e-3));
  }
}

TEST_CASE("nearest boundary point takes the lexicographic minimum") {
  const auto u = unit_square();
  const auto s = slit_square();
  CHECK(nearest_boundary_point(u, {0.5, 0.5}).point == Point{0, 0});
  const Point p = nearest_boundary_point(u, {0.1, 0.5}).point;
  CHECK(p.x == 0.0);
  CHECK(p.y == doctest::Approx(0.4));
  CHECK(nearest_boundary_point(s, {0.0, 0.25}).point == Point{-0.25, 0});
}

TEST_CASE("cube distance and dilation") {
  const auto u = unit_square();
  CHECK(cube_dist_to_boundary(u, {{0.5, 0.5}, 0.125}) == 0.375);
  CHECK(cube_dist_to_boundary(slit_square(), {{0.0, 0.5}, 0.125}) == 0.375);
  CHECK(cube_dist_to_boundary(u, {{0.5, 0.5}, 0.5}) == 0.0);
  CHECK_THROWS_WITH(cube_dist_to_boundary(u, {{1.5, 0.5}, 0.25}), "cube not inside domain");
  CHECK(dilate({{0, 0}, 1}, 9.0 / 8.0).half_side == 1.125);
  CHECK(dilate({{1, 2}, 0.5}, 1.0).half_side == 0.5);
  CHECK(dilate({{0, 0}, 2}, 0.5).half_side == 1.0);
}

TEST_CASE("segments inside the domain") {
  const auto u = unit_square();
  const auto s = slit_square();
  CHECK_FALSE(segment_in_domain(s, {0, 0.1}, {0, -0.1}));
  CHECK(segment_in_domain(s, {0.6, 0.1}, {0.6, -0.1}));
  CHECK_FALSE(segment_in_domain(u, {0, 0}, {1, 1}));
  CHECK(open_segment_in_domain(u, {0, 0}, {1, 1}));
  CHECK(segment_in_domain(u, {0.1, 0.1}, {0.9, 0.9}));
}

TEST_CASE("orientation and normalization") {
  CHECK(orientation({0, 0}, {1, 0}, {0, 1}) == 1);
  CHECK(orientation({0, 0}, {1, 0}, {2, 0}) == 0);
  CHECK(orientation({0, 0}, {0, 1}, {1, 0}) == -1);
  const auto cw = PolygonalDomain::create({{0, 0}, {0, 1}, {1, 1}, {1, 0}}, {}, {});
  CHECK(ring_signed_area(cw.outer()) > 0.0);
  CHECK(cw.area() == 1.0);
  const auto holed = PolygonalDomain::create({{0, 0}, {4, 0}, {4, 4}, {0, 4}}, {{{1, 1}, {2, 1}, {2, 2}, {1, 2}}}, {});
  CHECK(ring_signed_area(holed.holes()[0]) < 0.0);
  CHECK(holed.area() == 15.0);
  CHECK_FALSE(contains(holed, {1.5, 1.5}));
}

TEST_CASE("validation errors name the offending piece") {
  CHECK(validation_message([] { PolygonalDomain::create({{0, 0}, {1, 1}, {1, 0}, {0, 1}}, {}, {}); })
            .starts_with("outer ring: non-simple ring"));
  CHECK(validation_message([] {
          PolygonalDomain::create({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{2, 2}, {3, 2}, {3, 3}}}, {});
        }).starts_with("hole 0: vertex"));
  CHECK(validation_message([] {
          PolygonalDomain::create({{0, 0}, {4, 0}, {4, 4}, {0, 4}}, {{{1, 1}, {2, 1}, {2, 2}, {1, 2}}, {{1.5, 1.5}, {3, 1.5}, {3, 3}, {1.5, 3}}},
                                  {});
        }).find("hole") != std::string::npos);
  CHECK(validation_message([] {
          PolygonalDomain::create({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {}, {{{0.5, 0.5}, {0.5, 0.5}}});
        }).starts_with("slit 0 segment 0"));
  CHECK(validation_message([] {
          PolygonalDomain::create({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {}, {{{0.5, -0.5}, {0.5, 0.5}}});
        }).starts_with("slit 0 segment 0"));
  CHECK(validation_message([] {
          PolygonalDomain::create({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {}, {{{0.5, 0}, {0.5, 1}}});
        }).starts_with("disconnected domain"));
  CHECK(validation_message([] { PolygonalDomain::create({{0, 0}, {1, 0}}, {}, {}); }) != "");
}
