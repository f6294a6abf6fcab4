#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "flareprox/geometry.hpp"
#include "flareprox/imageproc.hpp"
#include "oracle/oracle.hpp"

using namespace flareprox::geometry;
namespace oracle = flareprox::oracle;

namespace {

Polygon square(double lo, double hi) { return Polygon{{{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}}}; }

std::vector<oracle::Pt> to_oracle(const Polygon& p) {
  std::vector<oracle::Pt> out;
  for (const auto& v : p.vertices) out.push_back({v.x, v.y});
  return out;
}

Polygon from_oracle(const std::vector<oracle::Pt>& pts) {
  Polygon p;
  for (const auto& v : pts) p.vertices.push_back({v.x, v.y});
  return p;
}

SolarDiskGeometry centered(double cdelt) {
  SolarDiskGeometry g;
  g.hpc_center_x = 256;
  g.hpc_center_y = 256;
  g.cdelt = cdelt;
  return g;
}

}  // namespace

TEST_CASE("hpc_to_pixel maps the disk center and follows the axis conventions") {
  const auto g = centered(4.0);
  auto p = hpc_to_pixel({0, 0}, g);
  CHECK(p.x == 256.0);
  CHECK(p.y == 256.0);
  p = hpc_to_pixel({400, 0}, g);
  CHECK(p.x == 356.0);
  CHECK(p.y == 256.0);
  p = hpc_to_pixel({0, 400}, g);
  CHECK(p.x == 256.0);
  CHECK(p.y == 156.0);
}

TEST_CASE("hpc_to_pixel is affine and inverted by pixel_to_hpc") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> arc(-1000.0, 1000.0);
  std::uniform_real_distribution<double> scale(0.5, 8.0);
  for (int i = 0; i < 1000; ++i) {
    SolarDiskGeometry g = centered(scale(rng));
    const HpcPoint a{arc(rng), arc(rng)};
    const HpcPoint b{arc(rng), arc(rng)};
    const auto pa = hpc_to_pixel(a, g);
    const auto pb = hpc_to_pixel(b, g);
    CHECK(std::abs((pa.x - pb.x) - (a.hpcx - b.hpcx) / g.cdelt) <= 1e-9);
    CHECK(std::abs((pa.y - pb.y) + (a.hpcy - b.hpcy) / g.cdelt) <= 1e-9);
    const auto back = pixel_to_hpc(pa, g);
    CHECK(std::abs(back.hpcx - a.hpcx) <= 1e-9);
    CHECK(std::abs(back.hpcy - a.hpcy) <= 1e-9);
  }
}

TEST_CASE("geometry validation") {
  SolarDiskGeometry g;
  CHECK_NOTHROW(g.validate());
  g.cdelt = 0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = {};
  g.disk_radius_px = 300;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = {};
  g.hpc_center_x = 512;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("rescaled geometry keeps the disk in the same relative place") {
  SolarDiskGeometry g;
  g.image_size = 1024;
  g.hpc_center_x = 511.5;
  g.hpc_center_y = 511.5;
  g.disk_radius_px = 480;
  g.cdelt = 2.0;
  const auto r = g.rescaled(512);
  CHECK(r.hpc_center_x == doctest::Approx(255.5));
  CHECK(r.disk_radius_px == doctest::Approx(240));
  CHECK(r.cdelt == doctest::Approx(4.0));
  CHECK(r.image_size == 512);
  // The limb point in arcsec lands on the limb in both frames.
  const HpcPoint limb{960.0, 0.0};
  CHECK(hpc_to_pixel(limb, r).x - r.hpc_center_x == doctest::Approx(240.0));
}

TEST_CASE("point_in_polygon treats the boundary as inside") {
  const auto sq = square(0, 10);
  CHECK(point_in_polygon({5, 5}, sq));
  CHECK(point_in_polygon({10, 5}, sq));
  CHECK(point_in_polygon({0, 0}, sq));
  CHECK_FALSE(point_in_polygon({10.001, 5}, sq));
  CHECK_FALSE(point_in_polygon({-1, 5}, sq));
}

TEST_CASE("min_distance_to_polygon on a square") {
  const auto sq = square(0, 10);
  CHECK(min_distance_to_polygon({5, 5}, sq) == 0.0);
  CHECK(min_distance_to_polygon({14, 5}, sq) == doctest::Approx(4.0));
  const double d = min_distance_to_polygon({-3, -4}, sq);
  CHECK(d == doctest::Approx(5.0));
  CHECK(std::abs(d - oracle::sampled_min_distance({-3, -4}, to_oracle(sq), 100000)) <= 1e-3);
}

TEST_CASE("degenerate polygons measure distance to a point or a segment") {
  const Polygon dot{{{3, 3}}};
  CHECK(min_distance_to_polygon({6, 7}, dot) == doctest::Approx(5.0));
  CHECK(point_in_polygon({3, 3}, dot));
  const Polygon seg{{{0, 0}, {10, 0}}};
  CHECK(min_distance_to_polygon({5, 2}, seg) == doctest::Approx(2.0));
  CHECK(min_distance_to_polygon({13, 4}, seg) == doctest::Approx(5.0));
  CHECK(point_in_polygon({5, 0}, seg));
  CHECK_FALSE(point_in_polygon({5, 0.1}, seg));
}

TEST_CASE("min_distance agrees with boundary sampling on random convex polygons") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(0.0, 32.0);
  std::uniform_real_distribution<double> query(-16.0, 48.0);
  for (int k = 0; k < 20; ++k) {
    std::vector<oracle::Pt> cloud;
    for (int i = 0; i < 12; ++i) cloud.push_back({coord(rng), coord(rng)});
    const auto hull = oracle::gift_wrap_hull(cloud);
    const auto poly = from_oracle(hull);
    for (int q = 0; q < 20; ++q) {
      const PixelPoint p{query(rng), query(rng)};
      const double d = min_distance_to_polygon(p, poly);
      CHECK(d >= 0.0);
      CHECK((d == 0.0) == point_in_polygon(p, poly));
      CHECK(std::abs(d - oracle::sampled_min_distance({p.x, p.y}, hull, 10000)) <= 1e-3);
    }
  }
}

TEST_CASE("polygon_distance") {
  const auto a = square(0, 10);
  CHECK(polygon_distance(a, square(5, 15)) == 0.0);
  CHECK(polygon_distance(a, square(2, 8)) == 0.0);
  const Polygon b{{{20, 0}, {30, 0}, {30, 10}, {20, 10}}};
  CHECK(polygon_distance(a, b) == doctest::Approx(10.0));
  const Polygon dot{{{13, 14}}};
  CHECK(polygon_distance(a, dot) == doctest::Approx(5.0));
  // Crossing edges without vertex containment.
  const Polygon bar{{{-5, 4}, {15, 4}, {15, 6}, {-5, 6}}};
  const Polygon pillar{{{4, -5}, {6, -5}, {6, 15}, {4, 15}}};
  CHECK(polygon_distance(bar, pillar) == 0.0);
}

TEST_CASE("convex_hull drops interior and collinear points") {
  const std::vector<PixelPoint> sq{{0, 0}, {10, 0}, {10, 10}, {0, 10}, {5, 5}};
  const auto h = convex_hull(sq);
  CHECK(h.vertices.size() == 4);
  CHECK(polygon_area(h) == doctest::Approx(100.0));

  const std::vector<PixelPoint> line{{0, 0}, {5, 0}, {10, 0}};
  const auto seg = convex_hull(line);
  REQUIRE(seg.vertices.size() == 2);
  CHECK(seg.vertices[0] == PixelPoint{0, 0});
  CHECK(seg.vertices[1] == PixelPoint{10, 0});

  const std::vector<PixelPoint> same{{3, 3}, {3, 3}};
  CHECK(convex_hull(same).vertices.size() == 1);
  CHECK(convex_hull(std::vector<PixelPoint>{}).vertices.empty());
}

TEST_CASE("mask_points_to_disk keeps exactly the points inside the circle") {
  SolarDiskGeometry g;
  using flareprox::imageproc::PixelIndex;
  const std::vector<PixelIndex> pts{{256, 256}, {256, 10}, {256, 16}, {496, 256}};
  const auto kept = mask_points_to_disk<PixelIndex>(pts, g);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0] == PixelIndex{256, 256});
  CHECK(kept[1] == PixelIndex{256, 16});
  CHECK(kept[2] == PixelIndex{496, 256});

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> c(0, 511);
  std::vector<PixelIndex> random;
  for (int i = 0; i < 1000; ++i) random.push_back({c(rng), c(rng)});
  const auto masked = mask_points_to_disk<PixelIndex>(random, g);
  std::vector<PixelIndex> expected;
  for (const auto& p : random) {
    const long dx = p.x - 256;
    const long dy = p.y - 256;
    if (dx * dx + dy * dy <= 240L * 240L) expected.push_back(p);
  }
  CHECK(masked == expected);
  CHECK(mask_points_to_disk<PixelIndex>(masked, g) == masked);
}
