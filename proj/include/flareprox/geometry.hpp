#pragma once

#include <span>
#include <vector>

namespace flareprox::geometry {

/// Helioprojective-Cartesian position in arcseconds.
/// +hpcx points to solar west, +hpcy to solar north.
struct HpcPoint {
  double hpcx = 0.0;
  double hpcy = 0.0;
};

/// Continuous image position. y grows downward.
struct PixelPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// Placement of the solar disk inside a square image.
///
/// `cdelt` is the plate scale in arcsec/pixel. The center is the pixel that
/// hpc (0,0) maps to; north is up, so hpcy is subtracted on the y axis.
struct SolarDiskGeometry {
  double hpc_center_x = 256.0;
  double hpc_center_y = 256.0;
  double cdelt = 4.0;
  double disk_radius_px = 240.0;
  int image_size = 512;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;

  /// Geometry for the same disk after the image is resampled to `new_size`
  /// square pixels (half-pixel-center mapping, as used by the resizer).
  SolarDiskGeometry rescaled(int new_size) const;
};

/// Ordered vertex list, closed implicitly. Polygons produced by this library
/// are convex, counterclockwise in (x, y), and free of consecutive
/// duplicates. One or two vertices encode a point or a segment.
struct Polygon {
  std::vector<PixelPoint> vertices;
};

/// Absolute tolerance used for boundary membership.
inline constexpr double kBoundaryTolerance = 1e-9;

PixelPoint hpc_to_pixel(const HpcPoint& p, const SolarDiskGeometry& g);
HpcPoint pixel_to_hpc(const PixelPoint& p, const SolarDiskGeometry& g);

double distance(const PixelPoint& a, const PixelPoint& b);
double point_segment_distance(const PixelPoint& p, const PixelPoint& a, const PixelPoint& b);

/// Boundary counts as inside.
bool point_in_polygon(const PixelPoint& p, const Polygon& poly);

/// 0 when `p` is inside or on the boundary, else the distance to the nearest
/// boundary point.
double min_distance_to_polygon(const PixelPoint& p, const Polygon& poly);

/// Minimum distance between two convex polygons; 0 when they touch or overlap.
double polygon_distance(const Polygon& a, const Polygon& b);

bool inside_disk(const PixelPoint& p, const SolarDiskGeometry& g);

template <typename Point>
std::vector<Point> mask_points_to_disk(std::span<const Point> points, const SolarDiskGeometry& g) {
  std::vector<Point> kept;
  kept.reserve(points.size());
  for (const auto& p : points) {
    if (inside_disk(PixelPoint{static_cast<double>(p.x), static_cast<double>(p.y)}, g)) {
      kept.push_back(p);
    }
  }
  return kept;
}

/// Monotone-chain convex hull. Collinear points are dropped, so a set of
/// collinear inputs yields its two extreme points and a single distinct
/// input yields one vertex. Empty input gives an empty polygon.
Polygon convex_hull(std::span<const PixelPoint> points);

double polygon_area(const Polygon& poly);

}  // namespace flareprox::geometry
