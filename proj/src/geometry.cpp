#include "flareprox/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace flareprox::geometry {

namespace {

double cross(const PixelPoint& o, const PixelPoint& a, const PixelPoint& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int orientation(const PixelPoint& o, const PixelPoint& a, const PixelPoint& b) {
  const double c = cross(o, a, b);
  return (c > 0.0) - (c < 0.0);
}

bool on_segment_box(const PixelPoint& p, const PixelPoint& a, const PixelPoint& b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(const PixelPoint& a, const PixelPoint& b, const PixelPoint& c,
                        const PixelPoint& d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment_box(c, a, b)) return true;
  if (o2 == 0 && on_segment_box(d, a, b)) return true;
  if (o3 == 0 && on_segment_box(a, c, d)) return true;
  if (o4 == 0 && on_segment_box(b, c, d)) return true;
  return false;
}

double segment_segment_distance(const PixelPoint& a, const PixelPoint& b, const PixelPoint& c,
                                const PixelPoint& d) {
  if (segments_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

// Calls fn(a, b) for each boundary edge; a lone vertex is a zero-length edge.
template <typename Fn>
void for_each_edge(const Polygon& poly, Fn&& fn) {
  const auto& v = poly.vertices;
  if (v.size() == 1) {
    fn(v[0], v[0]);
    return;
  }
  if (v.size() == 2) {
    fn(v[0], v[1]);
    return;
  }
  for (std::size_t i = 0; i < v.size(); ++i) fn(v[i], v[(i + 1) % v.size()]);
}

double boundary_distance(const PixelPoint& p, const Polygon& poly) {
  double best = std::numeric_limits<double>::infinity();
  for_each_edge(poly, [&](const PixelPoint& a, const PixelPoint& b) {
    best = std::min(best, point_segment_distance(p, a, b));
  });
  return best;
}

// Even-odd crossing test; boundary handling is left to the caller.
bool crossing_inside(const PixelPoint& p, const std::vector<PixelPoint>& v) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double x_at = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside;
}

}  // namespace

void SolarDiskGeometry::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("invalid solar disk geometry: " + what);
  };
  if (!std::isfinite(cdelt) || cdelt <= 0.0) fail("cdelt must be > 0");
  if (image_size < 1) fail("image_size must be >= 1");
  if (!std::isfinite(disk_radius_px) || disk_radius_px <= 0.0) fail("disk_radius_px must be > 0");
  if (disk_radius_px > image_size / 2.0) fail("disk_radius_px exceeds image_size/2");
  if (!(hpc_center_x >= 0.0 && hpc_center_x < image_size)) fail("hpc_center_x outside image");
  if (!(hpc_center_y >= 0.0 && hpc_center_y < image_size)) fail("hpc_center_y outside image");
}

SolarDiskGeometry SolarDiskGeometry::rescaled(int new_size) const {
  if (new_size == image_size) return *this;
  const double s = static_cast<double>(new_size) / image_size;
  SolarDiskGeometry out = *this;
  out.hpc_center_x = (hpc_center_x + 0.5) * s - 0.5;
  out.hpc_center_y = (hpc_center_y + 0.5) * s - 0.5;
  out.disk_radius_px = disk_radius_px * s;
  out.cdelt = cdelt / s;
  out.image_size = new_size;
  return out;
}

PixelPoint hpc_to_pixel(const HpcPoint& p, const SolarDiskGeometry& g) {
  return {g.hpc_center_x + p.hpcx / g.cdelt, g.hpc_center_y - p.hpcy / g.cdelt};
}

HpcPoint pixel_to_hpc(const PixelPoint& p, const SolarDiskGeometry& g) {
  return {(p.x - g.hpc_center_x) * g.cdelt, (g.hpc_center_y - p.y) * g.cdelt};
}

double distance(const PixelPoint& a, const PixelPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double point_segment_distance(const PixelPoint& p, const PixelPoint& a, const PixelPoint& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return distance(p, PixelPoint{a.x + t * dx, a.y + t * dy});
}

bool point_in_polygon(const PixelPoint& p, const Polygon& poly) {
  if (poly.vertices.empty()) return false;
  if (boundary_distance(p, poly) <= kBoundaryTolerance) return true;
  if (poly.vertices.size() < 3) return false;
  return crossing_inside(p, poly.vertices);
}

double min_distance_to_polygon(const PixelPoint& p, const Polygon& poly) {
  if (poly.vertices.empty()) return std::numeric_limits<double>::infinity();
  if (point_in_polygon(p, poly)) return 0.0;
  return boundary_distance(p, poly);
}

double polygon_distance(const Polygon& a, const Polygon& b) {
  if (a.vertices.empty() || b.vertices.empty()) return std::numeric_limits<double>::infinity();
  if (point_in_polygon(a.vertices.front(), b) || point_in_polygon(b.vertices.front(), a)) {
    return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for_each_edge(a, [&](const PixelPoint& p, const PixelPoint& q) {
    for_each_edge(b, [&](const PixelPoint& r, const PixelPoint& s) {
      best = std::min(best, segment_segment_distance(p, q, r, s));
    });
  });
  return best;
}

bool inside_disk(const PixelPoint& p, const SolarDiskGeometry& g) {
  const double dx = p.x - g.hpc_center_x;
  const double dy = p.y - g.hpc_center_y;
  return dx * dx + dy * dy <= g.disk_radius_px * g.disk_radius_px;
}

Polygon convex_hull(std::span<const PixelPoint> points) {
  std::vector<PixelPoint> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const PixelPoint& a, const PixelPoint& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return Polygon{pts};

  std::vector<PixelPoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return Polygon{std::move(hull)};
}

double polygon_area(const Polygon& poly) {
  const auto& v = poly.vertices;
  if (v.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % v.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::abs(twice) / 2.0;
}

}  // namespace flareprox::geometry
