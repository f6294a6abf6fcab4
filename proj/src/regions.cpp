#include "flareprox/regions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace flareprox::regions {

namespace {

using geometry::PixelPoint;

std::int64_t cell_key(std::int64_t cx, std::int64_t cy) { return (cx << 32) ^ (cy & 0xffffffff); }

// Uniform grid with cell side eps for fixed-radius neighbor queries.
class NeighborGrid {
 public:
  NeighborGrid(std::span<const PixelIndex> points, double eps) : points_(points), eps_(eps) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      cells_[cell_key(cell(points[i].x), cell(points[i].y))].push_back(i);
    }
  }

  std::vector<std::size_t> within(std::size_t i) const {
    std::vector<std::size_t> out;
    const auto& p = points_[i];
    const double eps2 = eps_ * eps_;
    const std::int64_t cx = cell(p.x);
    const std::int64_t cy = cell(p.y);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = cells_.find(cell_key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (const std::size_t j : it->second) {
          const double ddx = points_[j].x - p.x;
          const double ddy = points_[j].y - p.y;
          if (ddx * ddx + ddy * ddy <= eps2) out.push_back(j);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::int64_t cell(int v) const { return static_cast<std::int64_t>(std::floor(v / eps_)); }

  std::span<const PixelIndex> points_;
  double eps_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> cells_;
};

bool region_order(const MergedRegion& a, const MergedRegion& b) {
  const Box ba = bounding_box(a.polygon);
  const Box bb = bounding_box(b.polygon);
  if (ba.min_x != bb.min_x) return ba.min_x < bb.min_x;
  if (ba.min_y != bb.min_y) return ba.min_y < bb.min_y;
  return a.member_clusters < b.member_clusters;
}

}  // namespace

void PipelineParams::validate() const {
  auto fail = [](const char* what) {
    throw std::invalid_argument(std::string("invalid pipeline parameters: ") + what);
  };
  if (lower_threshold < 0 || upper_threshold > 255 || lower_threshold > upper_threshold) {
    fail("thresholds must satisfy 0 <= lower_threshold <= upper_threshold <= 255");
  }
  if (min_samples < 1) fail("min_samples must be >= 1");
  if (!(max_dist > 0.0)) fail("max_dist must be > 0");
  if (!(eastward_buffer >= 0.0) || !(westward_buffer >= 0.0)) fail("buffers must be >= 0");
  if (target_size < 1) fail("target_size must be >= 1");
  if (scale_to < 1 || scale_to > 255) fail("scale_to must be in [1, 255]");
}

DbscanResult dbscan(std::span<const PixelIndex> input, double eps, int min_samples) {
  if (!(eps > 0.0)) throw std::invalid_argument("dbscan eps must be > 0");
  if (min_samples < 1) throw std::invalid_argument("dbscan min_samples must be >= 1");

  std::vector<PixelIndex> points(input.begin(), input.end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  const NeighborGrid grid(points, eps);
  std::vector<std::vector<std::size_t>> neighbors(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) neighbors[i] = grid.within(i);
  auto is_core = [&](std::size_t i) {
    return neighbors[i].size() >= static_cast<std::size_t>(min_samples);
  };

  constexpr int kUnlabeled = -1;
  std::vector<int> label(points.size(), kUnlabeled);
  int next_id = 0;
  for (std::size_t seed = 0; seed < points.size(); ++seed) {
    if (label[seed] != kUnlabeled || !is_core(seed)) continue;
    const int id = next_id++;
    label[seed] = id;
    std::deque<std::size_t> frontier{seed};
    while (!frontier.empty()) {
      const std::size_t i = frontier.front();
      frontier.pop_front();
      for (const std::size_t j : neighbors[i]) {
        if (label[j] != kUnlabeled) continue;
        label[j] = id;
        if (is_core(j)) frontier.push_back(j);
      }
    }
  }

  DbscanResult result;
  result.clusters.resize(static_cast<std::size_t>(next_id));
  for (int id = 0; id < next_id; ++id) result.clusters[id].id = id;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (label[i] == kUnlabeled) {
      result.noise.push_back(points[i]);
    } else {
      result.clusters[label[i]].points.push_back(points[i]);
    }
  }
  return result;
}

Polygon convex_hull(const Cluster& c) {
  std::vector<PixelPoint> pts;
  pts.reserve(c.points.size());
  for (const auto& p : c.points) pts.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
  return geometry::convex_hull(pts);
}

BufferedRegion add_buffer(const Polygon& hull, int source_cluster, double east, double west,
                          SolarWest solar_west) {
  if (!(east >= 0.0) || !(west >= 0.0)) throw std::invalid_argument("buffers must be >= 0");
  const double sign = solar_west == SolarWest::right ? 1.0 : -1.0;
  std::vector<PixelPoint> pts;
  pts.reserve(hull.vertices.size() * 3);
  for (const auto& v : hull.vertices) {
    pts.push_back(v);
    pts.push_back({v.x + sign * west, v.y});
    pts.push_back({v.x - sign * east, v.y});
  }
  return {geometry::convex_hull(pts), source_cluster};
}

std::vector<MergedRegion> merge_regions(std::span<const BufferedRegion> regions, double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("merge eps must be >= 0");
  std::vector<MergedRegion> out;
  out.reserve(regions.size());
  for (const auto& r : regions) out.push_back({r.polygon, {r.source_cluster}});
  std::sort(out.begin(), out.end(), region_order);

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t j = i + 1; j < out.size();) {
        if (geometry::polygon_distance(out[i].polygon, out[j].polygon) > eps) {
          ++j;
          continue;
        }
        std::vector<PixelPoint> pts = out[i].polygon.vertices;
        pts.insert(pts.end(), out[j].polygon.vertices.begin(), out[j].polygon.vertices.end());
        out[i].polygon = geometry::convex_hull(pts);
        auto& members = out[i].member_clusters;
        members.insert(members.end(), out[j].member_clusters.begin(), out[j].member_clusters.end());
        std::sort(members.begin(), members.end());
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(j));
        changed = true;
        j = i + 1;
      }
    }
  }
  std::sort(out.begin(), out.end(), region_order);
  return out;
}

Box bounding_box(const Polygon& poly) {
  if (poly.vertices.empty()) throw std::invalid_argument("bounding box of an empty polygon");
  Box b{poly.vertices[0].x, poly.vertices[0].y, poly.vertices[0].x, poly.vertices[0].y};
  for (const auto& v : poly.vertices) {
    b.min_x = std::min(b.min_x, v.x);
    b.min_y = std::min(b.min_y, v.y);
    b.max_x = std::max(b.max_x, v.x);
    b.max_y = std::max(b.max_y, v.y);
  }
  return b;
}

std::vector<BoundingRegion> bounding_regions(std::span<const MergedRegion> merged) {
  std::vector<BoundingRegion> out;
  out.reserve(merged.size());
  for (const auto& m : merged) out.push_back({bounding_box(m.polygon), m.member_clusters});
  return out;
}

bool box_intersects_disk(const Box& box, const geometry::SolarDiskGeometry& g) {
  const PixelPoint nearest{std::clamp(g.hpc_center_x, box.min_x, box.max_x),
                           std::clamp(g.hpc_center_y, box.min_y, box.max_y)};
  return geometry::inside_disk(nearest, g);
}

geometry::SolarDiskGeometry working_geometry(const geometry::SolarDiskGeometry& g,
                                             const PipelineParams& params) {
  return g.rescaled(params.target_size);
}

RegionExtraction extract_regions(const imageproc::AttributionMap& am, const PipelineParams& params,
                                 const geometry::SolarDiskGeometry& g) {
  params.validate();
  g.validate();
  const auto scaled = imageproc::resize(imageproc::normalize_scale(am, params.scale_to),
                                        params.target_size);
  return extract_regions_from_image(scaled, params, working_geometry(g, params));
}

RegionExtraction extract_regions_from_image(const imageproc::GrayscaleImage& scaled,
                                            const PipelineParams& params,
                                            const geometry::SolarDiskGeometry& working) {
  RegionExtraction ex;
  imageproc::CannyParams canny_params;
  canny_params.low = params.lower_threshold;
  canny_params.high = params.upper_threshold;
  auto edges = imageproc::canny(scaled, canny_params);
  ex.edge_pixels = edges.size();
  if (params.mask_stage == MaskStage::early) {
    edges = geometry::mask_points_to_disk<PixelIndex>(edges, working);
  }
  ex.edge_pixels_on_disk = edges.size();

  const auto clustered = dbscan(edges, params.max_dist, params.min_samples);
  ex.clusters = clustered.clusters.size();
  ex.noise_pixels = clustered.noise.size();

  std::vector<BufferedRegion> buffered;
  buffered.reserve(clustered.clusters.size());
  for (const auto& c : clustered.clusters) {
    buffered.push_back(add_buffer(convex_hull(c), c.id, params.eastward_buffer,
                                  params.westward_buffer, params.solar_west));
  }
  const auto merged = merge_regions(buffered, params.max_dist);
  for (auto& r : bounding_regions(merged)) {
    if (box_intersects_disk(r.box, working)) {
      ex.regions.push_back(std::move(r));
    } else {
      ++ex.regions_off_disk;
    }
  }
  return ex;
}

}  // namespace flareprox::regions
