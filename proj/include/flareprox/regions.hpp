#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flareprox/geometry.hpp"
#include "flareprox/imageproc.hpp"

namespace flareprox::regions {

using geometry::Polygon;
using imageproc::PixelIndex;

/// Where the circular disk mask is applied. `early` filters edge pixels
/// before clustering; both stages drop final boxes that miss the disk.
enum class MaskStage { early, late };

/// Image direction that corresponds to solar west.
enum class SolarWest { right, left };

struct PipelineParams {
  int lower_threshold = 30;
  int upper_threshold = 50;
  int min_samples = 2;
  double max_dist = 10.0;
  double eastward_buffer = 5.0;
  double westward_buffer = 40.0;
  int target_size = 512;
  int scale_to = 255;

  MaskStage mask_stage = MaskStage::early;
  SolarWest solar_west = SolarWest::right;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

struct Cluster {
  int id = 0;
  std::vector<PixelIndex> points;  // sorted by (x, y)
};

struct DbscanResult {
  std::vector<Cluster> clusters;
  std::vector<PixelIndex> noise;
};

/// DBSCAN with Euclidean metric; a point is core when at least `min_samples`
/// points (itself included) lie within `eps`. Input is treated as a set and
/// scanned in (x, y) order, so cluster ids follow the smallest core point of
/// each cluster and a border point reachable from several clusters joins the
/// one discovered first.
DbscanResult dbscan(std::span<const PixelIndex> points, double eps = 10.0, int min_samples = 2);

Polygon convex_hull(const Cluster& c);

struct BufferedRegion {
  Polygon polygon;
  int source_cluster = 0;
};

/// Convex hull of every vertex together with copies shifted `west` px toward
/// solar west and `east` px toward solar east.
BufferedRegion add_buffer(const Polygon& hull, int source_cluster, double east = 5.0,
                          double west = 40.0, SolarWest solar_west = SolarWest::right);

struct MergedRegion {
  Polygon polygon;
  std::vector<int> member_clusters;  // ascending
};

/// Repeatedly replaces any two regions closer than or at `eps` with the hull
/// of their vertices until no such pair remains. Output is ordered by
/// (min_x, min_y) of each polygon.
std::vector<MergedRegion> merge_regions(std::span<const BufferedRegion> regions, double eps = 10.0);

struct Box {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool contains(const geometry::PixelPoint& p) const {
    return min_x <= p.x && p.x <= max_x && min_y <= p.y && p.y <= max_y;
  }
  friend bool operator==(const Box&, const Box&) = default;
};

struct BoundingRegion {
  Box box;
  std::vector<int> member_clusters;
};

Box bounding_box(const Polygon& poly);
std::vector<BoundingRegion> bounding_regions(std::span<const MergedRegion> merged);
bool box_intersects_disk(const Box& box, const geometry::SolarDiskGeometry& g);

/// Regions plus the counts needed to explain an empty result.
struct RegionExtraction {
  std::vector<BoundingRegion> regions;
  std::size_t edge_pixels = 0;
  std::size_t edge_pixels_on_disk = 0;
  std::size_t clusters = 0;
  std::size_t noise_pixels = 0;
  std::size_t regions_off_disk = 0;
};

/// Disk geometry expressed in the pipeline's target_size working frame.
geometry::SolarDiskGeometry working_geometry(const geometry::SolarDiskGeometry& g,
                                             const PipelineParams& params);

/// Full attribution-map-to-regions chain:
/// scale, resize, Canny, disk mask, DBSCAN, hull, buffer, merge, boxes,
/// and removal of boxes that do not touch the disk.
RegionExtraction extract_regions(const imageproc::AttributionMap& am, const PipelineParams& params,
                                 const geometry::SolarDiskGeometry& g);

/// Same chain from an already scaled and resized image.
RegionExtraction extract_regions_from_image(const imageproc::GrayscaleImage& scaled,
                                            const PipelineParams& params,
                                            const geometry::SolarDiskGeometry& working);

}  // namespace flareprox::regions
