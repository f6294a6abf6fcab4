#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flareprox/geometry.hpp"
#include "flareprox/regions.hpp"

namespace flareprox::metrics {

using geometry::PixelPoint;
using regions::BoundingRegion;

enum class ContingencyCategory { TP, FP, TN, FN };

ContingencyCategory categorize(bool predicted_flare, bool observed_flare);
std::string_view to_string(ContingencyCategory c);
std::optional<ContingencyCategory> parse_category(std::string_view s);

/// Distance from `p` to the box; 0 inside or on the boundary.
double box_distance(const PixelPoint& p, const regions::Box& box);

bool inside_any(const PixelPoint& ar, std::span<const BoundingRegion> regions);

/// Minimum distance from an AR to the closest bounding region, 0 if it lies
/// inside one. nullopt when there are no regions.
std::optional<double> per_ar_distance(const PixelPoint& ar, std::span<const BoundingRegion> regions);

/// Mean of per-AR minimum distances. nullopt without ARs or without regions.
std::optional<double> proximity_score(std::span<const PixelPoint> ars,
                                      std::span<const BoundingRegion> regions);

/// Fraction of ARs inside some bounding region, in [0, 1]. nullopt without ARs.
std::optional<double> attribution_colocation_ratio(std::span<const PixelPoint> ars,
                                                   std::span<const BoundingRegion> regions);

inline double as_percent(double acr) { return acr * 100.0; }

struct ArInput {
  int noaa_ar = 0;
  PixelPoint location;
};

struct ArDistance {
  int noaa_ar = 0;
  double d_min = 0.0;
  bool inside = false;
};

/// Metric outcome for one image. `ps` and `acr` are absent exactly when a
/// flag is raised; flagged images stay out of every mean.
struct ImageEvaluation {
  std::string image_id;
  ContingencyCategory category = ContingencyCategory::TN;
  std::optional<double> ps;
  std::optional<double> acr;
  bool no_regions = false;
  bool no_ars = false;
  std::vector<ArDistance> per_ar_distances;
  std::size_t region_count = 0;

  bool flagged() const { return no_regions || no_ars; }
};

ImageEvaluation evaluate_image(std::string image_id, ContingencyCategory category,
                               std::span<const ArInput> on_disk_ars,
                               std::span<const BoundingRegion> regions);

/// Per-image means (macro) or means over every AR of every image (pooled).
enum class Aggregation { macro, pooled };

struct CategorySummary {
  std::string category;  // "TP", "FP", "TN", "FN" or "overall"
  std::optional<double> mean_ps;
  std::optional<double> std_ps;
  std::optional<double> mean_acr;
  std::optional<double> std_acr;
  std::size_t n = 0;  // contributing images (macro) or ARs (pooled)
  std::size_t n_no_regions = 0;
  std::size_t n_no_ars = 0;
};

/// Arithmetic mean and population standard deviation.
struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};
std::optional<MeanStd> mean_std(std::span<const double> values);

/// Rows for FN, FP, TN, TP (always present) followed by an "overall" row.
std::vector<CategorySummary> summarize(std::span<const ImageEvaluation> evals,
                                       Aggregation aggregation = Aggregation::macro);

}  // namespace flareprox::metrics
