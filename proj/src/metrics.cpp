#include "flareprox/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace flareprox::metrics {

ContingencyCategory categorize(bool predicted_flare, bool observed_flare) {
  if (predicted_flare) return observed_flare ? ContingencyCategory::TP : ContingencyCategory::FP;
  return observed_flare ? ContingencyCategory::FN : ContingencyCategory::TN;
}

std::string_view to_string(ContingencyCategory c) {
  switch (c) {
    case ContingencyCategory::TP:
      return "TP";
    case ContingencyCategory::FP:
      return "FP";
    case ContingencyCategory::TN:
      return "TN";
    case ContingencyCategory::FN:
      return "FN";
  }
  return "?";
}

std::optional<ContingencyCategory> parse_category(std::string_view s) {
  for (auto c : {ContingencyCategory::TP, ContingencyCategory::FP, ContingencyCategory::TN,
                 ContingencyCategory::FN}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

double box_distance(const PixelPoint& p, const regions::Box& box) {
  const double dx = std::max({box.min_x - p.x, 0.0, p.x - box.max_x});
  const double dy = std::max({box.min_y - p.y, 0.0, p.y - box.max_y});
  return std::hypot(dx, dy);
}

bool inside_any(const PixelPoint& ar, std::span<const BoundingRegion> regions) {
  return std::any_of(regions.begin(), regions.end(),
                     [&](const BoundingRegion& r) { return r.box.contains(ar); });
}

std::optional<double> per_ar_distance(const PixelPoint& ar,
                                      std::span<const BoundingRegion> regions) {
  if (regions.empty()) return std::nullopt;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : regions) best = std::min(best, box_distance(ar, r.box));
  return best;
}

std::optional<double> proximity_score(std::span<const PixelPoint> ars,
                                      std::span<const BoundingRegion> regions) {
  if (ars.empty() || regions.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& ar : ars) sum += *per_ar_distance(ar, regions);
  return sum / static_cast<double>(ars.size());
}

std::optional<double> attribution_colocation_ratio(std::span<const PixelPoint> ars,
                                                   std::span<const BoundingRegion> regions) {
  if (ars.empty()) return std::nullopt;
  const auto inside = std::count_if(ars.begin(), ars.end(),
                                    [&](const PixelPoint& ar) { return inside_any(ar, regions); });
  return static_cast<double>(inside) / static_cast<double>(ars.size());
}

ImageEvaluation evaluate_image(std::string image_id, ContingencyCategory category,
                               std::span<const ArInput> on_disk_ars,
                               std::span<const BoundingRegion> regions) {
  ImageEvaluation ev;
  ev.image_id = std::move(image_id);
  ev.category = category;
  ev.region_count = regions.size();
  ev.no_ars = on_disk_ars.empty();
  ev.no_regions = regions.empty();
  if (ev.flagged()) return ev;

  std::vector<PixelPoint> points;
  points.reserve(on_disk_ars.size());
  for (const auto& ar : on_disk_ars) {
    points.push_back(ar.location);
    ev.per_ar_distances.push_back(
        {ar.noaa_ar, *per_ar_distance(ar.location, regions), inside_any(ar.location, regions)});
  }
  ev.ps = proximity_score(points, regions);
  ev.acr = attribution_colocation_ratio(points, regions);
  return ev;
}

std::optional<MeanStd> mean_std(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return MeanStd{mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

namespace {

CategorySummary summarize_group(std::string name, std::span<const ImageEvaluation* const> group,
                                Aggregation aggregation) {
  CategorySummary row;
  row.category = std::move(name);
  std::vector<double> ps;
  std::vector<double> acr;
  for (const auto* ev : group) {
    if (ev->no_regions) ++row.n_no_regions;
    if (ev->no_ars) ++row.n_no_ars;
    if (ev->flagged()) continue;
    if (aggregation == Aggregation::macro) {
      ps.push_back(*ev->ps);
      acr.push_back(*ev->acr);
    } else {
      for (const auto& d : ev->per_ar_distances) {
        ps.push_back(d.d_min);
        acr.push_back(d.inside ? 1.0 : 0.0);
      }
    }
  }
  row.n = ps.size();
  if (const auto s = mean_std(ps)) {
    row.mean_ps = s->mean;
    row.std_ps = s->stddev;
  }
  if (const auto s = mean_std(acr)) {
    row.mean_acr = s->mean;
    row.std_acr = s->stddev;
  }
  return row;
}

}  // namespace

std::vector<CategorySummary> summarize(std::span<const ImageEvaluation> evals,
                                       Aggregation aggregation) {
  constexpr std::array kOrder{ContingencyCategory::FN, ContingencyCategory::FP,
                              ContingencyCategory::TN, ContingencyCategory::TP};
  std::vector<CategorySummary> rows;
  std::vector<const ImageEvaluation*> all;
  for (const auto& ev : evals) all.push_back(&ev);
  for (const auto c : kOrder) {
    std::vector<const ImageEvaluation*> group;
    for (const auto* ev : all) {
      if (ev->category == c) group.push_back(ev);
    }
    rows.push_back(summarize_group(std::string(to_string(c)), group, aggregation));
  }
  rows.push_back(summarize_group("overall", all, aggregation));
  return rows;
}

}  // namespace flareprox::metrics
