#pragma once

#include <chrono>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "flareprox/geometry.hpp"
#include "flareprox/ingest.hpp"
#include "flareprox/metrics.hpp"
#include "flareprox/regions.hpp"

namespace flareprox::cli {

struct RunConfig {
  std::filesystem::path manifest;
  std::filesystem::path catalog;
  std::filesystem::path out_dir;
  regions::PipelineParams params;
  geometry::SolarDiskGeometry default_geometry;
  int workers = 1;
  bool overlay = false;
  std::chrono::milliseconds match_tolerance = ingest::kDefaultMatchTolerance;
  metrics::Aggregation aggregation = metrics::Aggregation::macro;
};

/// Everything computed for one manifest row.
struct ImageResult {
  ingest::ManifestRow row;
  metrics::ImageEvaluation eval;
  regions::RegionExtraction extraction;
  ingest::CatalogMatch match;  // in the working (target_size) pixel frame
  imageproc::GrayscaleImage scaled;
};

ImageResult process_image(const ingest::ManifestRow& row, const ingest::Catalog& catalog,
                          const RunConfig& cfg);

/// Runs `process_image` over every row on `workers` threads; results come
/// back sorted by image_id. The first failure is rethrown after all workers
/// finish.
std::vector<ImageResult> process_all(const ingest::EvaluationManifest& manifest,
                                     const ingest::Catalog& catalog, const RunConfig& cfg);

std::string result_json_line(const ImageResult& r);
std::string regions_json(const regions::RegionExtraction& ex);
std::string summary_csv(std::span<const metrics::CategorySummary> rows);
std::string boxplot_csv(std::span<const metrics::ImageEvaluation> evals);

/// Parses results.jsonl back into evaluations (for `summarize`).
std::vector<metrics::ImageEvaluation> read_results_jsonl(const std::filesystem::path& path);

void write_overlay(const ImageResult& r, const RunConfig& cfg, const std::filesystem::path& path);

/// `evaluate`: writes results.jsonl, summary.csv, boxplot.csv and
/// regions/<image_id>.json (plus overlays/<image_id>.png when enabled).
/// Returns 0 on success; input or output failures propagate as exceptions.
int run_batch(const RunConfig& cfg);

/// `overlay`: renders overlays/<image_id>.png for every manifest row.
int run_overlays(const RunConfig& cfg);

/// `summarize`: recomputes summary.csv and boxplot.csv from results.jsonl.
int run_summarize(const std::filesystem::path& results, const std::filesystem::path& out_dir,
                  metrics::Aggregation aggregation);

}  // namespace flareprox::cli
