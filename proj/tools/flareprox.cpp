// Command-line driver: evaluate, overlay, fixtures, summarize.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "flareprox/batch.hpp"
#include "flareprox/fixtures.hpp"

namespace fs = std::filesystem;
using namespace flareprox;

namespace {

constexpr const char* kOutEnv = "FLAREPROX_OUT_DIR";

std::string default_out_dir() {
  const char* env = std::getenv(kOutEnv);
  return env && *env ? env : "flareprox_out";
}

// Table I parameters keep their snake_case names; kebab-case aliases are accepted.
void add_pipeline_options(CLI::App* app, regions::PipelineParams& p) {
  app->add_option("--lower_threshold,--lower-threshold", p.lower_threshold, "Canny lower intensity threshold")
      ->capture_default_str();
  app->add_option("--upper_threshold,--upper-threshold", p.upper_threshold, "Canny upper intensity threshold")
      ->capture_default_str();
  app->add_option("--min_samples,--min-samples", p.min_samples, "DBSCAN minimum samples")
      ->capture_default_str();
  app->add_option("--max_dist,--max-dist", p.max_dist, "DBSCAN / merge distance in pixels")
      ->capture_default_str();
  app->add_option("--eastward_buffer,--eastward-buffer", p.eastward_buffer, "Eastward buffer in pixels")
      ->capture_default_str();
  app->add_option("--westward_buffer,--westward-buffer", p.westward_buffer, "Westward buffer in pixels")
      ->capture_default_str();
  app->add_option("--target_size,--target-size", p.target_size, "Working image size in pixels")
      ->capture_default_str();
  app->add_option("--scale_to,--scale-to", p.scale_to, "Intensity scale ceiling")->capture_default_str();
  app->add_option("--mask-stage", p.mask_stage, "Apply the disk mask to edge pixels (early) or only to boxes (late)")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, regions::MaskStage>{{"early", regions::MaskStage::early},
                                                    {"late", regions::MaskStage::late}}));
  app->add_option("--solar-west", p.solar_west, "Image side that faces solar west")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, regions::SolarWest>{{"right", regions::SolarWest::right},
                                                    {"left", regions::SolarWest::left}}));
}

void add_geometry_options(CLI::App* app, geometry::SolarDiskGeometry& g) {
  app->add_option("--hpc-center-x", g.hpc_center_x, "Default disk center x (pixels)")->capture_default_str();
  app->add_option("--hpc-center-y", g.hpc_center_y, "Default disk center y (pixels)")->capture_default_str();
  app->add_option("--cdelt", g.cdelt, "Default plate scale (arcsec/pixel)")->capture_default_str();
  app->add_option("--disk-radius", g.disk_radius_px, "Default disk radius (pixels)")->capture_default_str();
  app->add_option("--image-size", g.image_size, "Image size the default geometry refers to")
      ->capture_default_str();
}

void add_aggregation_option(CLI::App* app, metrics::Aggregation& a) {
  app->add_option("--aggregation", a, "macro: mean over images; pooled: mean over all ARs")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, metrics::Aggregation>{{"macro", metrics::Aggregation::macro},
                                                      {"pooled", metrics::Aggregation::pooled}}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximity-based evaluation of attribution maps for full-disk flare forecasts"};
  app.require_subcommand(1);

  cli::RunConfig cfg;
  cfg.out_dir = default_out_dir();
  double tolerance_hours = 2.0;
  std::string out_dir = cfg.out_dir.string();

  auto* evaluate = app.add_subcommand("evaluate", "Run the pipeline over a manifest");
  auto* overlay = app.add_subcommand("overlay", "Render overlay images for a manifest");
  for (auto* sub : {evaluate, overlay}) {
    sub->add_option("--manifest", cfg.manifest, "Manifest CSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--catalog", cfg.catalog, "AR/flare catalog CSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, std::string("Output directory (env ") + kOutEnv + ")")
        ->capture_default_str();
    sub->add_option("--workers", cfg.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--tolerance-hours", tolerance_hours, "Catalog time-match tolerance")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    add_pipeline_options(sub, cfg.params);
    add_geometry_options(sub, cfg.default_geometry);
  }
  evaluate->add_flag("--overlay", cfg.overlay, "Also write overlay PNGs");
  add_aggregation_option(evaluate, cfg.aggregation);

  auto* fixtures = app.add_subcommand("fixtures", "Write synthetic attribution fixtures");
  std::string fixture_spec;
  int suite_size = 50;
  std::uint64_t seed = 20240101;
  fixtures->add_option("--spec", fixture_spec, "Fixture description JSON (default: generated suite)")
      ->check(CLI::ExistingFile);
  fixtures->add_option("--suite", suite_size, "Number of generated images")->capture_default_str();
  fixtures->add_option("--seed", seed, "Generator seed")->capture_default_str();
  fixtures->add_option("--out", out_dir, "Fixture directory")->capture_default_str();
  add_pipeline_options(fixtures, cfg.params);

  auto* summarize = app.add_subcommand("summarize", "Recompute summary.csv from results.jsonl");
  std::string results_path;
  summarize->add_option("--results", results_path, "results.jsonl")->required()->check(CLI::ExistingFile);
  summarize->add_option("--out", out_dir, "Output directory")->capture_default_str();
  add_aggregation_option(summarize, cfg.aggregation);

  CLI11_PARSE(app, argc, argv);
  cfg.out_dir = out_dir;
  cfg.match_tolerance = std::chrono::milliseconds(static_cast<long long>(tolerance_hours * 3600.0 * 1000.0));

  try {
    if (*evaluate || *overlay) {
      const int rc = *evaluate ? cli::run_batch(cfg) : cli::run_overlays(cfg);
      std::cout << "wrote " << cfg.out_dir.string() << "\n";
      return rc;
    }
    if (*summarize) return cli::run_summarize(results_path, cfg.out_dir, cfg.aggregation);
    if (*fixtures) {
      const auto specs = fixture_spec.empty() ? cli::synthetic_suite(suite_size, seed)
                                              : cli::load_fixture_specs(fixture_spec);
      cli::generate_fixtures(cfg.out_dir, specs, cfg.params);
      std::cout << "wrote " << specs.size() << " fixture image(s) to " << cfg.out_dir.string() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
