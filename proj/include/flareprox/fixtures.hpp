#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flareprox/geometry.hpp"
#include "flareprox/imageproc.hpp"
#include "flareprox/ingest.hpp"
#include "flareprox/regions.hpp"

namespace flareprox::cli {

/// Isotropic Gaussian attribution blob, in pixels of the fixture image.
struct Blob {
  double x = 0.0;
  double y = 0.0;
  double sigma = 10.0;
  double peak = 1.0;
};

struct FixtureAr {
  int noaa_ar = 0;
  geometry::PixelPoint pixel;
};

struct FixtureFlare {
  std::string flare_class = "M1.0";
  std::optional<int> associated_ar;
  geometry::PixelPoint pixel;
};

/// One synthetic image: blobs form the attribution map, ARs and flares go to
/// the catalog at the image timestamp.
struct FixtureSpec {
  std::string image_id;
  ingest::Timestamp timestamp;
  bool predicted_flare = false;
  bool observed_flare = false;
  std::vector<Blob> blobs;
  std::vector<FixtureAr> ars;
  std::vector<FixtureFlare> flares;
  geometry::SolarDiskGeometry geometry;
};

/// Expected outcome bounds derived from blob and AR placement alone.
///
/// Each blob's region box is bracketed between an inner box (the blob center
/// stretched by the east/west buffers) and an outer box (a square of
/// half-width 2*sigma + edge_slack stretched the same way). Lower bounds on PS
/// and upper bounds on ACR hold only when no two outer boxes come within the
/// merge distance; otherwise they fall back to 0 and 1.
struct FixtureExpectation {
  std::string image_id;
  bool no_regions = false;
  bool no_ars = false;
  bool separated = true;
  double acr_min = 0.0;
  double acr_max = 1.0;
  double ps_min = 0.0;
  double ps_max = 0.0;
};

inline constexpr double kEdgeSlack = 5.0;

imageproc::AttributionMap render_blobs(const FixtureSpec& spec);

/// Throws std::invalid_argument when a blob center lies off the disk.
FixtureExpectation expected_outcome(const FixtureSpec& spec, const regions::PipelineParams& params);

/// Writes attribution/<id>.f32 (+ sidecar), geometry/<id>.json, manifest.csv,
/// catalog.csv and expectations.json under `dir`.
std::vector<FixtureExpectation> generate_fixtures(const std::filesystem::path& dir,
                                                  std::span<const FixtureSpec> specs,
                                                  const regions::PipelineParams& params);

/// Deterministic mixed suite on the default 512 px disk: colocated,
/// displaced and off-disk ARs, multi-blob maps, blank maps and AR-free rows,
/// spread over all four contingency categories.
std::vector<FixtureSpec> synthetic_suite(int count, std::uint64_t seed);

/// Reads a fixture description: {"geometry": {...}, "images": [{...}]}.
std::vector<FixtureSpec> load_fixture_specs(const std::filesystem::path& path);

}  // namespace flareprox::cli
