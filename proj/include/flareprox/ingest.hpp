#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "flareprox/geometry.hpp"
#include "flareprox/imageproc.hpp"

namespace flareprox::ingest {

namespace fs = std::filesystem;

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// Raised for unreadable or invalid inputs. The message names the file and,
/// for tabular inputs, every rejected row with its reason.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Accepts `YYYY-MM-DDTHH:MM:SS[.fff][Z]`; a space may replace the `T`.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

struct ManifestRow {
  std::string image_id;
  fs::path attribution_path;
  std::optional<fs::path> geometry_path;
  std::optional<fs::path> magnetogram_path;
  Timestamp timestamp;
  bool predicted_flare = false;
  bool observed_flare = false;
};

struct EvaluationManifest {
  std::vector<ManifestRow> rows;
};

/// CSV with header
/// `image_id,attribution_path,geometry_path,timestamp,predicted_flare,observed_flare`
/// and an optional `magnetogram_path` column. Relative paths resolve against
/// the manifest's directory; empty geometry/magnetogram cells mean "absent".
EvaluationManifest load_manifest(const fs::path& path);

/// Grayscale PGM (P2/P5, 8 or 16 bit), grayscale PNG (1-16 bit), or raw
/// little-endian float32 (`.f32`, `.raw`, `.bin`) with a JSON sidecar giving
/// width and height. The sidecar defaults to `<path>.json`.
imageproc::AttributionMap load_attribution(const fs::path& path,
                                           const std::optional<fs::path>& sidecar = std::nullopt);

/// Writes raw float32 plus its `<path>.json` sidecar.
void save_raw_f32(const fs::path& path, const imageproc::AttributionMap& am);

/// JSON object with hpc_center_x, hpc_center_y, cdelt, disk_radius_px, image_size.
geometry::SolarDiskGeometry load_geometry(const fs::path& path);
void save_geometry(const fs::path& path, const geometry::SolarDiskGeometry& g);

struct FlareClass {
  char letter = 'A';
  double strength = 1.0;

  /// Throws IngestError unless the text looks like `M2.3` with a class
  /// letter in ABCMX and strength in [1.0, 9.9].
  static FlareClass parse(std::string_view text);
  std::string str() const;
};

struct ActiveRegionRecord {
  int noaa_ar = 0;
  geometry::HpcPoint location;
  Timestamp timestamp;
};

struct FlareRecord {
  FlareClass flare_class;
  geometry::HpcPoint location;
  std::optional<int> associated_ar;
  Timestamp peak_time;
};

struct Catalog {
  std::vector<ActiveRegionRecord> active_regions;
  std::vector<FlareRecord> flares;
};

/// CSV with header `kind,timestamp,hpcx_arcsec,hpcy_arcsec,noaa_ar,flare_class`.
/// kind is AR or FL; flare_class is required for FL rows and ignored for AR.
Catalog load_catalog(const fs::path& path);

struct MatchedAr {
  ActiveRegionRecord record;
  geometry::PixelPoint pixel;
  bool off_disk = false;
};

struct MatchedFlare {
  FlareRecord record;
  geometry::PixelPoint pixel;
  bool off_disk = false;
};

struct CatalogMatch {
  std::vector<MatchedAr> active_regions;
  std::vector<MatchedFlare> flares;
};

inline constexpr std::chrono::milliseconds kDefaultMatchTolerance = std::chrono::hours(2);

/// Records within `tolerance` of `t` (inclusive), converted into the pixel
/// frame of `g`. ARs that land outside the disk are kept but marked.
CatalogMatch match_catalog(const Catalog& catalog, Timestamp t, std::chrono::milliseconds tolerance,
                           const geometry::SolarDiskGeometry& g);

/// Splits one CSV record; double quotes group fields and `""` escapes a quote.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace flareprox::ingest
