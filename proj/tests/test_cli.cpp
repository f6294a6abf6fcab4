#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "flareprox/batch.hpp"
#include "flareprox/fixtures.hpp"
#include "flareprox/overlay.hpp"

using namespace flareprox;
using namespace flareprox::cli;
using json = nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("flareprox_cli_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_color(const RgbImage& img, const Rgb& c) {
  std::size_t n = 0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) n += img.at(x, y) == c ? 1 : 0;
  }
  return n;
}

FixtureSpec single(const std::string& id, std::vector<Blob> blobs, std::vector<FixtureAr> ars, bool pred = true,
                   bool obs = true, int hour = 0) {
  FixtureSpec s;
  s.image_id = id;
  s.timestamp = ingest::parse_timestamp("2021-01-01T00:00:00Z") + std::chrono::hours(hour);
  s.predicted_flare = pred;
  s.observed_flare = obs;
  s.blobs = std::move(blobs);
  s.ars = std::move(ars);
  return s;
}

RunConfig config_for(const std::filesystem::path& fixtures, const std::filesystem::path& out, int workers = 1) {
  RunConfig cfg;
  cfg.manifest = fixtures / "manifest.csv";
  cfg.catalog = fixtures / "catalog.csv";
  cfg.out_dir = out;
  cfg.workers = workers;
  return cfg;
}

}  // namespace

TEST_CASE("blend averages with half-up rounding") {
  const imageproc::GrayscaleImage black(4, 4, 0);
  const imageproc::GrayscaleImage white(4, 4, 255);
  const auto b = blend(black, white);
  CHECK(std::all_of(b.values.begin(), b.values.end(), [](auto v) { return v == 128; }));

  imageproc::GrayscaleImage ramp(16, 16);
  for (std::size_t i = 0; i < ramp.values.size(); ++i) ramp.values[i] = static_cast<std::uint8_t>(i);
  CHECK(blend(ramp, ramp).values == ramp.values);
  CHECK_THROWS_AS(blend(ramp, black), std::invalid_argument);
}

TEST_CASE("render_overlay draws one box and one inside marker") {
  const imageproc::GrayscaleImage base(64, 64, 0);
  const std::vector<regions::BoundingRegion> regs{{{10, 10, 40, 30}, {0}}};
  const std::vector<geometry::PixelPoint> ars{{20, 20}};
  const auto img = render_overlay(base, base, regs, ars, {});
  // Box outline perimeter in pixels: 2*31 + 2*21 - 4.
  CHECK(count_color(img, kBoxColor) == 100);
  CHECK(count_color(img, kArInsideColor) == kMarkerSize * kMarkerSize);
  CHECK(count_color(img, kArOutsideColor) == 0);
  CHECK(count_color(img, kFlareColor) == 0);

  const std::vector<geometry::PixelPoint> outside{{55, 55}};
  const std::vector<geometry::PixelPoint> flares{{5, 50}};
  const auto img2 = render_overlay(base, base, regs, outside, flares);
  CHECK(count_color(img2, kArOutsideColor) == kMarkerSize * kMarkerSize);
  CHECK(count_color(img2, kFlareColor) == 2 * kMarkerSize - 1);

  // Markers near the image edge are clipped rather than rejected.
  const std::vector<geometry::PixelPoint> corner{{0, 0}};
  CHECK(count_color(render_overlay(base, base, {}, corner, {}), kArOutsideColor) == 9);
}

TEST_CASE("write_png produces a readable file") {
  const auto dir = scratch("png");
  RgbImage img(3, 2);
  img.set(1, 1, kBoxColor);
  write_png(dir / "o.png", img);
  const auto bytes = slurp(dir / "o.png");
  REQUIRE(bytes.size() > 8);
  CHECK(bytes.substr(1, 3) == "PNG");
}

TEST_CASE("fixture expectations follow the blob placement") {
  const regions::PipelineParams params;
  auto e = expected_outcome(single("a", {{300, 260, 10, 1}}, {{1, {300, 260}}}), params);
  CHECK(e.acr_min == 1.0);
  CHECK(e.ps_max == 0.0);
  CHECK(e.ps_min == 0.0);

  e = expected_outcome(single("b", {{200, 256, 5, 1}}, {{1, {300, 256}}}), params);
  CHECK(e.acr_max == 0.0);
  CHECK(e.ps_max == doctest::Approx(60.0));
  CHECK(e.ps_min == doctest::Approx(100.0 - (2 * 5 + kEdgeSlack + params.westward_buffer)));

  e = expected_outcome(single("c", {}, {{1, {300, 256}}}), params);
  CHECK(e.no_regions);
  e = expected_outcome(single("d", {{300, 260, 10, 1}}, {}), params);
  CHECK(e.no_ars);
  CHECK_THROWS_AS(expected_outcome(single("e", {{10, 10, 5, 1}}, {}), params), std::invalid_argument);

  // Blobs whose outer boxes nearly touch lose the lower bound.
  e = expected_outcome(single("f", {{200, 256, 5, 1}, {200, 290, 5, 1}}, {{1, {400, 256}}}), params);
  CHECK_FALSE(e.separated);
  CHECK(e.ps_min == 0.0);
  CHECK(e.acr_max == 1.0);
}

TEST_CASE("synthetic suite is deterministic and on disk") {
  const auto a = synthetic_suite(50, 7);
  const auto b = synthetic_suite(50, 7);
  REQUIRE(a.size() == 50);
  const regions::PipelineParams params;
  int categories[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].image_id == b[i].image_id);
    CHECK(a[i].blobs.size() == b[i].blobs.size());
    CHECK_NOTHROW(expected_outcome(a[i], params));
    categories[static_cast<int>(metrics::categorize(a[i].predicted_flare, a[i].observed_flare))]++;
  }
  for (const int n : categories) CHECK(n > 0);
}

TEST_CASE("run_batch over three fixtures") {
  const auto dir = scratch("batch3");
  const std::vector<FixtureSpec> specs{single("colocated", {{300, 260, 10, 1}}, {{101, {300, 260}}}, true, true),
                                       single("displaced", {{200, 256, 5, 1}}, {{102, {300, 256}}}, true, false, 6),
                                       single("blank", {}, {{103, {300, 256}}}, false, false, 12)};
  const auto expectations = generate_fixtures(dir / "fx", specs, {});
  REQUIRE(expectations.size() == 3);
  CHECK(std::filesystem::exists(dir / "fx" / "expectations.json"));

  auto cfg = config_for(dir / "fx", dir / "out");
  cfg.overlay = true;
  CHECK(run_batch(cfg) == 0);

  std::vector<json> lines;
  std::istringstream results(slurp(dir / "out" / "results.jsonl"));
  for (std::string line; std::getline(results, line);) lines.push_back(json::parse(line));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0]["image_id"] == "blank");
  CHECK(lines[0]["flags"] == json::array({"no_regions"}));
  CHECK(lines[0]["ps"].is_null());
  CHECK(lines[1]["image_id"] == "colocated");
  CHECK(lines[1]["ps"] == 0.0);
  CHECK(lines[1]["acr"] == 1.0);
  CHECK(lines[1]["per_ar_distances"].size() == 1);
  CHECK(lines[2]["acr"] == 0.0);
  const double ps = lines[2]["ps"];
  CHECK(ps >= expectations[1].ps_min);
  CHECK(ps <= expectations[1].ps_max);

  const auto summary = slurp(dir / "out" / "summary.csv");
  CHECK(summary.rfind("category,mean_ps,std_ps,mean_acr,std_acr,n,n_no_regions,n_no_ars\n", 0) == 0);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 6);
  CHECK(std::filesystem::exists(dir / "out" / "regions" / "colocated.json"));
  CHECK(std::filesystem::exists(dir / "out" / "overlays" / "displaced.png"));
  CHECK(std::filesystem::exists(dir / "out" / "boxplot.csv"));

  const auto regions = json::parse(slurp(dir / "out" / "regions" / "colocated.json"));
  REQUIRE(regions.size() == 1);
  CHECK(regions[0]["box"].size() == 4);
}

TEST_CASE("run_batch with an empty manifest") {
  const auto dir = scratch("empty");
  generate_fixtures(dir / "fx", std::vector<FixtureSpec>{}, {});
  CHECK(run_batch(config_for(dir / "fx", dir / "out")) == 0);
  CHECK(slurp(dir / "out" / "results.jsonl").empty());
  const auto summary = slurp(dir / "out" / "summary.csv");
  CHECK(summary.find("TP,,,,,0,0,0") != std::string::npos);
  CHECK(summary.find("overall,,,,,0,0,0") != std::string::npos);
}

TEST_CASE("batch output does not depend on worker count and summaries can be recomputed") {
  const auto dir = scratch("workers");
  const auto specs = synthetic_suite(12, 99);
  generate_fixtures(dir / "fx", specs, {});
  REQUIRE(run_batch(config_for(dir / "fx", dir / "one", 1)) == 0);
  REQUIRE(run_batch(config_for(dir / "fx", dir / "four", 4)) == 0);
  CHECK(slurp(dir / "one" / "results.jsonl") == slurp(dir / "four" / "results.jsonl"));
  CHECK(slurp(dir / "one" / "summary.csv") == slurp(dir / "four" / "summary.csv"));

  REQUIRE(run_summarize(dir / "one" / "results.jsonl", dir / "re", metrics::Aggregation::macro) == 0);
  CHECK(slurp(dir / "re" / "summary.csv") == slurp(dir / "one" / "summary.csv"));
  CHECK(slurp(dir / "re" / "boxplot.csv") == slurp(dir / "one" / "boxplot.csv"));

  const auto evals = read_results_jsonl(dir / "one" / "results.jsonl");
  CHECK(evals.size() == 12);
}

TEST_CASE("run_batch reports bad inputs") {
  const auto dir = scratch("bad");
  generate_fixtures(dir / "fx", std::vector<FixtureSpec>{single("x", {{300, 260, 10, 1}}, {{1, {300, 260}}})}, {});
  std::filesystem::remove(dir / "fx" / "attribution" / "x.f32");
  CHECK_THROWS(run_batch(config_for(dir / "fx", dir / "out")));
}

TEST_CASE("fixture specs load from JSON") {
  const auto dir = scratch("spec");
  std::ofstream(dir / "spec.json") << R"({
    "geometry": {"cdelt": 4.0},
    "images": [
      {"image_id": "one", "timestamp": "2022-01-01T00:00:00Z", "predicted_flare": true,
       "blobs": [{"x": 300, "y": 260, "sigma": 8}],
       "ars": [{"noaa_ar": 12000, "x": 300, "y": 260}],
       "flares": [{"class": "X1.2", "noaa_ar": 12000, "x": 301, "y": 259}]}
    ]})";
  const auto specs = load_fixture_specs(dir / "spec.json");
  REQUIRE(specs.size() == 1);
  CHECK(specs[0].predicted_flare);
  CHECK_FALSE(specs[0].observed_flare);
  CHECK(specs[0].blobs[0].sigma == 8);
  CHECK(specs[0].flares[0].associated_ar == 12000);

  generate_fixtures(dir / "fx", specs, {});
  const auto catalog = ingest::load_catalog(dir / "fx" / "catalog.csv");
  REQUIRE(catalog.active_regions.size() == 1);
  CHECK(catalog.flares.size() == 1);
  // Pixel (300, 260) at 4"/px around (256, 256).
  CHECK(catalog.active_regions[0].location.hpcx == doctest::Approx(176.0));
  CHECK(catalog.active_regions[0].location.hpcy == doctest::Approx(-16.0));

  std::ofstream(dir / "bad.json") << R"({"images": [{"blobs": []}]})";
  CHECK_THROWS_AS(load_fixture_specs(dir / "bad.json"), ingest::IngestError);
}
