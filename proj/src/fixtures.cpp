#include "flareprox/fixtures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "flareprox/metrics.hpp"

namespace flareprox::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using geometry::PixelPoint;
using regions::Box;

std::string num(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double box_gap(const Box& a, const Box& b) {
  const double dx = std::max({a.min_x - b.max_x, b.min_x - a.max_x, 0.0});
  const double dy = std::max({a.min_y - b.max_y, b.min_y - a.max_y, 0.0});
  return std::hypot(dx, dy);
}

Box stretched(const Blob& b, double half, const regions::PipelineParams& params) {
  const bool right = params.solar_west == regions::SolarWest::right;
  const double to_right = right ? params.westward_buffer : params.eastward_buffer;
  const double to_left = right ? params.eastward_buffer : params.westward_buffer;
  return {b.x - half - to_left, b.y - half, b.x + half + to_right, b.y + half};
}

Box outer_box(const Blob& b, const regions::PipelineParams& params) {
  return stretched(b, 2.0 * b.sigma + kEdgeSlack, params);
}

// Uniform double in [lo, hi) from raw 64-bit draws, identical on every platform.
class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed) {}
  double operator()(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng_() >> 11) * 0x1p-53);
  }
  bool coin(double p = 0.5) { return (*this)(0.0, 1.0) < p; }
  int pick(int n) { return std::min(static_cast<int>((*this)(0.0, n)), n - 1); }

 private:
  std::mt19937_64 rng_;
};

PixelPoint random_on_disk(Uniform& u, const geometry::SolarDiskGeometry& g, double max_r) {
  const double r = max_r * std::sqrt(u(0.0, 1.0));
  const double a = u(0.0, 2.0 * 3.14159265358979323846);
  return {std::round(g.hpc_center_x + r * std::cos(a)), std::round(g.hpc_center_y + r * std::sin(a))};
}

}  // namespace

imageproc::AttributionMap render_blobs(const FixtureSpec& spec) {
  const int n = spec.geometry.image_size;
  imageproc::AttributionMap am{n, n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)};
  for (const auto& b : spec.blobs) {
    const double two_s2 = 2.0 * b.sigma * b.sigma;
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const double dx = x - b.x;
        const double dy = y - b.y;
        am.values[static_cast<std::size_t>(y) * n + x] += b.peak * std::exp(-(dx * dx + dy * dy) / two_s2);
      }
    }
  }
  return am;
}

FixtureExpectation expected_outcome(const FixtureSpec& spec, const regions::PipelineParams& params) {
  spec.geometry.validate();
  for (const auto& b : spec.blobs) {
    if (!geometry::inside_disk({b.x, b.y}, spec.geometry)) {
      throw std::invalid_argument(spec.image_id + ": blob center (" + num(b.x) + ", " + num(b.y) +
                                  ") is off the solar disk");
    }
  }
  FixtureExpectation e;
  e.image_id = spec.image_id;
  std::vector<PixelPoint> ars;
  for (const auto& ar : spec.ars) {
    if (geometry::inside_disk(ar.pixel, spec.geometry)) ars.push_back(ar.pixel);
  }
  e.no_ars = ars.empty();
  e.no_regions = spec.blobs.empty();
  if (e.no_ars || e.no_regions) {
    e.acr_max = 0.0;
    return e;
  }

  std::vector<regions::BoundingRegion> inner;
  std::vector<regions::BoundingRegion> outer;
  for (const auto& b : spec.blobs) {
    inner.push_back({stretched(b, 0.0, params), {}});
    outer.push_back({outer_box(b, params), {}});
  }
  for (std::size_t i = 0; i < outer.size(); ++i) {
    for (std::size_t j = i + 1; j < outer.size(); ++j) {
      if (box_gap(outer[i].box, outer[j].box) <= params.max_dist) e.separated = false;
    }
  }
  e.acr_min = *metrics::attribution_colocation_ratio(ars, inner);
  e.ps_max = *metrics::proximity_score(ars, inner);
  if (e.separated) {
    e.acr_max = *metrics::attribution_colocation_ratio(ars, outer);
    e.ps_min = *metrics::proximity_score(ars, outer);
  }
  return e;
}

std::vector<FixtureExpectation> generate_fixtures(const fs::path& dir,
                                                  std::span<const FixtureSpec> specs,
                                                  const regions::PipelineParams& params) {
  fs::create_directories(dir / "attribution");
  fs::create_directories(dir / "geometry");

  std::vector<FixtureExpectation> expectations;
  std::ofstream manifest(dir / "manifest.csv");
  std::ofstream catalog(dir / "catalog.csv");
  if (!manifest || !catalog) throw std::runtime_error("cannot write fixtures under " + dir.string());
  manifest << "image_id,attribution_path,geometry_path,timestamp,predicted_flare,observed_flare\n";
  catalog << "kind,timestamp,hpcx_arcsec,hpcy_arcsec,noaa_ar,flare_class\n";

  for (const auto& spec : specs) {
    expectations.push_back(expected_outcome(spec, params));
    const auto attribution = fs::path("attribution") / (spec.image_id + ".f32");
    const auto geom = fs::path("geometry") / (spec.image_id + ".json");
    ingest::save_raw_f32(dir / attribution, render_blobs(spec));
    ingest::save_geometry(dir / geom, spec.geometry);

    const auto ts = ingest::format_timestamp(spec.timestamp);
    manifest << spec.image_id << ',' << attribution.generic_string() << ','
             << geom.generic_string() << ',' << ts << ','
             << (spec.predicted_flare ? "true" : "false") << ','
             << (spec.observed_flare ? "true" : "false") << '\n';
    for (const auto& ar : spec.ars) {
      const auto hpc = geometry::pixel_to_hpc(ar.pixel, spec.geometry);
      catalog << "AR," << ts << ',' << num(hpc.hpcx) << ',' << num(hpc.hpcy) << ',' << ar.noaa_ar
              << ",\n";
    }
    for (const auto& fl : spec.flares) {
      const auto hpc = geometry::pixel_to_hpc(fl.pixel, spec.geometry);
      catalog << "FL," << ts << ',' << num(hpc.hpcx) << ',' << num(hpc.hpcy) << ','
              << (fl.associated_ar ? std::to_string(*fl.associated_ar) : std::string()) << ','
              << fl.flare_class << '\n';
    }
  }

  json out = json::array();
  for (const auto& e : expectations) {
    out.push_back({{"image_id", e.image_id},
                   {"no_regions", e.no_regions},
                   {"no_ars", e.no_ars},
                   {"separated", e.separated},
                   {"acr_min", e.acr_min},
                   {"acr_max", e.acr_max},
                   {"ps_min", e.ps_min},
                   {"ps_max", e.ps_max}});
  }
  std::ofstream(dir / "expectations.json") << out.dump(2) << "\n";
  return expectations;
}

std::vector<FixtureSpec> synthetic_suite(int count, std::uint64_t seed) {
  Uniform u(seed);
  const regions::PipelineParams params;
  const geometry::SolarDiskGeometry g;
  const auto t0 = ingest::parse_timestamp("2020-01-01T00:00:00Z");
  const double max_blob_r = 170.0;
  int next_ar = 12000;

  std::vector<FixtureSpec> suite;
  for (int i = 0; i < count; ++i) {
    FixtureSpec s;
    char id[32];
    std::snprintf(id, sizeof id, "synth_%03d", i);
    s.image_id = id;
    s.timestamp = t0 + std::chrono::hours(4 * i);
    s.predicted_flare = u.coin();
    s.observed_flare = u.coin();
    s.geometry = g;

    const int kind = i % 10;
    const int n_blobs = kind == 0 ? 0 : 1 + u.pick(3);
    for (int attempt = 0; static_cast<int>(s.blobs.size()) < n_blobs && attempt < 500; ++attempt) {
      const auto c = random_on_disk(u, g, max_blob_r);
      const Blob b{c.x, c.y, std::round(u(4.0, 9.0)), u(0.6, 1.0)};
      const bool clear = std::all_of(s.blobs.begin(), s.blobs.end(), [&](const Blob& o) {
        return box_gap(outer_box(b, params), outer_box(o, params)) > params.max_dist + 10.0;
      });
      if (clear) s.blobs.push_back(b);
    }

    if (kind == 1) {
      // no ARs at all
    } else if (kind == 2) {
      s.ars.push_back({next_ar++, {g.hpc_center_x + 245.0, g.hpc_center_y}});
    } else {
      for (const auto& b : s.blobs) {
        if (u.coin(0.6)) s.ars.push_back({next_ar++, {b.x, b.y}});
      }
      const int displaced = (s.ars.empty() ? 1 : 0) + u.pick(2);
      for (int k = 0; k < displaced; ++k) {
        s.ars.push_back({next_ar++, random_on_disk(u, g, 200.0)});
      }
      if (u.coin(0.2)) s.ars.push_back({next_ar++, {g.hpc_center_x, g.hpc_center_y - 250.0}});
    }
    if (s.observed_flare && !s.ars.empty()) {
      const auto& ar = s.ars.front();
      s.flares.push_back({u.coin(0.3) ? "X1.2" : "M2.5", ar.noaa_ar, ar.pixel});
    }
    suite.push_back(std::move(s));
  }
  return suite;
}

std::vector<FixtureSpec> load_fixture_specs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ingest::IngestError("cannot open " + path.string());
  std::vector<FixtureSpec> specs;
  try {
    const auto j = json::parse(in);
    geometry::SolarDiskGeometry g;
    if (j.contains("geometry")) {
      const auto& jg = j.at("geometry");
      g.hpc_center_x = jg.value("hpc_center_x", g.hpc_center_x);
      g.hpc_center_y = jg.value("hpc_center_y", g.hpc_center_y);
      g.cdelt = jg.value("cdelt", g.cdelt);
      g.disk_radius_px = jg.value("disk_radius_px", g.disk_radius_px);
      g.image_size = jg.value("image_size", g.image_size);
    }
    for (const auto& ji : j.at("images")) {
      FixtureSpec s;
      s.image_id = ji.at("image_id").get<std::string>();
      s.timestamp = ingest::parse_timestamp(ji.value("timestamp", "2020-01-01T00:00:00Z"));
      s.predicted_flare = ji.value("predicted_flare", false);
      s.observed_flare = ji.value("observed_flare", false);
      s.geometry = g;
      for (const auto& jb : ji.value("blobs", json::array())) {
        s.blobs.push_back({jb.at("x").get<double>(), jb.at("y").get<double>(),
                           jb.value("sigma", 10.0), jb.value("peak", 1.0)});
      }
      for (const auto& ja : ji.value("ars", json::array())) {
        s.ars.push_back({ja.at("noaa_ar").get<int>(), {ja.at("x").get<double>(), ja.at("y").get<double>()}});
      }
      for (const auto& jf : ji.value("flares", json::array())) {
        FixtureFlare f;
        f.flare_class = jf.value("class", std::string("M1.0"));
        if (jf.contains("noaa_ar")) f.associated_ar = jf.at("noaa_ar").get<int>();
        f.pixel = {jf.at("x").get<double>(), jf.at("y").get<double>()};
        s.flares.push_back(std::move(f));
      }
      specs.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ingest::IngestError(path.string() + ": " + e.what());
  }
  return specs;
}

}  // namespace flareprox::cli
