#include "flareprox/batch.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "flareprox/overlay.hpp"

namespace flareprox::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

ImageResult process_image(const ingest::ManifestRow& row, const ingest::Catalog& catalog,
                          const RunConfig& cfg) {
  ImageResult r;
  r.row = row;
  const auto am = ingest::load_attribution(row.attribution_path);
  const auto g = row.geometry_path ? ingest::load_geometry(*row.geometry_path) : cfg.default_geometry;
  g.validate();
  const auto working = regions::working_geometry(g, cfg.params);

  auto scaled = imageproc::resize(imageproc::normalize_scale(am, cfg.params.scale_to),
                                  cfg.params.target_size);
  r.extraction = regions::extract_regions_from_image(scaled, cfg.params, working);
  r.match = ingest::match_catalog(catalog, row.timestamp, cfg.match_tolerance, working);

  std::vector<metrics::ArInput> on_disk;
  for (const auto& ar : r.match.active_regions) {
    if (!ar.off_disk) on_disk.push_back({ar.record.noaa_ar, ar.pixel});
  }
  r.eval = metrics::evaluate_image(row.image_id, metrics::categorize(row.predicted_flare, row.observed_flare),
                                   on_disk, r.extraction.regions);
  if (cfg.overlay) r.scaled = std::move(scaled);
  return r;
}

std::vector<ImageResult> process_all(const ingest::EvaluationManifest& manifest,
                                     const ingest::Catalog& catalog, const RunConfig& cfg) {
  const std::size_t n = manifest.rows.size();
  std::vector<ImageResult> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = process_image(manifest.rows[i], catalog, cfg);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(std::max<std::size_t>(n, 1))));
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::sort(results.begin(), results.end(), [](const ImageResult& a, const ImageResult& b) {
    return a.row.image_id < b.row.image_id;
  });
  return results;
}

std::string result_json_line(const ImageResult& r) {
  const auto& ev = r.eval;
  json flags = json::array();
  if (ev.no_regions) flags.push_back("no_regions");
  if (ev.no_ars) flags.push_back("no_ars");
  json distances = json::array();
  for (const auto& d : ev.per_ar_distances) {
    distances.push_back({{"noaa_ar", d.noaa_ar}, {"d_min", d.d_min}, {"inside", d.inside}});
  }
  json off_disk = json::array();
  for (const auto& ar : r.match.active_regions) {
    if (ar.off_disk) off_disk.push_back(ar.record.noaa_ar);
  }
  json flares = json::array();
  for (const auto& fl : r.match.flares) {
    flares.push_back({{"class", fl.record.flare_class.str()},
                      {"noaa_ar", fl.record.associated_ar ? json(*fl.record.associated_ar) : json(nullptr)},
                      {"x", fl.pixel.x},
                      {"y", fl.pixel.y},
                      {"off_disk", fl.off_disk}});
  }
  const json line{{"image_id", ev.image_id},
                  {"timestamp", ingest::format_timestamp(r.row.timestamp)},
                  {"category", std::string(metrics::to_string(ev.category))},
                  {"ps", optional_number(ev.ps)},
                  {"acr", optional_number(ev.acr)},
                  {"flags", flags},
                  {"per_ar_distances", distances},
                  {"region_count", ev.region_count},
                  {"off_disk_ars", off_disk},
                  {"flares", flares},
                  {"provenance",
                   {{"edge_pixels", r.extraction.edge_pixels},
                    {"edge_pixels_on_disk", r.extraction.edge_pixels_on_disk},
                    {"clusters", r.extraction.clusters},
                    {"noise_pixels", r.extraction.noise_pixels},
                    {"regions_off_disk", r.extraction.regions_off_disk}}}};
  return line.dump();
}

std::string regions_json(const regions::RegionExtraction& ex) {
  json out = json::array();
  for (const auto& r : ex.regions) {
    out.push_back({{"box", {r.box.min_x, r.box.min_y, r.box.max_x, r.box.max_y}},
                   {"member_clusters", r.member_clusters}});
  }
  return out.dump() + "\n";
}

std::string summary_csv(std::span<const metrics::CategorySummary> rows) {
  std::string out = "category,mean_ps,std_ps,mean_acr,std_acr,n,n_no_regions,n_no_ars\n";
  for (const auto& r : rows) {
    out += r.category + ',' + num(r.mean_ps) + ',' + num(r.std_ps) + ',' + num(r.mean_acr) + ',' +
           num(r.std_acr) + ',' + std::to_string(r.n) + ',' + std::to_string(r.n_no_regions) + ',' +
           std::to_string(r.n_no_ars) + '\n';
  }
  return out;
}

std::string boxplot_csv(std::span<const metrics::ImageEvaluation> evals) {
  std::string out = "category,metric,value\n";
  for (const auto& ev : evals) {
    if (ev.flagged()) continue;
    const std::string cat(metrics::to_string(ev.category));
    out += cat + ",ps," + num(*ev.ps) + '\n';
    out += cat + ",acr," + num(*ev.acr) + '\n';
  }
  return out;
}

std::vector<metrics::ImageEvaluation> read_results_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ingest::IngestError("cannot open " + path.string());
  std::vector<metrics::ImageEvaluation> evals;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      metrics::ImageEvaluation ev;
      ev.image_id = j.at("image_id").get<std::string>();
      const auto cat = metrics::parse_category(j.at("category").get<std::string>());
      if (!cat) throw ingest::IngestError("unknown category");
      ev.category = *cat;
      if (!j.at("ps").is_null()) ev.ps = j.at("ps").get<double>();
      if (!j.at("acr").is_null()) ev.acr = j.at("acr").get<double>();
      for (const auto& f : j.at("flags")) {
        if (f == "no_regions") ev.no_regions = true;
        if (f == "no_ars") ev.no_ars = true;
      }
      for (const auto& d : j.at("per_ar_distances")) {
        ev.per_ar_distances.push_back(
            {d.at("noaa_ar").get<int>(), d.at("d_min").get<double>(), d.at("inside").get<bool>()});
      }
      ev.region_count = j.at("region_count").get<std::size_t>();
      evals.push_back(std::move(ev));
    } catch (const std::exception& e) {
      throw ingest::IngestError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return evals;
}

void write_overlay(const ImageResult& r, const RunConfig& cfg, const fs::path& path) {
  const int size = cfg.params.target_size;
  imageproc::GrayscaleImage magnetogram(size, size, 128);
  if (r.row.magnetogram_path) {
    magnetogram = imageproc::resize(
        imageproc::normalize_scale(ingest::load_attribution(*r.row.magnetogram_path), cfg.params.scale_to),
        size);
  }
  std::vector<geometry::PixelPoint> ars;
  for (const auto& ar : r.match.active_regions) {
    if (!ar.off_disk) ars.push_back(ar.pixel);
  }
  std::vector<geometry::PixelPoint> fls;
  for (const auto& fl : r.match.flares) fls.push_back(fl.pixel);
  write_png(path, render_overlay(magnetogram, r.scaled, r.extraction.regions, ars, fls));
}

int run_batch(const RunConfig& cfg) {
  cfg.params.validate();
  const auto manifest = ingest::load_manifest(cfg.manifest);
  const auto catalog = ingest::load_catalog(cfg.catalog);
  fs::create_directories(cfg.out_dir / "regions");
  if (cfg.overlay) fs::create_directories(cfg.out_dir / "overlays");

  const auto results = process_all(manifest, catalog, cfg);
  std::string lines;
  std::vector<metrics::ImageEvaluation> evals;
  for (const auto& r : results) {
    lines += result_json_line(r) + '\n';
    evals.push_back(r.eval);
    write_text(cfg.out_dir / "regions" / (r.row.image_id + ".json"), regions_json(r.extraction));
    if (cfg.overlay) write_overlay(r, cfg, cfg.out_dir / "overlays" / (r.row.image_id + ".png"));
  }
  write_text(cfg.out_dir / "results.jsonl", lines);
  write_text(cfg.out_dir / "summary.csv", summary_csv(metrics::summarize(evals, cfg.aggregation)));
  write_text(cfg.out_dir / "boxplot.csv", boxplot_csv(evals));
  return 0;
}

int run_overlays(const RunConfig& cfg) {
  RunConfig with_images = cfg;
  with_images.overlay = true;
  with_images.params.validate();
  const auto manifest = ingest::load_manifest(cfg.manifest);
  const auto catalog = ingest::load_catalog(cfg.catalog);
  fs::create_directories(cfg.out_dir / "overlays");
  for (const auto& r : process_all(manifest, catalog, with_images)) {
    write_overlay(r, with_images, cfg.out_dir / "overlays" / (r.row.image_id + ".png"));
  }
  return 0;
}

int run_summarize(const fs::path& results, const fs::path& out_dir, metrics::Aggregation aggregation) {
  const auto evals = read_results_jsonl(results);
  fs::create_directories(out_dir);
  write_text(out_dir / "summary.csv", summary_csv(metrics::summarize(evals, aggregation)));
  write_text(out_dir / "boxplot.csv", boxplot_csv(evals));
  return 0;
}

}  // namespace flareprox::cli
