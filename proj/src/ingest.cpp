#include "flareprox/ingest.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

namespace flareprox::ingest {

namespace {

using json = nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const auto t = trim(text);
  if (t.empty()) return false;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::optional<bool> parse_bool(std::string_view text) {
  const auto t = lower(trim(text));
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  return std::nullopt;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CsvTable {
  std::vector<std::string> header;
  // (1-based line number, fields)
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    for (auto& f : fields) f = trim(f);
    if (table.header.empty()) {
      table.header = std::move(fields);
    } else {
      table.rows.emplace_back(line_no, std::move(fields));
    }
  }
  if (table.header.empty()) throw IngestError(path.string() + ": missing header row");
  return table;
}

[[noreturn]] void throw_row_errors(const fs::path& path, const std::vector<std::string>& errors) {
  std::string msg = path.string() + ": " + std::to_string(errors.size()) + " rejected row(s)";
  for (const auto& e : errors) msg += "\n  " + e;
  throw IngestError(msg);
}

fs::path resolve(const fs::path& base_dir, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

imageproc::AttributionMap read_pgm(const fs::path& path) {
  const std::string data = read_file(path);
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < data.size()) {
      if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return data.substr(start, pos - start);
  };

  const std::string magic = next_token();
  if (magic != "P5" && magic != "P2") {
    throw IngestError(path.string() + ": unsupported PGM variant '" + magic + "'");
  }
  int w = 0;
  int h = 0;
  int maxval = 0;
  if (!parse_number(next_token(), w) || !parse_number(next_token(), h) ||
      !parse_number(next_token(), maxval) || w < 1 || h < 1 || maxval < 1 || maxval > 65535) {
    throw IngestError(path.string() + ": malformed PGM header");
  }

  imageproc::AttributionMap am{w, h, {}};
  const std::size_t n = static_cast<std::size_t>(w) * h;
  am.values.reserve(n);
  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      int v = 0;
      if (!parse_number(next_token(), v)) throw IngestError(path.string() + ": truncated PGM data");
      am.values.push_back(v);
    }
    return am;
  }
  ++pos;  // single whitespace after maxval
  const std::size_t bytes_per = maxval < 256 ? 1 : 2;
  if (data.size() < pos + n * bytes_per) throw IngestError(path.string() + ": truncated PGM data");
  const auto* p = reinterpret_cast<const unsigned char*>(data.data() + pos);
  for (std::size_t i = 0; i < n; ++i) {
    am.values.push_back(bytes_per == 1 ? p[i] : (p[2 * i] << 8) | p[2 * i + 1]);
  }
  return am;
}

// libpng reports through callbacks; keep the message for the exception.
void png_error_to_buffer(png_structp png, png_const_charp msg) {
  auto* out = static_cast<std::string*>(png_get_error_ptr(png));
  *out = msg;
  png_longjmp(png, 1);
}

void png_ignore_warning(png_structp, png_const_charp) {}

struct PngReadState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadState() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

imageproc::AttributionMap read_png(const fs::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IngestError("cannot open " + path.string());

  PngReadState st;
  std::string png_message;
  st.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &png_message, png_error_to_buffer, png_ignore_warning);
  if (!st.png) throw IngestError("libpng initialization failed");
  st.info = png_create_info_struct(st.png);
  if (!st.info) throw IngestError("libpng initialization failed");

  png_uint_32 w = 0;
  png_uint_32 h = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  bool bad_color = false;
  if (setjmp(png_jmpbuf(st.png))) {
    throw IngestError(path.string() + ": corrupt PNG (" + png_message + ")");
  }
  png_init_io(st.png, file.get());
  png_read_info(st.png, st.info);
  png_get_IHDR(st.png, st.info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_GRAY_ALPHA) {
    bad_color = true;
  } else {
    if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(st.png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(st.png);
    png_read_update_info(st.png, st.info);
    const std::size_t row_bytes = png_get_rowbytes(st.png, st.info);
    pixels.resize(row_bytes * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + y * row_bytes;
    png_read_image(st.png, rows.data());
  }
  if (bad_color) throw IngestError(path.string() + ": only grayscale PNG attribution maps are supported");

  imageproc::AttributionMap am{static_cast<int>(w), static_cast<int>(h), {}};
  am.values.reserve(static_cast<std::size_t>(w) * h);
  const bool wide = bit_depth == 16;
  for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
    am.values.push_back(wide ? (pixels[2 * i] << 8) | pixels[2 * i + 1] : pixels[i]);
  }
  return am;
}

std::pair<int, int> read_sidecar_dims(const fs::path& sidecar) {
  json j;
  try {
    j = json::parse(read_file(sidecar));
    const int w = j.at("width").get<int>();
    const int h = j.at("height").get<int>();
    if (w < 1 || h < 1) throw IngestError(sidecar.string() + ": width and height must be >= 1");
    return {w, h};
  } catch (const json::exception& e) {
    throw IngestError(sidecar.string() + ": " + e.what());
  }
}

imageproc::AttributionMap read_raw_f32(const fs::path& path, const fs::path& sidecar) {
  const auto [w, h] = read_sidecar_dims(sidecar);
  const std::string data = read_file(path);
  const std::size_t expected = static_cast<std::size_t>(w) * h;
  if (data.size() != expected * sizeof(float)) {
    throw IngestError(path.string() + ": dimension mismatch, sidecar says " + std::to_string(w) +
                      "x" + std::to_string(h) + " but file holds " +
                      std::to_string(data.size() / sizeof(float)) + " floats");
  }
  imageproc::AttributionMap am{w, h, {}};
  am.values.reserve(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, data.data() + i * 4, 4);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    am.values.push_back(std::bit_cast<float>(bits));
  }
  return am;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

Timestamp parse_timestamp(std::string_view text) {
  const std::string t = trim(text);
  auto fail = [&]() -> Timestamp { throw IngestError("invalid ISO-8601 timestamp '" + t + "'"); };
  if (t.size() < 19 || t[4] != '-' || t[7] != '-' || (t[10] != 'T' && t[10] != ' ') ||
      t[13] != ':' || t[16] != ':') {
    return fail();
  }
  int year = 0;
  unsigned month = 0;
  unsigned day = 0;
  int hour = 0;
  int minute = 0;
  int second = 0;
  const std::string_view v(t);
  if (!parse_number(v.substr(0, 4), year) || !parse_number(v.substr(5, 2), month) ||
      !parse_number(v.substr(8, 2), day) || !parse_number(v.substr(11, 2), hour) ||
      !parse_number(v.substr(14, 2), minute) || !parse_number(v.substr(17, 2), second)) {
    return fail();
  }
  std::size_t pos = 19;
  int millis = 0;
  if (pos < t.size() && t[pos] == '.') {
    ++pos;
    int digits = 0;
    int scale = 100;
    while (pos < t.size() && std::isdigit(static_cast<unsigned char>(t[pos]))) {
      if (digits < 3) millis += (t[pos] - '0') * scale;
      scale /= 10;
      ++digits;
      ++pos;
    }
    if (digits == 0) return fail();
  }
  if (pos < t.size() && t[pos] == 'Z') ++pos;
  if (pos != t.size()) return fail();

  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60 || hour < 0 || minute < 0 ||
      second < 0) {
    return fail();
  }
  return std::chrono::sys_days{ymd} + std::chrono::hours{hour} + std::chrono::minutes{minute} +
         std::chrono::seconds{second} + std::chrono::milliseconds{millis};
}

std::string format_timestamp(Timestamp t) {
  const auto days = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{days};
  const std::chrono::hh_mm_ss hms{t - days};
  char buf[40];
  const auto ms = hms.subseconds().count();
  if (ms != 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()), static_cast<int>(ms));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
  }
  return buf;
}

EvaluationManifest load_manifest(const fs::path& path) {
  const CsvTable table = read_csv(path);
  const auto base = path.parent_path();

  const std::array<std::string_view, 6> required{"image_id",        "attribution_path",
                                                 "geometry_path",   "timestamp",
                                                 "predicted_flare", "observed_flare"};
  for (const auto name : required) {
    if (!table.column(name)) {
      throw IngestError(path.string() + ": missing column '" + std::string(name) + "'");
    }
  }
  const auto col_mag = table.column("magnetogram_path");

  EvaluationManifest manifest;
  std::vector<std::string> errors;
  std::set<std::string> seen;
  for (const auto& [line_no, fields] : table.rows) {
    const std::string where = "row " + std::to_string(line_no) + ": ";
    auto cell = [&](std::string_view name) -> std::string {
      const auto c = *table.column(name);
      return c < fields.size() ? fields[c] : std::string();
    };
    if (fields.size() != table.header.size()) {
      errors.push_back(where + "expected " + std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
      continue;
    }
    ManifestRow row;
    row.image_id = cell("image_id");
    if (row.image_id.empty()) {
      errors.push_back(where + "empty image_id");
      continue;
    }
    if (!seen.insert(row.image_id).second) {
      errors.push_back(where + "duplicate image_id '" + row.image_id + "'");
      continue;
    }
    const auto attribution = cell("attribution_path");
    if (attribution.empty()) {
      errors.push_back(where + "empty attribution_path");
      continue;
    }
    row.attribution_path = resolve(base, attribution);
    if (const auto g = cell("geometry_path"); !g.empty()) row.geometry_path = resolve(base, g);
    if (col_mag && *col_mag < fields.size() && !fields[*col_mag].empty()) {
      row.magnetogram_path = resolve(base, fields[*col_mag]);
    }
    try {
      row.timestamp = parse_timestamp(cell("timestamp"));
    } catch (const IngestError& e) {
      errors.push_back(where + e.what());
      continue;
    }
    const auto predicted = parse_bool(cell("predicted_flare"));
    const auto observed = parse_bool(cell("observed_flare"));
    if (!predicted) {
      errors.push_back(where + "predicted_flare must be true/false, got '" + cell("predicted_flare") + "'");
      continue;
    }
    if (!observed) {
      errors.push_back(where + "observed_flare must be true/false, got '" + cell("observed_flare") + "'");
      continue;
    }
    row.predicted_flare = *predicted;
    row.observed_flare = *observed;
    manifest.rows.push_back(std::move(row));
  }
  if (!errors.empty()) throw_row_errors(path, errors);
  return manifest;
}

imageproc::AttributionMap load_attribution(const fs::path& path,
                                           const std::optional<fs::path>& sidecar) {
  if (!fs::exists(path)) throw IngestError("attribution map not found: " + path.string());
  const auto ext = lower(path.extension().string());
  imageproc::AttributionMap am;
  if (ext == ".pgm") {
    am = read_pgm(path);
  } else if (ext == ".png") {
    am = read_png(path);
  } else if (ext == ".f32" || ext == ".raw" || ext == ".bin") {
    am = read_raw_f32(path, sidecar.value_or(fs::path(path.string() + ".json")));
  } else {
    throw IngestError(path.string() + ": unsupported attribution format '" + ext + "'");
  }
  try {
    am.validate();
  } catch (const std::invalid_argument& e) {
    throw IngestError(path.string() + ": " + e.what());
  }
  return am;
}

void save_raw_f32(const fs::path& path, const imageproc::AttributionMap& am) {
  std::string bytes(am.values.size() * sizeof(float), '\0');
  for (std::size_t i = 0; i < am.values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(am.values[i]));
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    std::memcpy(bytes.data() + i * 4, &bits, 4);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  std::ofstream side(path.string() + ".json");
  if (!side) throw IngestError("cannot write " + path.string() + ".json");
  side << json{{"width", am.width}, {"height", am.height}}.dump() << "\n";
}

geometry::SolarDiskGeometry load_geometry(const fs::path& path) {
  geometry::SolarDiskGeometry g;
  try {
    const json j = json::parse(read_file(path));
    g.hpc_center_x = j.at("hpc_center_x").get<double>();
    g.hpc_center_y = j.at("hpc_center_y").get<double>();
    g.cdelt = j.at("cdelt").get<double>();
    g.disk_radius_px = j.at("disk_radius_px").get<double>();
    g.image_size = j.at("image_size").get<int>();
    g.validate();
  } catch (const json::exception& e) {
    throw IngestError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw IngestError(path.string() + ": " + e.what());
  }
  return g;
}

void save_geometry(const fs::path& path, const geometry::SolarDiskGeometry& g) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write " + path.string());
  out << json{{"hpc_center_x", g.hpc_center_x},
              {"hpc_center_y", g.hpc_center_y},
              {"cdelt", g.cdelt},
              {"disk_radius_px", g.disk_radius_px},
              {"image_size", g.image_size}}
             .dump()
      << "\n";
}

FlareClass FlareClass::parse(std::string_view text) {
  const auto t = trim(text);
  const std::string allowed = "ABCMX";
  if (t.size() < 2 || allowed.find(static_cast<char>(std::toupper(t[0]))) == std::string::npos) {
    throw IngestError("invalid flare class '" + t + "'");
  }
  FlareClass fc;
  fc.letter = static_cast<char>(std::toupper(t[0]));
  if (!parse_number(std::string_view(t).substr(1), fc.strength) || fc.strength < 1.0 ||
      fc.strength > 9.9) {
    throw IngestError("invalid flare class '" + t + "': strength must be in [1.0, 9.9]");
  }
  return fc;
}

std::string FlareClass::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%.1f", letter, strength);
  return buf;
}

Catalog load_catalog(const fs::path& path) {
  const CsvTable table = read_csv(path);
  for (const auto name : {"kind", "timestamp", "hpcx_arcsec", "hpcy_arcsec", "noaa_ar", "flare_class"}) {
    if (!table.column(name)) {
      throw IngestError(path.string() + ": missing column '" + std::string(name) + "'");
    }
  }
  Catalog catalog;
  std::vector<std::string> errors;
  for (const auto& [line_no, fields] : table.rows) {
    const std::string where = "row " + std::to_string(line_no) + ": ";
    if (fields.size() != table.header.size()) {
      errors.push_back(where + "expected " + std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
      continue;
    }
    auto cell = [&](std::string_view name) { return fields[*table.column(name)]; };
    try {
      const auto kind = cell("kind");
      const Timestamp ts = parse_timestamp(cell("timestamp"));
      geometry::HpcPoint loc;
      if (!parse_number(cell("hpcx_arcsec"), loc.hpcx) ||
          !parse_number(cell("hpcy_arcsec"), loc.hpcy) || !std::isfinite(loc.hpcx) ||
          !std::isfinite(loc.hpcy)) {
        throw IngestError("coordinates must be finite numbers");
      }
      std::optional<int> noaa;
      if (const auto s = cell("noaa_ar"); !s.empty()) {
        int v = 0;
        if (!parse_number(s, v)) throw IngestError("noaa_ar must be an integer, got '" + s + "'");
        noaa = v;
      }
      if (kind == "AR") {
        if (!noaa) throw IngestError("AR row needs noaa_ar");
        catalog.active_regions.push_back({*noaa, loc, ts});
      } else if (kind == "FL") {
        catalog.flares.push_back({FlareClass::parse(cell("flare_class")), loc, noaa, ts});
      } else {
        throw IngestError("kind must be AR or FL, got '" + kind + "'");
      }
    } catch (const IngestError& e) {
      errors.push_back(where + e.what());
    }
  }
  if (!errors.empty()) throw_row_errors(path, errors);
  return catalog;
}

CatalogMatch match_catalog(const Catalog& catalog, Timestamp t, std::chrono::milliseconds tolerance,
                           const geometry::SolarDiskGeometry& g) {
  if (tolerance.count() < 0) throw std::invalid_argument("match tolerance must be >= 0");
  auto near = [&](Timestamp other) {
    const auto diff = other > t ? other - t : t - other;
    return diff <= tolerance;
  };
  CatalogMatch m;
  for (const auto& ar : catalog.active_regions) {
    if (!near(ar.timestamp)) continue;
    const auto px = geometry::hpc_to_pixel(ar.location, g);
    m.active_regions.push_back({ar, px, !geometry::inside_disk(px, g)});
  }
  for (const auto& fl : catalog.flares) {
    if (!near(fl.peak_time)) continue;
    const auto px = geometry::hpc_to_pixel(fl.location, g);
    m.flares.push_back({fl, px, !geometry::inside_disk(px, g)});
  }
  return m;
}

}  // namespace flareprox::ingest
