#include "flareprox/overlay.hpp"

#include <png.h>

#include <cmath>
#include <stdexcept>

#include "flareprox/metrics.hpp"

namespace flareprox::cli {

namespace {

int to_pixel(double v) { return static_cast<int>(std::floor(v + 0.5)); }

void stroke_box(RgbImage& img, const regions::Box& box) {
  const int x0 = to_pixel(box.min_x);
  const int x1 = to_pixel(box.max_x);
  const int y0 = to_pixel(box.min_y);
  const int y1 = to_pixel(box.max_y);
  for (int x = x0; x <= x1; ++x) {
    img.set(x, y0, kBoxColor);
    img.set(x, y1, kBoxColor);
  }
  for (int y = y0; y <= y1; ++y) {
    img.set(x0, y, kBoxColor);
    img.set(x1, y, kBoxColor);
  }
}

}  // namespace

Rgb RgbImage::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {data[i], data[i + 1], data[i + 2]};
}

void RgbImage::set(int x, int y, const Rgb& c) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  data[i] = c[0];
  data[i + 1] = c[1];
  data[i + 2] = c[2];
}

imageproc::GrayscaleImage blend(const imageproc::GrayscaleImage& magnetogram,
                                const imageproc::GrayscaleImage& attribution) {
  if (magnetogram.width != attribution.width || magnetogram.height != attribution.height) {
    throw std::invalid_argument("overlay layers differ in size");
  }
  imageproc::GrayscaleImage out(magnetogram.width, magnetogram.height);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = static_cast<std::uint8_t>((magnetogram.values[i] + attribution.values[i] + 1) / 2);
  }
  return out;
}

RgbImage render_overlay(const imageproc::GrayscaleImage& magnetogram,
                        const imageproc::GrayscaleImage& attribution,
                        std::span<const regions::BoundingRegion> regions,
                        std::span<const geometry::PixelPoint> ars_pix,
                        std::span<const geometry::PixelPoint> fls_pix) {
  const auto base = blend(magnetogram, attribution);
  RgbImage img(base.width, base.height);
  for (std::size_t i = 0; i < base.values.size(); ++i) {
    img.data[3 * i] = img.data[3 * i + 1] = img.data[3 * i + 2] = base.values[i];
  }
  for (const auto& r : regions) stroke_box(img, r.box);

  constexpr int half = kMarkerSize / 2;
  for (const auto& fl : fls_pix) {
    const int cx = to_pixel(fl.x);
    const int cy = to_pixel(fl.y);
    for (int d = -half; d <= half; ++d) {
      img.set(cx + d, cy + d, kFlareColor);
      img.set(cx + d, cy - d, kFlareColor);
    }
  }
  for (const auto& ar : ars_pix) {
    const Rgb color = metrics::inside_any(ar, regions) ? kArInsideColor : kArOutsideColor;
    const int cx = to_pixel(ar.x);
    const int cy = to_pixel(ar.y);
    for (int dy = -half; dy <= half; ++dy) {
      for (int dx = -half; dx <= half; ++dx) img.set(cx + dx, cy + dy, color);
    }
  }
  return img;
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.data.data(), 0, nullptr)) {
    throw std::runtime_error("cannot write " + path.string() + ": " + image.message);
  }
}

}  // namespace flareprox::cli
