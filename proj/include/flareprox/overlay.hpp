#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "flareprox/geometry.hpp"
#include "flareprox/imageproc.hpp"
#include "flareprox/regions.hpp"

namespace flareprox::cli {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kBoxColor{255, 255, 0};
inline constexpr Rgb kArInsideColor{0, 255, 0};
inline constexpr Rgb kArOutsideColor{255, 0, 0};
inline constexpr Rgb kFlareColor{0, 128, 255};

/// Side of the square AR marker and of the diagonal-cross flare marker.
inline constexpr int kMarkerSize = 5;

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // interleaved RGB, row-major

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  Rgb at(int x, int y) const;
  void set(int x, int y, const Rgb& c);
};

/// round(0.5 * magnetogram + 0.5 * attribution), half up.
imageproc::GrayscaleImage blend(const imageproc::GrayscaleImage& magnetogram,
                                const imageproc::GrayscaleImage& attribution);

/// Blended base layer with region boxes stroked, ARs marked green when inside
/// a region and red otherwise, and flare locations drawn as crosses.
/// Throws std::invalid_argument when the two images differ in size.
RgbImage render_overlay(const imageproc::GrayscaleImage& magnetogram,
                        const imageproc::GrayscaleImage& attribution,
                        std::span<const regions::BoundingRegion> regions,
                        std::span<const geometry::PixelPoint> ars_pix,
                        std::span<const geometry::PixelPoint> fls_pix);

void write_png(const std::filesystem::path& path, const RgbImage& img);

}  // namespace flareprox::cli
