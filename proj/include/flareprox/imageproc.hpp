#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace flareprox::imageproc {

/// Raw attribution magnitudes, row-major.
struct AttributionMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  /// Throws std::invalid_argument on bad dimensions or non-finite values.
  void validate() const;
};

/// 8-bit intensities, row-major.
struct GrayscaleImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  GrayscaleImage() = default;
  GrayscaleImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Integer pixel location (edge pixels, cluster members).
struct PixelIndex {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const PixelIndex&, const PixelIndex&) = default;
};

/// Sorted by (x, y), no duplicates.
using EdgePixelSet = std::vector<PixelIndex>;

/// floor(v + 0.5), the rounding used for every intensity quantization.
inline double round_half_up(double v) { return std::floor(v + 0.5); }

/// Min-max normalization onto [0, scale_to]; a constant map becomes all zero.
GrayscaleImage normalize_scale(const AttributionMap& am, int scale_to = 255);

/// Bilinear resampling to target x target with half-pixel centers and
/// clamp-to-edge. Returns the input unchanged when it is already that size.
GrayscaleImage resize(const GrayscaleImage& img, int target = 512);

/// Parameters of the Canny pipeline. Thresholds apply to the L2 magnitude of
/// the 3x3 Sobel gradient of the Gaussian-smoothed image.
struct CannyParams {
  double low = 30.0;
  double high = 50.0;
  double sigma = 1.4;
  int kernel_size = 5;
};

/// Smoothed image and its Sobel gradient magnitude; exposed for tests.
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> magnitude;
  std::vector<double> gx;
  std::vector<double> gy;
};

GradientField sobel_gradient(const GrayscaleImage& img, double sigma = 1.4, int kernel_size = 5);

/// Gaussian smoothing, Sobel gradients, 4-direction non-maximum suppression
/// and 8-connected double-threshold hysteresis.
EdgePixelSet canny(const GrayscaleImage& img, const CannyParams& params = {});

}  // namespace flareprox::imageproc
