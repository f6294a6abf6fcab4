#include "flareprox/imageproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace flareprox::imageproc {

namespace {

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

std::vector<double> gaussian_kernel(double sigma, int size) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const int half = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - half;
    k[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Separable convolution with clamp-to-edge borders.
std::vector<double> smooth(const GrayscaleImage& img, double sigma, int size) {
  const auto kernel = gaussian_kernel(sigma, size);
  const int half = size / 2;
  const int w = img.width;
  const int h = img.height;
  std::vector<double> tmp(static_cast<std::size_t>(w) * h);
  std::vector<double> out(tmp.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < size; ++k) acc += kernel[k] * img.at(clamp_index(x + k - half, w), y);
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < size; ++k) {
        acc += kernel[k] * tmp[static_cast<std::size_t>(clamp_index(y + k - half, h)) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

}  // namespace

void AttributionMap::validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("attribution map must be at least 1x1");
  if (values.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("attribution map value count does not match dimensions");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw std::invalid_argument("attribution map has a non-finite value at index " +
                                  std::to_string(i));
    }
  }
}

GrayscaleImage normalize_scale(const AttributionMap& am, int scale_to) {
  if (scale_to < 1 || scale_to > 255) throw std::invalid_argument("scale_to must be in [1, 255]");
  GrayscaleImage out(am.width, am.height, 0);
  if (am.values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(am.values.begin(), am.values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < am.values.size(); ++i) {
    const double v = round_half_up(scale_to * ((am.values[i] - lo) / range));
    out.values[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, static_cast<double>(scale_to)));
  }
  return out;
}

GrayscaleImage resize(const GrayscaleImage& img, int target) {
  if (target < 1) throw std::invalid_argument("resize target must be >= 1");
  if (img.width == target && img.height == target) return img;

  const double sx = static_cast<double>(img.width) / target;
  const double sy = static_cast<double>(img.height) / target;
  GrayscaleImage out(target, target);
  for (int y = 0; y < target; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < target; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      const double top = img.at(x0, y0) * (1.0 - wx) + img.at(x1, y0) * wx;
      const double bottom = img.at(x0, y1) * (1.0 - wx) + img.at(x1, y1) * wx;
      const double v = round_half_up(top * (1.0 - wy) + bottom * wy);
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return out;
}

GradientField sobel_gradient(const GrayscaleImage& img, double sigma, int kernel_size) {
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw std::invalid_argument("Gaussian kernel size must be odd and positive");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("Gaussian sigma must be > 0");

  const int w = img.width;
  const int h = img.height;
  const auto s = smooth(img, sigma, kernel_size);
  auto px = [&](int x, int y) {
    return s[static_cast<std::size_t>(clamp_index(y, h)) * w + clamp_index(x, w)];
  };

  GradientField g{w, h, {}, {}, {}};
  const std::size_t n = static_cast<std::size_t>(w) * h;
  g.magnitude.resize(n);
  g.gx.resize(n);
  g.gy.resize(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
      const double dy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      g.gx[i] = dx;
      g.gy[i] = dy;
      g.magnitude[i] = std::hypot(dx, dy);
    }
  }
  return g;
}

EdgePixelSet canny(const GrayscaleImage& img, const CannyParams& params) {
  if (!(0.0 <= params.low && params.low <= params.high && params.high <= 255.0)) {
    throw std::invalid_argument("Canny thresholds must satisfy 0 <= low <= high <= 255");
  }
  const int w = img.width;
  const int h = img.height;
  if (w == 0 || h == 0) return {};

  const auto g = sobel_gradient(img, params.sigma, params.kernel_size);
  auto mag = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
    return g.magnitude[static_cast<std::size_t>(y) * w + x];
  };

  constexpr double kTan22 = 0.41421356237309503;  // tan(22.5 deg)
  constexpr double kTan67 = 2.414213562373095;    // tan(67.5 deg)

  // 0 = not an edge, 1 = weak, 2 = strong
  std::vector<std::uint8_t> state(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double m = g.magnitude[i];
      if (m <= 0.0 || m < params.low) continue;
      const double ax = std::abs(g.gx[i]);
      const double ay = std::abs(g.gy[i]);
      // (dx, dy) points at the neighbor that precedes (x, y) in raster order.
      int dx = 0;
      int dy = 0;
      if (ay <= kTan22 * ax) {
        dx = -1;
      } else if (ay >= kTan67 * ax) {
        dy = -1;
      } else if ((g.gx[i] > 0) == (g.gy[i] > 0)) {
        dx = -1;
        dy = -1;
      } else {
        dx = 1;
        dy = -1;
      }
      if (m > mag(x + dx, y + dy) && m >= mag(x - dx, y - dy)) {
        state[i] = m >= params.high ? 2 : 1;
      }
    }
  }

  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i] == 2) stack.push_back(i);
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % w);
    const int y = static_cast<int>(i / w);
    for (int ny = std::max(y - 1, 0); ny <= std::min(y + 1, h - 1); ++ny) {
      for (int nx = std::max(x - 1, 0); nx <= std::min(x + 1, w - 1); ++nx) {
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (state[j] == 1) {
          state[j] = 2;
          stack.push_back(j);
        }
      }
    }
  }

  EdgePixelSet edges;
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) {
      if (state[static_cast<std::size_t>(y) * w + x] == 2) edges.push_back({x, y});
    }
  }
  return edges;
}

}  // namespace flareprox::imageproc
