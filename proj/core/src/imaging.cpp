#include "facialpulse/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "facialpulse/error.hpp"

namespace facialpulse {

RealGrid::RealGrid(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    fail(ErrorCode::kInvalidArgument, "grid dimensions must be positive, got " +
                                          std::to_string(width) + "x" + std::to_string(height));
  }
  values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

RealGrid::RealGrid(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width < 1 || height < 1) {
    fail(ErrorCode::kInvalidArgument, "grid dimensions must be positive, got " +
                                          std::to_string(width) + "x" + std::to_string(height));
  }
  if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    fail(ErrorCode::kDimensionMismatch,
         "grid of " + std::to_string(width) + "x" + std::to_string(height) + " given " +
             std::to_string(values_.size()) + " values");
  }
}

double RealGrid::at_clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return values_[index(x, y)];
}

GrayFrame::GrayFrame(RealGrid pixels, int frame_index) : pixels_(std::move(pixels)) {
  for (double v : pixels_.values()) {
    if (!std::isfinite(v) || v < 0.0 || v > 255.0) {
      fail(ErrorCode::kInvalidArgument, "frame intensity outside [0, 255]: " + std::to_string(v));
    }
  }
  set_frame_index(frame_index);
}

GrayFrame::GrayFrame(int width, int height, std::vector<double> intensities, int frame_index)
    : GrayFrame(RealGrid(width, height, std::move(intensities)), frame_index) {}

void GrayFrame::set_frame_index(int index) {
  if (index < 0) fail(ErrorCode::kInvalidArgument, "negative frame index");
  frame_index_ = index;
}

std::vector<double> gaussian_kernel(int radius, double sigma) {
  if (radius < 1) fail(ErrorCode::kInvalidArgument, "kernel radius must be >= 1");
  if (!(sigma > 0.0)) fail(ErrorCode::kInvalidArgument, "kernel sigma must be > 0");
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i * i) / (sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = w;
    total += w;
  }
  for (double& w : taps) w /= total;
  return taps;
}

GrayFrame gaussian_blur(const GrayFrame& frame, int kernel_radius, double sigma) {
  const auto taps = gaussian_kernel(kernel_radius, sigma);
  const RealGrid& src = frame.pixels();
  const int w = src.width();
  const int h = src.height();

  RealGrid rows(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -kernel_radius; k <= kernel_radius; ++k) {
        acc += taps[static_cast<std::size_t>(k + kernel_radius)] * src.at_clamped(x + k, y);
      }
      rows.at(x, y) = acc;
    }
  }
  RealGrid out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -kernel_radius; k <= kernel_radius; ++k) {
        acc += taps[static_cast<std::size_t>(k + kernel_radius)] * rows.at_clamped(x, y + k);
      }
      // Convex combination of [0, 255] values; clamp only absorbs rounding.
      out.at(x, y) = std::clamp(acc, 0.0, 255.0);
    }
  }
  return GrayFrame(std::move(out), frame.frame_index());
}

int scaled_side(int side, double scale_factor) {
  return static_cast<int>(std::ceil(side * scale_factor - 1e-9));
}

ImagePyramid build_pyramid(const GrayFrame& frame, const PyramidConfig& config) {
  if (config.num_levels < 1) fail(ErrorCode::kInvalidArgument, "num_levels must be >= 1");
  if (!(config.scale_factor > 0.0 && config.scale_factor < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "scale_factor must lie in (0, 1)");
  }

  int w = frame.width();
  int h = frame.height();
  for (int level = 0; level < config.num_levels; ++level) {
    if (w < kMinPyramidLevelSide || h < kMinPyramidLevelSide) {
      fail(ErrorCode::kPyramidTooDeep,
           "level " + std::to_string(level) + " would be " + std::to_string(w) + "x" +
               std::to_string(h) + ", below the 8x8 minimum; reduce num_levels");
    }
    w = scaled_side(w, config.scale_factor);
    h = scaled_side(h, config.scale_factor);
  }

  ImagePyramid pyramid;
  pyramid.scale_factor = config.scale_factor;
  pyramid.levels.reserve(static_cast<std::size_t>(config.num_levels));
  pyramid.levels.push_back(frame);
  const double inv_scale = 1.0 / config.scale_factor;
  for (int level = 1; level < config.num_levels; ++level) {
    const GrayFrame blurred =
        gaussian_blur(pyramid.levels.back(), config.blur_radius, config.blur_sigma);
    const int nw = scaled_side(blurred.width(), config.scale_factor);
    const int nh = scaled_side(blurred.height(), config.scale_factor);
    RealGrid down(nw, nh);
    for (int y = 0; y < nh; ++y) {
      for (int x = 0; x < nw; ++x) {
        down.at(x, y) = std::clamp(sample_bilinear(blurred, x * inv_scale, y * inv_scale), 0.0, 255.0);
      }
    }
    pyramid.levels.emplace_back(std::move(down), frame.frame_index());
  }
  pyramid.gradients.reserve(pyramid.levels.size());
  for (const auto& level : pyramid.levels) pyramid.gradients.push_back(spatial_gradients(level));
  return pyramid;
}

ImagePyramid build_pyramid(const GrayFrame& frame, int num_levels, double scale_factor) {
  PyramidConfig config;
  config.num_levels = num_levels;
  config.scale_factor = scale_factor;
  return build_pyramid(frame, config);
}

GradientField spatial_gradients(const RealGrid& grid) {
  const int w = grid.width();
  const int h = grid.height();
  if (w < 3 || h < 3) fail(ErrorCode::kInvalidArgument, "spatial_gradients needs at least 3x3");
  GradientField field{RealGrid(w, h), RealGrid(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double gx;
      if (x == 0) {
        gx = grid.at(1, y) - grid.at(0, y);
      } else if (x == w - 1) {
        gx = grid.at(w - 1, y) - grid.at(w - 2, y);
      } else {
        gx = 0.5 * (grid.at(x + 1, y) - grid.at(x - 1, y));
      }
      double gy;
      if (y == 0) {
        gy = grid.at(x, 1) - grid.at(x, 0);
      } else if (y == h - 1) {
        gy = grid.at(x, h - 1) - grid.at(x, h - 2);
      } else {
        gy = 0.5 * (grid.at(x, y + 1) - grid.at(x, y - 1));
      }
      field.ix.at(x, y) = gx;
      field.iy.at(x, y) = gy;
    }
  }
  return field;
}

RealGrid temporal_difference(const GrayFrame& prev, const GrayFrame& next) {
  if (!prev.pixels().same_shape(next.pixels())) {
    fail(ErrorCode::kDimensionMismatch,
         "temporal_difference of " + std::to_string(prev.width()) + "x" +
             std::to_string(prev.height()) + " and " + std::to_string(next.width()) + "x" +
             std::to_string(next.height()) + " frames");
  }
  RealGrid out(prev.width(), prev.height());
  const auto& a = prev.pixels().values();
  const auto& b = next.pixels().values();
  auto& o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = b[i] - a[i];
  return out;
}

double sample_bilinear(const RealGrid& grid, double x, double y) {
  const double max_x = grid.width() - 1;
  const double max_y = grid.height() - 1;
  x = std::clamp(x, 0.0, max_x);
  y = std::clamp(y, 0.0, max_y);
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, grid.width() - 1);
  const int y1 = std::min(y0 + 1, grid.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = grid.at(x0, y0) + fx * (grid.at(x1, y0) - grid.at(x0, y0));
  const double bottom = grid.at(x0, y1) + fx * (grid.at(x1, y1) - grid.at(x0, y1));
  return top + fy * (bottom - top);
}

}  // namespace facialpulse
