#pragma once

#include <cstddef>
#include <vector>

namespace facialpulse {

// Row-major grid of reals. Unlike GrayFrame it carries no range constraint,
// so it also holds gradients and temporal differences.
class RealGrid {
 public:
  RealGrid() = default;
  RealGrid(int width, int height, double fill = 0.0);
  RealGrid(int width, int height, std::vector<double> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  double at(int x, int y) const { return values_[index(x, y)]; }
  double& at(int x, int y) { return values_[index(x, y)]; }

  // Clamp-to-edge lookup.
  double at_clamped(int x, int y) const;

  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  bool same_shape(const RealGrid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

// One grayscale video frame: finite intensities in [0, 255].
class GrayFrame {
 public:
  GrayFrame() = default;
  GrayFrame(RealGrid pixels, int frame_index = 0);
  GrayFrame(int width, int height, std::vector<double> intensities, int frame_index = 0);

  int width() const noexcept { return pixels_.width(); }
  int height() const noexcept { return pixels_.height(); }
  int frame_index() const noexcept { return frame_index_; }
  void set_frame_index(int index);

  double at(int x, int y) const { return pixels_.at(x, y); }
  const RealGrid& pixels() const noexcept { return pixels_; }

 private:
  RealGrid pixels_;
  int frame_index_ = 0;
};

struct GradientField {
  RealGrid ix;
  RealGrid iy;
};

struct PyramidConfig {
  int num_levels = 3;
  double scale_factor = 0.5;
  int blur_radius = 2;
  double blur_sigma = 1.0;
};

inline constexpr int kMinPyramidLevelSide = 8;

// Gaussian pyramid from finest (level 0) to coarsest, with the spatial
// gradient field of every level precomputed for the flow solver.
struct ImagePyramid {
  std::vector<GrayFrame> levels;
  std::vector<GradientField> gradients;
  double scale_factor = 0.5;

  int num_levels() const noexcept { return static_cast<int>(levels.size()); }
};

GrayFrame gaussian_blur(const GrayFrame& frame, int kernel_radius = 2, double sigma = 1.0);

// Normalized 1-D Gaussian taps, length 2 * radius + 1.
std::vector<double> gaussian_kernel(int radius, double sigma);

// ceil(side * scale), tolerant of representation error in the product.
int scaled_side(int side, double scale_factor);

ImagePyramid build_pyramid(const GrayFrame& frame, int num_levels, double scale_factor);
ImagePyramid build_pyramid(const GrayFrame& frame, const PyramidConfig& config);

GradientField spatial_gradients(const RealGrid& grid);
inline GradientField spatial_gradients(const GrayFrame& frame) {
  return spatial_gradients(frame.pixels());
}

RealGrid temporal_difference(const GrayFrame& prev, const GrayFrame& next);

// Bilinear interpolation with coordinates clamped to the grid.
double sample_bilinear(const RealGrid& grid, double x, double y);
inline double sample_bilinear(const GrayFrame& frame, double x, double y) {
  return sample_bilinear(frame.pixels(), x, y);
}

}  // namespace facialpulse
