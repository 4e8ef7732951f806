#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "facialpulse/imaging.hpp"
#include "facialpulse/synth.hpp"

namespace scenes {

using facialpulse::GrayFrame;
using facialpulse::Point2;

// Blobs at `points` over the synthetic textured background.
inline GrayFrame render(const std::vector<Point2>& points, int width, int height, std::uint64_t texture_seed,
                        double texture_amplitude = 10.0) {
  facialpulse::LandmarkFrame f;
  f.points = points;
  facialpulse::RenderConfig cfg;
  cfg.width = width;
  cfg.height = height;
  cfg.texture_seed = texture_seed;
  cfg.texture_amplitude = texture_amplitude;
  return facialpulse::render_frames({f}, cfg).front();
}

inline std::vector<Point2> shifted(std::vector<Point2> points, const Point2& by) {
  for (auto& p : points) p += by;
  return points;
}

// 68-point face layout in a 256 x 256 frame.
inline std::vector<Point2> face_layout() {
  facialpulse::TrajectoryConfig cfg;
  return facialpulse::base_layout(cfg);
}

inline GrayFrame uniform_noise(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  std::vector<double> px(static_cast<std::size_t>(width * height));
  for (double& v : px) v = u(rng);
  return GrayFrame(width, height, std::move(px));
}

}  // namespace scenes
