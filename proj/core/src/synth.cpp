#include "facialpulse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "facialpulse/error.hpp"
#include "facialpulse/features.hpp"
#include "facialpulse/parallel.hpp"
#include "facialpulse/random.hpp"

namespace facialpulse {
namespace {

constexpr std::uint64_t kTagTrajectory = 11;
constexpr std::uint64_t kTagNoise = 12;
constexpr std::uint64_t kTagSample = 13;
constexpr std::uint64_t kTagSmoothness = 14;
constexpr std::uint64_t kTagTexture = 15;

}  // namespace

void TrajectoryConfig::validate() const {
  if (num_frames < 2) fail(ErrorCode::kInvalidArgument, "num_frames must be >= 2");
  if (num_landmarks < 2 || num_landmarks > kDefaultLandmarkCount) {
    fail(ErrorCode::kInvalidArgument, "num_landmarks must lie in [2, 68]");
  }
  if (width < 16 || height < 16) fail(ErrorCode::kInvalidArgument, "frame must be at least 16x16");
  if (!(motion_amplitude >= 0.0) || !(jitter_sigma >= 0.0) || !(outlier_magnitude >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "amplitudes and sigmas must be >= 0");
  }
  if (!(motion_smoothness > 0.0 && motion_smoothness <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "motion_smoothness must lie in (0, 1]");
  }
  if (!(outlier_rate >= 0.0 && outlier_rate <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "outlier_rate must lie in [0, 1]");
  }
}

TrajectoryConfig calibration_bench_config(std::uint64_t seed) {
  TrajectoryConfig cfg;
  cfg.num_frames = 300;
  cfg.num_landmarks = 68;
  cfg.width = 256;
  cfg.height = 256;
  cfg.motion_amplitude = 8.0;
  cfg.motion_smoothness = 0.9;
  cfg.jitter_sigma = 2.0;
  cfg.outlier_rate = 0.05;
  cfg.outlier_magnitude = 10.0;
  cfg.seed = seed;
  return cfg;
}

std::vector<Point2> base_layout(const TrajectoryConfig& cfg) {
  const auto templ = AlignmentTemplate::standard68();
  const double side = std::min(cfg.width, cfg.height);
  const Point2 offset{0.5 * (cfg.width - side), 0.5 * (cfg.height - side)};
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(cfg.num_landmarks));
  for (int j = 0; j < cfg.num_landmarks; ++j) {
    pts.push_back(templ.canonical_points[static_cast<std::size_t>(j)] * side + offset);
  }
  return pts;
}

LandmarkSequence gen_trajectory(const TrajectoryConfig& cfg) {
  cfg.validate();
  const auto base = base_layout(cfg);
  std::mt19937_64 rng(derive_seed(cfg.seed, {kTagTrajectory}));
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double s = cfg.motion_smoothness;
  const double gain = (1.0 - s) * cfg.motion_amplitude;
  // Start in the stationary distribution so early frames look like late ones.
  const double stationary = cfg.motion_amplitude * std::sqrt((1.0 - s) / (1.0 + s));

  std::vector<Point2> offset(base.size());
  for (auto& o : offset) o = Point2{gauss(rng), gauss(rng)} * stationary;

  LandmarkSequence frames;
  frames.reserve(static_cast<std::size_t>(cfg.num_frames));
  for (int t = 0; t < cfg.num_frames; ++t) {
    if (t > 0) {
      for (auto& o : offset) o = s * o + gain * Point2{gauss(rng), gauss(rng)};
    }
    LandmarkFrame f;
    f.frame_index = t;
    f.points.reserve(base.size());
    for (std::size_t j = 0; j < base.size(); ++j) f.points.push_back(base[j] + offset[j]);
    frames.push_back(std::move(f));
  }
  return frames;
}

NoisyDetections add_detection_noise(const LandmarkSequence& truth, const TrajectoryConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(derive_seed(cfg.seed, {kTagNoise}));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  NoisyDetections out;
  out.frames.reserve(truth.size());
  out.outliers.reserve(truth.size());
  for (const auto& f : truth) {
    LandmarkFrame noisy = f;
    noisy.source = LandmarkSource::kDetected;
    std::vector<bool> flags(f.points.size(), false);
    for (std::size_t j = 0; j < f.points.size(); ++j) {
      // Fixed draw count per point keeps the stream aligned across configs.
      const double pick = unit(rng);
      const double angle = 2.0 * std::numbers::pi * unit(rng);
      const Point2 jitter{gauss(rng), gauss(rng)};
      if (pick < cfg.outlier_rate) {
        noisy.points[j] += cfg.outlier_magnitude * Point2{std::cos(angle), std::sin(angle)};
        flags[j] = true;
      } else {
        noisy.points[j] += cfg.jitter_sigma * jitter;
      }
    }
    out.frames.push_back(std::move(noisy));
    out.outliers.push_back(std::move(flags));
  }
  return out;
}

RealGrid texture_field(const RenderConfig& cfg) {
  constexpr int kComponents = 4;
  std::mt19937_64 rng(derive_seed(cfg.texture_seed, {kTagTexture}));
  std::uniform_real_distribution<double> wavelength(24.0, 64.0);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  struct Wave {
    double kx, ky, phase;
  };
  std::vector<Wave> waves;
  for (int c = 0; c < kComponents; ++c) {
    const double k = 2.0 * std::numbers::pi / wavelength(rng);
    const double a = angle(rng);
    waves.push_back({k * std::cos(a), k * std::sin(a), phase(rng)});
  }
  const double amp = cfg.texture_amplitude / kComponents;
  RealGrid field(cfg.width, cfg.height);
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      double v = 0.0;
      for (const auto& w : waves) v += std::sin(w.kx * x + w.ky * y + w.phase);
      field.at(x, y) = amp * v;
    }
  }
  return field;
}

std::vector<GrayFrame> render_frames(const LandmarkSequence& truth, const RenderConfig& cfg) {
  if (!(cfg.blob_sigma > 0.0)) fail(ErrorCode::kInvalidArgument, "blob_sigma must be > 0");
  const double margin = 3.0 * cfg.blob_sigma;
  for (const auto& f : truth) {
    for (std::size_t j = 0; j < f.points.size(); ++j) {
      const auto& p = f.points[j];
      if (!(p.x() >= margin && p.y() >= margin && p.x() <= cfg.width - 1 - margin &&
            p.y() <= cfg.height - 1 - margin)) {
        fail(ErrorCode::kOutOfBounds, "landmark " + std::to_string(j) + " of frame " +
                                          std::to_string(f.frame_index) + " within " +
                                          std::to_string(margin) + " px of the border");
      }
    }
  }

  RealGrid background = texture_field(cfg);
  for (double& v : background.values()) v += cfg.background;

  const int reach = static_cast<int>(std::ceil(4.0 * cfg.blob_sigma));
  const double inv_two_var = 1.0 / (2.0 * cfg.blob_sigma * cfg.blob_sigma);
  std::vector<GrayFrame> frames(truth.size());
  parallel_for(truth.size(), [&](std::size_t t) {
    RealGrid canvas = background;
    for (const auto& p : truth[t].points) {
      const int cx = static_cast<int>(std::lround(p.x()));
      const int cy = static_cast<int>(std::lround(p.y()));
      for (int y = std::max(0, cy - reach); y <= std::min(cfg.height - 1, cy + reach); ++y) {
        for (int x = std::max(0, cx - reach); x <= std::min(cfg.width - 1, cx + reach); ++x) {
          const double dx = x - p.x();
          const double dy = y - p.y();
          canvas.at(x, y) += cfg.blob_peak * std::exp(-(dx * dx + dy * dy) * inv_two_var);
        }
      }
    }
    for (double& v : canvas.values()) v = std::clamp(v, 0.0, 255.0);
    frames[t] = GrayFrame(std::move(canvas), truth[t].frame_index);
  });
  return frames;
}

double smoothness_to_label(double smoothness) {
  return std::clamp(70.0 * (smoothness - 0.1), 0.0, kMaxSeverityLabel);
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t index) {
  return derive_seed(seed, {kTagSample, static_cast<std::uint64_t>(index)});
}

std::vector<SynthSample> gen_regression_dataset(int n_samples, const RegressionDatasetConfig& cfg,
                                                std::uint64_t seed) {
  if (n_samples < 2) fail(ErrorCode::kInvalidArgument, "n_samples must be >= 2");
  if (!(cfg.smoothness_min > 0.0 && cfg.smoothness_min <= cfg.smoothness_max &&
        cfg.smoothness_max <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "smoothness range must satisfy 0 < min <= max <= 1");
  }
  std::vector<SynthSample> samples(static_cast<std::size_t>(n_samples));
  parallel_for(samples.size(), [&](std::size_t i) {
    const std::uint64_t s_seed = sample_seed(seed, i);
    std::mt19937_64 rng(derive_seed(s_seed, {kTagSmoothness}));
    std::uniform_real_distribution<double> smooth(cfg.smoothness_min, cfg.smoothness_max);

    TrajectoryConfig traj;
    traj.num_frames = cfg.num_frames;
    traj.num_landmarks = cfg.num_landmarks;
    traj.width = cfg.width;
    traj.height = cfg.height;
    traj.motion_amplitude = cfg.motion_amplitude;
    traj.motion_smoothness = smooth(rng);
    traj.jitter_sigma = cfg.jitter_sigma;
    traj.outlier_rate = cfg.outlier_rate;
    traj.outlier_magnitude = cfg.outlier_magnitude;
    traj.seed = s_seed;

    SynthSample& sample = samples[i];
    sample.smoothness = traj.motion_smoothness;
    sample.label = smoothness_to_label(traj.motion_smoothness);
    sample.ground_truth = gen_trajectory(traj);
    auto noisy = add_detection_noise(sample.ground_truth, traj);
    sample.noisy_detections = std::move(noisy.frames);
    sample.outliers = std::move(noisy.outliers);
    if (cfg.render) {
      RenderConfig render;
      render.width = cfg.width;
      render.height = cfg.height;
      render.blob_sigma = cfg.blob_sigma;
      render.texture_seed = s_seed;
      sample.frames = render_frames(sample.ground_truth, render);
    }
  });
  return samples;
}

}  // namespace facialpulse
