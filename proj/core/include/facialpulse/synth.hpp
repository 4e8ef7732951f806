#pragma once

#include <cstdint>
#include <vector>

#include "facialpulse/imaging.hpp"
#include "facialpulse/landmarks.hpp"

namespace facialpulse {

struct TrajectoryConfig {
  int num_frames = 300;
  int num_landmarks = kDefaultLandmarkCount;  // first N points of the standard template
  int width = 256;                            // frame the base layout is scaled into
  int height = 256;
  double motion_amplitude = 2.0;   // scale of the Gaussian steps, px
  double motion_smoothness = 0.9;  // in (0, 1]; 1 freezes every landmark
  double jitter_sigma = 2.0;
  double outlier_rate = 0.05;
  double outlier_magnitude = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Preset used by the calibration benchmark: 300 frames, 68 landmarks,
// motion amplitude 8 at smoothness 0.9 (about 1 px per frame), 2 px jitter,
// 5 % outliers at 10 px.
TrajectoryConfig calibration_bench_config(std::uint64_t seed);

// Standard template scaled into the frame (unit square -> min(W, H),
// centered).
std::vector<Point2> base_layout(const TrajectoryConfig& cfg);

// Every landmark axis is an exponential moving average of i.i.d. Gaussian
// steps, y_t = s y_{t-1} + (1 - s) A e_t, started in its stationary
// distribution (std A sqrt((1 - s) / (1 + s))). Both the spread and the
// frame-to-frame motion shrink as s -> 1; s = 1 freezes the base layout.
LandmarkSequence gen_trajectory(const TrajectoryConfig& cfg);

struct NoisyDetections {
  LandmarkSequence frames;
  std::vector<std::vector<bool>> outliers;  // [frame][landmark]
};

// Jitter of jitter_sigma on every point; with probability outlier_rate the
// offset is instead outlier_magnitude in a uniformly random direction.
NoisyDetections add_detection_noise(const LandmarkSequence& truth, const TrajectoryConfig& cfg);

struct RenderConfig {
  int width = 256;
  int height = 256;
  double blob_sigma = 2.5;
  double blob_peak = 200.0;
  double background = 64.0;
  double texture_amplitude = 10.0;
  std::uint64_t texture_seed = 0x7E97E9ULL;
};

// Static low-frequency texture added under the blobs; values within
// +-texture_amplitude.
RealGrid texture_field(const RenderConfig& cfg);

// Throws kOutOfBounds when a landmark is closer than 3 blob sigmas to the
// frame border.
std::vector<GrayFrame> render_frames(const LandmarkSequence& truth, const RenderConfig& cfg);

struct SynthSample {
  LandmarkSequence ground_truth;
  LandmarkSequence noisy_detections;
  std::vector<std::vector<bool>> outliers;
  std::vector<GrayFrame> frames;  // empty unless rendering was requested
  double smoothness = 0.0;
  double label = 0.0;
};

struct RegressionDatasetConfig {
  int num_frames = 64;
  int num_landmarks = kDefaultLandmarkCount;
  int width = 256;
  int height = 256;
  double motion_amplitude = 2.0;
  double smoothness_min = 0.1;
  double smoothness_max = 1.0;
  double jitter_sigma = 0.25;
  double outlier_rate = 0.0;
  double outlier_magnitude = 10.0;
  bool render = false;
  double blob_sigma = 2.5;
};

inline constexpr double kMaxSeverityLabel = 63.0;

// Severity label as an affine function of smoothness: 0.1 -> 0, 1.0 -> 63.
double smoothness_to_label(double smoothness);

// Per-sample seed: derive_seed(seed, {sample tag, index}).
std::uint64_t sample_seed(std::uint64_t seed, std::size_t index);

std::vector<SynthSample> gen_regression_dataset(int n_samples, const RegressionDatasetConfig& cfg,
                                                std::uint64_t seed);

}  // namespace facialpulse
