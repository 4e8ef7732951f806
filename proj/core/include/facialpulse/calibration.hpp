#pragma once

#include <vector>

#include <Eigen/Core>

#include "facialpulse/flow.hpp"
#include "facialpulse/imaging.hpp"
#include "facialpulse/landmarks.hpp"

namespace facialpulse {

struct KalmanConfig {
  double process_noise_q = 0.25;     // px^2 per axis per frame
  double measurement_noise_r = 1.0;  // px^2 per axis
  double reject_inflation = 4.0;     // process-noise multiplier for discarded flow

  void validate() const;
};

// Position-only filter for one landmark. The validated flow enters as a
// known motion increment; the detector reading is the measurement.
struct KalmanTrack {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
  KalmanConfig config;
};

KalmanTrack kalman_init(const Point2& first_detection, const KalmanConfig& cfg);
KalmanTrack kalman_predict(const KalmanTrack& track, const ValidatedFlow& flow);
KalmanTrack kalman_update(const KalmanTrack& track, const Point2& measurement);

struct CalibrationReport {
  int frames = 0;
  int landmarks = 0;
  std::vector<int> rejected_per_landmark;
  // Index t holds the mean finite forward-backward error for the step
  // t-1 -> t; entry 0 is 0 because frame 0 passes through.
  std::vector<double> mean_fb_error_per_frame;

  int rejected_flow_count() const;
  double mean_fb_error() const;
};

struct CalibrationResult {
  LandmarkSequence calibrated;
  CalibrationReport report;
};

CalibrationResult calibrate_sequence(const std::vector<GrayFrame>& frames,
                                     const LandmarkSequence& detections,
                                     const FlowConfig& flow_cfg, const KalmanConfig& kalman_cfg);

}  // namespace facialpulse
