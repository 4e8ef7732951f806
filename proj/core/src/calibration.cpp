#include "facialpulse/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/LU>

#include "facialpulse/error.hpp"
#include "facialpulse/parallel.hpp"

namespace facialpulse {

int validate_landmark_sequence(const LandmarkSequence& frames) {
  if (frames.empty()) fail(ErrorCode::kEmptyInput, "no landmark frames");
  const std::size_t count = frames.front().points.size();
  if (count == 0) fail(ErrorCode::kInvalidArgument, "landmark frame without points");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (f.points.size() != count) {
      fail(ErrorCode::kInconsistentDimensions,
           "frame " + std::to_string(f.frame_index) + " has " + std::to_string(f.points.size()) +
               " points, expected " + std::to_string(count));
    }
    for (const auto& p : f.points) {
      if (!p.allFinite()) {
        fail(ErrorCode::kInvalidArgument, "non-finite landmark in frame " + std::to_string(f.frame_index));
      }
    }
    if (f.frame_index < 0) fail(ErrorCode::kNonMonotoneFrames, "negative frame index");
    if (i > 0 && f.frame_index <= frames[i - 1].frame_index) {
      fail(ErrorCode::kNonMonotoneFrames,
           "frame index " + std::to_string(f.frame_index) + " follows " +
               std::to_string(frames[i - 1].frame_index));
    }
  }
  return static_cast<int>(count);
}

void KalmanConfig::validate() const {
  if (!(process_noise_q >= 0.0)) fail(ErrorCode::kInvalidArgument, "process_noise_q must be >= 0");
  if (!(measurement_noise_r > 0.0)) fail(ErrorCode::kInvalidArgument, "measurement_noise_r must be > 0");
  if (!(reject_inflation >= 1.0)) fail(ErrorCode::kInvalidArgument, "reject_inflation must be >= 1");
}

KalmanTrack kalman_init(const Point2& first_detection, const KalmanConfig& cfg) {
  if (!first_detection.allFinite()) fail(ErrorCode::kInvalidArgument, "non-finite initial detection");
  cfg.validate();
  KalmanTrack track;
  track.mean = first_detection;
  track.cov = cfg.measurement_noise_r * Eigen::Matrix2d::Identity();
  track.config = cfg;
  return track;
}

KalmanTrack kalman_predict(const KalmanTrack& track, const ValidatedFlow& flow) {
  KalmanTrack out = track;
  if (flow.valid) {
    out.mean += flow.flow.as_vector();
    out.cov += track.config.process_noise_q * Eigen::Matrix2d::Identity();
  } else {
    out.cov += track.config.reject_inflation * track.config.process_noise_q *
               Eigen::Matrix2d::Identity();
  }
  return out;
}

KalmanTrack kalman_update(const KalmanTrack& track, const Point2& measurement) {
  if (!measurement.allFinite()) fail(ErrorCode::kInvalidArgument, "non-finite measurement");
  const Eigen::Matrix2d r = track.config.measurement_noise_r * Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d gain = track.cov * (track.cov + r).inverse();
  KalmanTrack out = track;
  out.mean = track.mean + gain * (measurement - track.mean);
  const Eigen::Matrix2d cov = (Eigen::Matrix2d::Identity() - gain) * track.cov;
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

int CalibrationReport::rejected_flow_count() const {
  return std::accumulate(rejected_per_landmark.begin(), rejected_per_landmark.end(), 0);
}

double CalibrationReport::mean_fb_error() const {
  if (mean_fb_error_per_frame.size() < 2) return 0.0;
  const double total =
      std::accumulate(mean_fb_error_per_frame.begin() + 1, mean_fb_error_per_frame.end(), 0.0);
  return total / static_cast<double>(mean_fb_error_per_frame.size() - 1);
}

namespace {

Point2 clamp_to_frame(const Point2& p, const GrayFrame& frame) {
  return {std::clamp(p.x(), 0.0, frame.width() - 1.0), std::clamp(p.y(), 0.0, frame.height() - 1.0)};
}

}  // namespace

CalibrationResult calibrate_sequence(const std::vector<GrayFrame>& frames,
                                     const LandmarkSequence& detections,
                                     const FlowConfig& flow_cfg, const KalmanConfig& kalman_cfg) {
  if (frames.size() != detections.size()) {
    fail(ErrorCode::kLengthMismatch, std::to_string(frames.size()) + " frames but " +
                                         std::to_string(detections.size()) + " detection records");
  }
  if (frames.size() < 2) fail(ErrorCode::kTooShort, "calibration needs at least 2 frames");
  flow_cfg.validate();
  kalman_cfg.validate();
  const int count = validate_landmark_sequence(detections);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].frame_index() != detections[t].frame_index) {
      fail(ErrorCode::kNonMonotoneFrames,
           "frame " + std::to_string(frames[t].frame_index()) + " aligned with detection frame " +
               std::to_string(detections[t].frame_index));
    }
    if (t > 0 && frames[t].frame_index() <= frames[t - 1].frame_index()) {
      fail(ErrorCode::kNonMonotoneFrames, "frame indices not strictly increasing");
    }
    if (!frames[t].pixels().same_shape(frames.front().pixels())) {
      fail(ErrorCode::kDimensionMismatch, "frames differ in size");
    }
  }

  const auto n_points = static_cast<std::size_t>(count);
  CalibrationResult result;
  result.report.frames = static_cast<int>(frames.size());
  result.report.landmarks = count;
  result.report.rejected_per_landmark.assign(n_points, 0);
  result.report.mean_fb_error_per_frame.assign(frames.size(), 0.0);

  std::vector<KalmanTrack> tracks;
  tracks.reserve(n_points);
  for (const auto& p : detections.front().points) tracks.push_back(kalman_init(p, kalman_cfg));
  LandmarkFrame first = detections.front();
  first.source = LandmarkSource::kCalibrated;
  result.calibrated.push_back(std::move(first));

  const PyramidConfig pyr_cfg = flow_cfg.pyramid();
  ImagePyramid prev_pyr = build_pyramid(frames.front(), pyr_cfg);
  std::vector<ValidatedFlow> flows(n_points);
  for (std::size_t t = 1; t < frames.size(); ++t) {
    ImagePyramid next_pyr = build_pyramid(frames[t], pyr_cfg);
    const auto& measured = detections[t].points;
    parallel_for(n_points, [&](std::size_t j) {
      const Point2 from = clamp_to_frame(tracks[j].mean, frames[t - 1]);
      flows[j] = forward_backward_check(prev_pyr, next_pyr, from, flow_cfg);
      tracks[j] = kalman_update(kalman_predict(tracks[j], flows[j]), measured[j]);
    });

    LandmarkFrame out;
    out.frame_index = detections[t].frame_index;
    out.source = LandmarkSource::kCalibrated;
    out.points.reserve(n_points);
    double fb_sum = 0.0;
    int fb_count = 0;
    for (std::size_t j = 0; j < n_points; ++j) {
      out.points.push_back(tracks[j].mean);
      if (!flows[j].valid) ++result.report.rejected_per_landmark[j];
      if (std::isfinite(flows[j].fb_error)) {
        fb_sum += flows[j].fb_error;
        ++fb_count;
      }
    }
    result.report.mean_fb_error_per_frame[t] = fb_count > 0 ? fb_sum / fb_count : 0.0;
    result.calibrated.push_back(std::move(out));
    prev_pyr = std::move(next_pyr);
  }
  return result;
}

}  // namespace facialpulse
