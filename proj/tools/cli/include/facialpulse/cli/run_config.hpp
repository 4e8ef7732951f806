#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "facialpulse/calibration.hpp"
#include "facialpulse/features.hpp"
#include "facialpulse/flow.hpp"
#include "facialpulse/pipeline.hpp"

namespace facialpulse::cli {

struct PathConfig {
  std::optional<std::string> frames;
  std::optional<std::string> landmarks;
  std::optional<std::string> out;
  std::optional<std::string> report;
  std::optional<std::string> out_a;
  std::optional<std::string> out_b;
  std::optional<std::string> manifest;
  std::optional<std::string> model_out;
  std::optional<std::string> log_out;
  std::optional<std::string> model;
  std::optional<std::string> a;
  std::optional<std::string> b;
  std::optional<std::string> predictions;
  std::optional<std::string> labels;
};

// Overrides applied on top of a synth preset; unset fields keep the
// preset's value.
struct SynthOverrides {
  std::optional<int> num_samples;
  std::optional<int> num_frames;
  std::optional<int> num_landmarks;
  std::optional<int> width;
  std::optional<int> height;
  std::optional<double> motion_amplitude;
  std::optional<double> motion_smoothness;
  std::optional<double> smoothness_min;
  std::optional<double> smoothness_max;
  std::optional<double> jitter_sigma;
  std::optional<double> outlier_rate;
  std::optional<double> outlier_magnitude;
  std::optional<double> blob_sigma;
  std::optional<double> train_fraction;
};

struct RunConfig {
  std::uint64_t seed = 0;
  FlowConfig flow;
  KalmanConfig kalman;
  std::string template_name = "standard68";
  AlignmentMode alignment = AlignmentMode::kSimilarity;
  TrainConfig train;
  PathConfig paths;
  SynthOverrides synth;
};

// JSON document; every key optional. Unknown keys and wrongly typed values
// throw kFormat naming the dotted key path.
RunConfig parse_run_config(const std::string& text, const std::string& source_name);
RunConfig load_run_config(const std::string& path);

AlignmentTemplate resolve_template(const std::string& name);

}  // namespace facialpulse::cli
