#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "facialpulse/features.hpp"
#include "facialpulse/neural.hpp"

namespace facialpulse {

// Per-column standardization fitted on the training set: (x - mean) / scale.
struct FeatureNormalizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static FeatureNormalizer identity(int dimension);
  static FeatureNormalizer fit(const std::vector<Eigen::MatrixXd>& sequences);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& values) const;
};

struct DualStreamMetadata {
  std::uint64_t template_hash = 0;
  int target_len = 300;
  std::uint64_t training_seed = 0;
};

// Stream A regresses on absolute positions, stream B on frame-to-frame
// differences; the final score is the mean of the two.
struct DualStreamModel {
  BiGruRegressor stream_a;
  BiGruRegressor stream_b;
  FeatureNormalizer normalizer_a;
  FeatureNormalizer normalizer_b;
  DualStreamMetadata metadata;

  int input_dim() const noexcept { return stream_a.input_dim(); }
  std::size_t parameter_count() const noexcept {
    return stream_a.parameter_count() + stream_b.parameter_count();
  }
};

struct TrainConfig {
  int epochs = 500;
  double learning_rate = 0.001;
  int batch_size = 8;
  std::uint64_t seed = 0;
  int target_len = 300;
  // Back-propagate through the averaged prediction instead of training
  // each stream against the label on its own.
  bool joint_loss = false;

  int hidden_units = 64;
  Pooling pooling = Pooling::kFinalState;
  double input_dropout = 0.25;
  double hidden_dropout = 0.5;
  double clip_norm = 0.0;  // 0 disables clipping
  bool standardize_inputs = true;
  bool init_head_bias_to_label_mean = true;
  bool train_stream_a = true;
  bool train_stream_b = true;
  std::uint64_t template_hash = 0;

  void validate() const;
};

struct TrainingSample {
  FeatureSequence absolute;
  FeatureSequence differential;
  double label = 0.0;
};

struct LossRecord {
  int epoch = 0;
  std::string stream;  // "a", "b" or "joint"
  double mean_loss = 0.0;
};

struct TrainResult {
  DualStreamModel model;
  std::vector<LossRecord> loss_log;
  AdamState optimizer_a;
  AdamState optimizer_b;
};

// `warm_start`, when given, supplies the initial weights and normalizers
// (they are not refitted).
TrainResult train(const std::vector<TrainingSample>& samples, const TrainConfig& cfg,
                  const DualStreamModel* warm_start = nullptr);

struct StreamPredictions {
  double stream_a = 0.0;
  double stream_b = 0.0;
  double combined = 0.0;
};

StreamPredictions predict_streams(const DualStreamModel& model, const FeatureSequence& absolute,
                                  const FeatureSequence& differential);
double predict(const DualStreamModel& model, const FeatureSequence& absolute,
               const FeatureSequence& differential);

struct EvalResult {
  double rmse = 0.0;
  double mae = 0.0;
  std::vector<double> residuals;  // prediction - label
};

EvalResult evaluate(std::span<const double> predictions, std::span<const double> labels);

// Mean absolute error of always predicting `constant`.
double constant_predictor_mae(std::span<const double> labels, double constant);

}  // namespace facialpulse
