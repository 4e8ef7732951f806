#include "facialpulse/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "facialpulse/error.hpp"
#include "facialpulse/parallel.hpp"
#include "facialpulse/random.hpp"

namespace facialpulse {
namespace {

constexpr std::uint64_t kTagInitA = 1;
constexpr std::uint64_t kTagInitB = 2;
constexpr std::uint64_t kTagShuffle = 3;
constexpr std::uint64_t kTagDropout = 4;

}  // namespace

FeatureNormalizer FeatureNormalizer::identity(int dimension) {
  return {Eigen::RowVectorXd::Zero(dimension), Eigen::RowVectorXd::Ones(dimension)};
}

FeatureNormalizer FeatureNormalizer::fit(const std::vector<Eigen::MatrixXd>& sequences) {
  if (sequences.empty()) fail(ErrorCode::kEmptyDataset, "cannot fit a normalizer on no data");
  const Eigen::Index dim = sequences.front().cols();
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(dim);
  double rows = 0.0;
  for (const auto& s : sequences) {
    sum += s.colwise().sum();
    rows += static_cast<double>(s.rows());
  }
  FeatureNormalizer norm;
  norm.mean = sum / rows;
  Eigen::RowVectorXd sq = Eigen::RowVectorXd::Zero(dim);
  for (const auto& s : sequences) sq += (s.rowwise() - norm.mean).array().square().matrix().colwise().sum();
  norm.scale = (sq / rows).array().sqrt().matrix();
  for (Eigen::Index c = 0; c < dim; ++c) {
    if (!(norm.scale(c) > 1e-12)) norm.scale(c) = 1.0;
  }
  return norm;
}

Eigen::MatrixXd FeatureNormalizer::apply(const Eigen::MatrixXd& values) const {
  if (values.cols() != mean.size()) {
    fail(ErrorCode::kDimensionMismatch, "normalizer expects " + std::to_string(mean.size()) +
                                            " columns, got " + std::to_string(values.cols()));
  }
  return ((values.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) fail(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (!(learning_rate > 0.0)) fail(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  if (target_len < 2) fail(ErrorCode::kInvalidArgument, "target_len must be >= 2");
  if (hidden_units < 1) fail(ErrorCode::kInvalidArgument, "hidden_units must be >= 1");
  if (clip_norm < 0.0) fail(ErrorCode::kInvalidArgument, "clip_norm must be >= 0");
  if (joint_loss && !(train_stream_a && train_stream_b)) {
    fail(ErrorCode::kInvalidArgument, "joint loss trains both streams");
  }
}

namespace {

std::vector<Eigen::MatrixXd> resample_all(const std::vector<TrainingSample>& samples, bool absolute,
                                          int target_len) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(temporal_resample(absolute ? s.absolute : s.differential, target_len).values);
  }
  return out;
}

void clip(BiGruWeights& grads, double clip_norm) {
  if (clip_norm <= 0.0) return;
  const double norm = std::sqrt(grads.squared_norm());
  if (norm > clip_norm) grads *= clip_norm / norm;
}

struct SampleStep {
  double loss = 0.0;
  BiGruWeights grad_a;
  BiGruWeights grad_b;
};

}  // namespace

TrainResult train(const std::vector<TrainingSample>& samples, const TrainConfig& cfg,
                  const DualStreamModel* warm_start) {
  cfg.validate();
  if (samples.empty()) fail(ErrorCode::kEmptyDataset, "no training samples");
  const int dim = samples.front().absolute.dimension();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.absolute.dimension() != dim || s.differential.dimension() != dim) {
      fail(ErrorCode::kInconsistentDimensions,
           "sample " + std::to_string(i) + " has feature width " + std::to_string(s.absolute.dimension()) +
               "/" + std::to_string(s.differential.dimension()) + ", expected " + std::to_string(dim));
    }
    if (s.absolute.length() < 1 || s.differential.length() < 1) {
      fail(ErrorCode::kEmptySequence, "sample " + std::to_string(i) + " has an empty stream");
    }
    if (!std::isfinite(s.label)) fail(ErrorCode::kInvalidArgument, "non-finite label on sample " + std::to_string(i));
  }
  if (warm_start != nullptr && warm_start->input_dim() != dim) {
    fail(ErrorCode::kInconsistentDimensions, "warm-start model width differs from the data");
  }

  std::vector<Eigen::MatrixXd> raw_a = resample_all(samples, true, cfg.target_len);
  std::vector<Eigen::MatrixXd> raw_b = resample_all(samples, false, cfg.target_len);

  TrainResult result;
  DualStreamModel& model = result.model;
  if (warm_start != nullptr) {
    model = *warm_start;
  } else {
    model.stream_a = init_bigru(dim, cfg.hidden_units, derive_seed(cfg.seed, {kTagInitA}));
    model.stream_b = init_bigru(dim, cfg.hidden_units, derive_seed(cfg.seed, {kTagInitB}));
    for (auto* stream : {&model.stream_a, &model.stream_b}) {
      stream->input_dropout_rate = cfg.input_dropout;
      stream->hidden_dropout_rate = cfg.hidden_dropout;
      stream->pooling = cfg.pooling;
    }
    if (cfg.init_head_bias_to_label_mean) {
      double mean_label = 0.0;
      for (const auto& s : samples) mean_label += s.label;
      mean_label /= static_cast<double>(samples.size());
      model.stream_a.weights.head_b = mean_label;
      model.stream_b.weights.head_b = mean_label;
    }
    model.normalizer_a = cfg.standardize_inputs ? FeatureNormalizer::fit(raw_a) : FeatureNormalizer::identity(dim);
    model.normalizer_b = cfg.standardize_inputs ? FeatureNormalizer::fit(raw_b) : FeatureNormalizer::identity(dim);
    model.metadata.template_hash = cfg.template_hash;
    model.metadata.target_len = cfg.target_len;
    model.metadata.training_seed = cfg.seed;
  }

  std::vector<Eigen::MatrixXd> inputs_a, inputs_b;
  inputs_a.reserve(samples.size());
  inputs_b.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    inputs_a.push_back(model.normalizer_a.apply(raw_a[i]));
    inputs_b.push_back(model.normalizer_b.apply(raw_b[i]));
  }

  AdamConfig adam;
  adam.learning_rate = cfg.learning_rate;
  result.optimizer_a = AdamState::for_weights(model.stream_a.weights, adam);
  result.optimizer_b = AdamState::for_weights(model.stream_b.weights, adam);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  // Runs one stream (0 = A, 1 = B) over a batch, returns summed losses and
  // applies the averaged gradient.
  auto train_stream_batch = [&](int stream, std::span<const std::size_t> members, int epoch,
                                std::size_t batch_index) {
    BiGruRegressor& net = stream == 0 ? model.stream_a : model.stream_b;
    const auto& inputs = stream == 0 ? inputs_a : inputs_b;
    std::vector<SampleStep> steps(members.size());
    parallel_for(members.size(), [&](std::size_t m) {
      const std::size_t i = members[m];
      const auto seed = derive_seed(cfg.seed, {kTagDropout, static_cast<std::uint64_t>(stream),
                                               static_cast<std::uint64_t>(epoch), i});
      auto fwd = bigru_forward(net, inputs[i], true, seed);
      steps[m].loss = smooth_l1(fwd.prediction, samples[i].label);
      steps[m].grad_a = backward(net, fwd.cache, smooth_l1_grad(fwd.prediction, samples[i].label));
    });
    double loss = 0.0;
    BiGruWeights total = BiGruWeights::zeros(net.input_dim(), net.hidden_dim());
    for (const auto& s : steps) {
      loss += s.loss;
      total += s.grad_a;
    }
    if (!std::isfinite(loss) || !total.all_finite()) {
      fail(ErrorCode::kNonFiniteLoss, "stream " + std::string(stream == 0 ? "a" : "b") + ", epoch " +
                                          std::to_string(epoch) + ", batch " + std::to_string(batch_index));
    }
    total *= 1.0 / static_cast<double>(members.size());
    clip(total, cfg.clip_norm);
    adam_step(net.weights, total, stream == 0 ? result.optimizer_a : result.optimizer_b);
    return loss;
  };

  auto train_joint_batch = [&](std::span<const std::size_t> members, int epoch, std::size_t batch_index) {
    std::vector<SampleStep> steps(members.size());
    parallel_for(members.size(), [&](std::size_t m) {
      const std::size_t i = members[m];
      const auto seed_a = derive_seed(cfg.seed, {kTagDropout, 0, static_cast<std::uint64_t>(epoch), i});
      const auto seed_b = derive_seed(cfg.seed, {kTagDropout, 1, static_cast<std::uint64_t>(epoch), i});
      auto fa = bigru_forward(model.stream_a, inputs_a[i], true, seed_a);
      auto fb = bigru_forward(model.stream_b, inputs_b[i], true, seed_b);
      const double combined = 0.5 * (fa.prediction + fb.prediction);
      steps[m].loss = smooth_l1(combined, samples[i].label);
      const double g = 0.5 * smooth_l1_grad(combined, samples[i].label);
      steps[m].grad_a = backward(model.stream_a, fa.cache, g);
      steps[m].grad_b = backward(model.stream_b, fb.cache, g);
    });
    double loss = 0.0;
    BiGruWeights total_a = BiGruWeights::zeros(dim, model.stream_a.hidden_dim());
    BiGruWeights total_b = BiGruWeights::zeros(dim, model.stream_b.hidden_dim());
    for (const auto& s : steps) {
      loss += s.loss;
      total_a += s.grad_a;
      total_b += s.grad_b;
    }
    if (!std::isfinite(loss) || !total_a.all_finite() || !total_b.all_finite()) {
      fail(ErrorCode::kNonFiniteLoss,
           "joint loss, epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index));
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    total_a *= inv;
    total_b *= inv;
    clip(total_a, cfg.clip_norm);
    clip(total_b, cfg.clip_norm);
    adam_step(model.stream_a.weights, total_a, result.optimizer_a);
    adam_step(model.stream_b.weights, total_b, result.optimizer_b);
    return loss;
  };

  const double n = static_cast<double>(samples.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, {kTagShuffle, static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_a = 0.0;
    double loss_b = 0.0;
    double loss_joint = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += batch, ++batch_index) {
      const std::span<const std::size_t> members(order.data() + start, std::min(batch, order.size() - start));
      if (cfg.joint_loss) {
        loss_joint += train_joint_batch(members, epoch, batch_index);
      } else {
        if (cfg.train_stream_a) loss_a += train_stream_batch(0, members, epoch, batch_index);
        if (cfg.train_stream_b) loss_b += train_stream_batch(1, members, epoch, batch_index);
      }
    }
    if (cfg.joint_loss) {
      result.loss_log.push_back({epoch, "joint", loss_joint / n});
    } else {
      if (cfg.train_stream_a) result.loss_log.push_back({epoch, "a", loss_a / n});
      if (cfg.train_stream_b) result.loss_log.push_back({epoch, "b", loss_b / n});
    }
  }
  return result;
}

StreamPredictions predict_streams(const DualStreamModel& model, const FeatureSequence& absolute,
                                  const FeatureSequence& differential) {
  if (absolute.dimension() != model.input_dim() || differential.dimension() != model.input_dim()) {
    fail(ErrorCode::kDimensionMismatch,
         "model expects " + std::to_string(model.input_dim()) + "-dim features, got " +
             std::to_string(absolute.dimension()) + "/" + std::to_string(differential.dimension()));
  }
  const int target = model.metadata.target_len;
  StreamPredictions out;
  out.stream_a = bigru_predict(model.stream_a, model.normalizer_a.apply(temporal_resample(absolute, target).values));
  out.stream_b = bigru_predict(model.stream_b, model.normalizer_b.apply(temporal_resample(differential, target).values));
  out.combined = 0.5 * (out.stream_a + out.stream_b);
  return out;
}

double predict(const DualStreamModel& model, const FeatureSequence& absolute,
               const FeatureSequence& differential) {
  return predict_streams(model, absolute, differential).combined;
}

EvalResult evaluate(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size()) {
    fail(ErrorCode::kLengthMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                         std::to_string(labels.size()) + " labels");
  }
  if (predictions.empty()) fail(ErrorCode::kEmptyInput, "nothing to evaluate");
  EvalResult result;
  result.residuals.reserve(predictions.size());
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double r = predictions[i] - labels[i];
    result.residuals.push_back(r);
    abs_sum += std::abs(r);
    sq_sum += r * r;
  }
  const double n = static_cast<double>(predictions.size());
  result.mae = abs_sum / n;
  result.rmse = std::sqrt(sq_sum / n);
  // Power-mean inequality; equality cases may differ by rounding only.
  if (result.rmse < result.mae * (1.0 - 1e-12)) {
    fail(ErrorCode::kInvalidArgument, "RMSE below MAE: non-finite or corrupted inputs");
  }
  return result;
}

double constant_predictor_mae(std::span<const double> labels, double constant) {
  if (labels.empty()) fail(ErrorCode::kEmptyInput, "no labels");
  double total = 0.0;
  for (double l : labels) total += std::abs(l - constant);
  return total / static_cast<double>(labels.size());
}

}  // namespace facialpulse
