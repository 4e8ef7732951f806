#include "facialpulse/neural.hpp"

#include <cmath>
#include <random>

#include "facialpulse/error.hpp"
#include "facialpulse/random.hpp"

namespace facialpulse {

GruParams GruParams::zeros(int input_dim, int hidden_dim) {
  if (input_dim < 1 || hidden_dim < 1) fail(ErrorCode::kInvalidArgument, "GRU dimensions must be >= 1");
  GruParams p;
  for (auto* w : {&p.w_z, &p.w_r, &p.w_h}) w->setZero(hidden_dim, input_dim);
  for (auto* u : {&p.u_z, &p.u_r, &p.u_h}) u->setZero(hidden_dim, hidden_dim);
  for (auto* b : {&p.b_z, &p.b_r, &p.b_h}) b->setZero(hidden_dim);
  return p;
}

std::size_t GruParams::parameter_count() const noexcept {
  const auto k = static_cast<std::size_t>(hidden_dim());
  const auto d = static_cast<std::size_t>(input_dim());
  return 3 * (k * d + k * k + k);
}

std::size_t bigru_parameter_count(int input_dim, int hidden_dim) {
  const auto k = static_cast<std::size_t>(hidden_dim);
  const auto d = static_cast<std::size_t>(input_dim);
  return 2 * 3 * (k * d + k * k + k) + 2 * k + 1;
}

BiGruWeights BiGruWeights::zeros(int input_dim, int hidden_dim) {
  BiGruWeights w;
  w.forward = GruParams::zeros(input_dim, hidden_dim);
  w.backward = GruParams::zeros(input_dim, hidden_dim);
  w.head_w.setZero(2 * hidden_dim);
  w.head_b = 0.0;
  return w;
}

std::size_t BiGruWeights::parameter_count() const noexcept {
  return forward.parameter_count() + backward.parameter_count() +
         static_cast<std::size_t>(head_w.size()) + 1;
}

namespace {

template <class Ref, class Weights>
std::vector<Ref> collect_tensors(Weights& w) {
  std::vector<Ref> out;
  auto add_cell = [&out](const std::string& prefix, auto& cell) {
    out.push_back({prefix + ".w_z", cell.w_z.data(), cell.w_z.rows(), cell.w_z.cols()});
    out.push_back({prefix + ".u_z", cell.u_z.data(), cell.u_z.rows(), cell.u_z.cols()});
    out.push_back({prefix + ".b_z", cell.b_z.data(), cell.b_z.rows(), 1});
    out.push_back({prefix + ".w_r", cell.w_r.data(), cell.w_r.rows(), cell.w_r.cols()});
    out.push_back({prefix + ".u_r", cell.u_r.data(), cell.u_r.rows(), cell.u_r.cols()});
    out.push_back({prefix + ".b_r", cell.b_r.data(), cell.b_r.rows(), 1});
    out.push_back({prefix + ".w_h", cell.w_h.data(), cell.w_h.rows(), cell.w_h.cols()});
    out.push_back({prefix + ".u_h", cell.u_h.data(), cell.u_h.rows(), cell.u_h.cols()});
    out.push_back({prefix + ".b_h", cell.b_h.data(), cell.b_h.rows(), 1});
  };
  add_cell("forward", w.forward);
  add_cell("backward", w.backward);
  out.push_back({"head.w", w.head_w.data(), 1, w.head_w.size()});
  out.push_back({"head.b", &w.head_b, 1, 1});
  return out;
}

}  // namespace

std::vector<TensorRef> BiGruWeights::tensors() { return collect_tensors<TensorRef>(*this); }

std::vector<ConstTensorRef> BiGruWeights::tensors() const {
  return collect_tensors<ConstTensorRef>(*this);
}

void BiGruWeights::set_zero() {
  for (auto& t : tensors()) std::fill(t.data, t.data + t.size(), 0.0);
}

BiGruWeights& BiGruWeights::operator+=(const BiGruWeights& other) {
  auto mine = tensors();
  const auto theirs = other.tensors();
  if (mine.size() != theirs.size()) fail(ErrorCode::kShapeMismatch, "weight sets differ");
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].rows != theirs[i].rows || mine[i].cols != theirs[i].cols) {
      fail(ErrorCode::kShapeMismatch, "tensor " + mine[i].name + " differs in shape");
    }
    for (std::size_t j = 0; j < mine[i].size(); ++j) mine[i].data[j] += theirs[i].data[j];
  }
  return *this;
}

BiGruWeights& BiGruWeights::operator*=(double factor) {
  for (auto& t : tensors()) {
    for (std::size_t j = 0; j < t.size(); ++j) t.data[j] *= factor;
  }
  return *this;
}

double BiGruWeights::squared_norm() const {
  double total = 0.0;
  for (const auto& t : tensors()) {
    for (std::size_t j = 0; j < t.size(); ++j) total += t.data[j] * t.data[j];
  }
  return total;
}

bool BiGruWeights::all_finite() const {
  for (const auto& t : tensors()) {
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (!std::isfinite(t.data[j])) return false;
    }
  }
  return true;
}

std::string pooling_name(Pooling pooling) {
  return pooling == Pooling::kFinalState ? "final_state" : "mean_over_time";
}

Pooling parse_pooling(const std::string& name) {
  if (name == "final_state") return Pooling::kFinalState;
  if (name == "mean_over_time") return Pooling::kMeanOverTime;
  fail(ErrorCode::kFormat, "unknown pooling mode '" + name + "'");
}

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& a) {
  return (1.0 + (-a.array()).exp()).inverse().matrix();
}

void check_cell_dims(const GruParams& params, Eigen::Index x_size, Eigen::Index h_size) {
  if (x_size != params.input_dim() || h_size != params.hidden_dim()) {
    fail(ErrorCode::kDimensionMismatch,
         "GRU cell expects x of " + std::to_string(params.input_dim()) + " and h of " +
             std::to_string(params.hidden_dim()) + ", got " + std::to_string(x_size) + " and " +
             std::to_string(h_size));
  }
}

// Runs one direction over `inputs` (d x T, already in processing order).
DirectionCache run_direction(const GruParams& p, Eigen::MatrixXd inputs) {
  const Eigen::Index k = p.hidden_dim();
  const Eigen::Index steps = inputs.cols();
  DirectionCache c;
  c.h.setZero(k, steps + 1);
  c.z.resize(k, steps);
  c.r.resize(k, steps);
  c.candidate.resize(k, steps);

  const Eigen::MatrixXd pre_z = (p.w_z * inputs).colwise() + p.b_z;
  const Eigen::MatrixXd pre_r = (p.w_r * inputs).colwise() + p.b_r;
  const Eigen::MatrixXd pre_h = (p.w_h * inputs).colwise() + p.b_h;
  for (Eigen::Index t = 0; t < steps; ++t) {
    const Eigen::VectorXd h = c.h.col(t);
    const Eigen::VectorXd z = sigmoid(pre_z.col(t) + p.u_z * h);
    const Eigen::VectorXd r = sigmoid(pre_r.col(t) + p.u_r * h);
    const Eigen::VectorXd cand =
        (pre_h.col(t) + p.u_h * r.cwiseProduct(h)).array().tanh().matrix();
    c.h.col(t + 1) = (1.0 - z.array()).matrix().cwiseProduct(h) + z.cwiseProduct(cand);
    c.z.col(t) = z;
    c.r.col(t) = r;
    c.candidate.col(t) = cand;
  }
  c.inputs = std::move(inputs);
  return c;
}

Eigen::VectorXd pool(const DirectionCache& c, Pooling pooling) {
  const Eigen::Index steps = c.h.cols() - 1;
  if (pooling == Pooling::kFinalState) return c.h.col(steps);
  return c.h.rightCols(steps).rowwise().mean();
}

Eigen::VectorXd dropout_mask(std::mt19937_64& rng, Eigen::Index size, double rate) {
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(size);
  if (rate <= 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution keep(1.0 - rate);
  for (Eigen::Index i = 0; i < size; ++i) mask(i) = keep(rng) ? keep_scale : 0.0;
  return mask;
}

void validate_model(const BiGruRegressor& model) {
  if (model.input_dropout_rate < 0.0 || model.input_dropout_rate >= 1.0 ||
      model.hidden_dropout_rate < 0.0 || model.hidden_dropout_rate >= 1.0) {
    fail(ErrorCode::kInvalidArgument, "dropout rates must lie in [0, 1)");
  }
  if (model.weights.head_w.size() != 2 * model.hidden_dim()) {
    fail(ErrorCode::kShapeMismatch, "head input must be 2k");
  }
}

// Accumulates one direction's parameter gradients given dL/dh_t for every
// step (columns in processing order).
void backprop_direction(const GruParams& p, const DirectionCache& c, const Eigen::MatrixXd& d_outputs,
                        GruParams& g) {
  const Eigen::Index k = p.hidden_dim();
  const Eigen::Index steps = c.z.cols();
  Eigen::MatrixXd da_z(k, steps), da_r(k, steps), da_h(k, steps), gated_prev(k, steps);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(k);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const Eigen::VectorXd dh = d_outputs.col(t) + dh_next;
    const auto h_prev = c.h.col(t).array();
    const auto z = c.z.col(t).array();
    const auto r = c.r.col(t).array();
    const auto cand = c.candidate.col(t).array();

    const Eigen::ArrayXd dz = dh.array() * (cand - h_prev);
    const Eigen::ArrayXd a_z = dz * z * (1.0 - z);
    const Eigen::ArrayXd a_h = dh.array() * z * (1.0 - cand * cand);
    const Eigen::ArrayXd d_gated = (p.u_h.transpose() * a_h.matrix()).array();
    const Eigen::ArrayXd a_r = d_gated * h_prev * r * (1.0 - r);

    dh_next = (dh.array() * (1.0 - z) + d_gated * r).matrix() + p.u_z.transpose() * a_z.matrix() +
              p.u_r.transpose() * a_r.matrix();
    da_z.col(t) = a_z.matrix();
    da_r.col(t) = a_r.matrix();
    da_h.col(t) = a_h.matrix();
    gated_prev.col(t) = (r * h_prev).matrix();
  }
  const auto h_prev_all = c.h.leftCols(steps);
  g.w_z.noalias() += da_z * c.inputs.transpose();
  g.w_r.noalias() += da_r * c.inputs.transpose();
  g.w_h.noalias() += da_h * c.inputs.transpose();
  g.u_z.noalias() += da_z * h_prev_all.transpose();
  g.u_r.noalias() += da_r * h_prev_all.transpose();
  g.u_h.noalias() += da_h * gated_prev.transpose();
  g.b_z += da_z.rowwise().sum();
  g.b_r += da_r.rowwise().sum();
  g.b_h += da_h.rowwise().sum();
}

}  // namespace

Eigen::VectorXd gru_cell_forward(const GruParams& params, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& h_prev) {
  check_cell_dims(params, x.size(), h_prev.size());
  const Eigen::VectorXd z = sigmoid(params.w_z * x + params.u_z * h_prev + params.b_z);
  const Eigen::VectorXd r = sigmoid(params.w_r * x + params.u_r * h_prev + params.b_r);
  const Eigen::VectorXd cand =
      (params.w_h * x + params.u_h * r.cwiseProduct(h_prev) + params.b_h).array().tanh().matrix();
  return (1.0 - z.array()).matrix().cwiseProduct(h_prev) + z.cwiseProduct(cand);
}

ForwardResult bigru_forward(const BiGruRegressor& model, const Eigen::MatrixXd& sequence,
                            bool training, std::uint64_t rng_seed) {
  validate_model(model);
  if (sequence.rows() < 1) fail(ErrorCode::kEmptySequence, "BiGRU input has no timesteps");
  if (sequence.cols() != model.input_dim()) {
    fail(ErrorCode::kDimensionMismatch, "BiGRU expects " + std::to_string(model.input_dim()) +
                                            "-dim inputs, got " + std::to_string(sequence.cols()));
  }
  const Eigen::Index k = model.hidden_dim();
  const Eigen::Index steps = sequence.rows();

  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.input_dim = model.input_dim();
  cache.hidden_dim = model.hidden_dim();
  cache.length = static_cast<int>(steps);
  cache.training = training;
  cache.pooling = model.pooling;

  Eigen::MatrixXd inputs = sequence.transpose();  // d x T
  std::mt19937_64 rng(rng_seed);
  if (training && model.input_dropout_rate > 0.0) {
    for (Eigen::Index t = 0; t < steps; ++t) {
      inputs.col(t).array() *= dropout_mask(rng, inputs.rows(), model.input_dropout_rate).array();
    }
  }
  cache.forward = run_direction(model.weights.forward, inputs);
  cache.backward = run_direction(model.weights.backward, inputs.rowwise().reverse());

  const double hidden_rate = training ? model.hidden_dropout_rate : 0.0;
  cache.forward_mask = dropout_mask(rng, k, hidden_rate);
  cache.backward_mask = dropout_mask(rng, k, hidden_rate);
  cache.concat_mask = dropout_mask(rng, 2 * k, hidden_rate);

  Eigen::VectorXd concat(2 * k);
  concat.head(k) = pool(cache.forward, model.pooling).cwiseProduct(cache.forward_mask);
  concat.tail(k) = pool(cache.backward, model.pooling).cwiseProduct(cache.backward_mask);
  cache.head_input = concat.cwiseProduct(cache.concat_mask);
  cache.prediction = model.weights.head_w.dot(cache.head_input) + model.weights.head_b;
  result.prediction = cache.prediction;
  return result;
}

double bigru_predict(const BiGruRegressor& model, const Eigen::MatrixXd& sequence) {
  return bigru_forward(model, sequence, false, 0).prediction;
}

BiGruWeights backward(const BiGruRegressor& model, const ForwardCache& cache, double loss_gradient) {
  const Eigen::Index k = model.hidden_dim();
  if (cache.input_dim != model.input_dim() || cache.hidden_dim != model.hidden_dim() ||
      cache.forward.h.rows() != k || cache.forward.z.cols() != cache.length ||
      cache.head_input.size() != 2 * k) {
    fail(ErrorCode::kStaleCache, "forward cache does not match the model's shapes");
  }
  BiGruWeights grads = BiGruWeights::zeros(model.input_dim(), model.hidden_dim());
  grads.head_w = loss_gradient * cache.head_input;
  grads.head_b = loss_gradient;

  const Eigen::VectorXd d_concat =
      (loss_gradient * model.weights.head_w).cwiseProduct(cache.concat_mask);
  const Eigen::VectorXd d_fwd = d_concat.head(k).cwiseProduct(cache.forward_mask);
  const Eigen::VectorXd d_bwd = d_concat.tail(k).cwiseProduct(cache.backward_mask);

  const Eigen::Index steps = cache.length;
  auto output_grads = [&](const Eigen::VectorXd& d_summary) {
    Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(k, steps);
    if (cache.pooling == Pooling::kFinalState) {
      d_out.col(steps - 1) = d_summary;
    } else {
      d_out.colwise() = d_summary / static_cast<double>(steps);
    }
    return d_out;
  };
  backprop_direction(model.weights.forward, cache.forward, output_grads(d_fwd), grads.forward);
  backprop_direction(model.weights.backward, cache.backward, output_grads(d_bwd), grads.backward);
  return grads;
}

double smooth_l1(double prediction, double target) {
  const double x = prediction - target;
  const double ax = std::abs(x);
  return ax < 1.0 ? 0.5 * x * x : ax - 0.5;
}

double smooth_l1_grad(double prediction, double target) {
  const double x = prediction - target;
  if (std::abs(x) < 1.0) return x;
  return x > 0.0 ? 1.0 : -1.0;
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, long step, const AdamConfig& cfg) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    fail(ErrorCode::kShapeMismatch, "Adam buffers differ in length");
  }
  if (step < 1) fail(ErrorCode::kInvalidArgument, "Adam step must be >= 1");
  const double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

AdamState AdamState::for_weights(const BiGruWeights& weights, const AdamConfig& cfg) {
  AdamState state;
  state.m = BiGruWeights::zeros(weights.input_dim(), weights.hidden_dim());
  state.v = BiGruWeights::zeros(weights.input_dim(), weights.hidden_dim());
  state.config = cfg;
  return state;
}

void adam_step(BiGruWeights& params, const BiGruWeights& grads, AdamState& state) {
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    fail(ErrorCode::kShapeMismatch, "parameter, gradient and moment sets differ");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (g[i].rows != p[i].rows || g[i].cols != p[i].cols || m[i].rows != p[i].rows ||
        m[i].cols != p[i].cols || v[i].rows != p[i].rows || v[i].cols != p[i].cols) {
      fail(ErrorCode::kShapeMismatch, "tensor " + p[i].name + " differs in shape");
    }
  }
  ++state.step;
  for (std::size_t i = 0; i < p.size(); ++i) {
    adam_update({p[i].data, p[i].size()}, {g[i].data, g[i].size()}, {m[i].data, m[i].size()},
                {v[i].data, v[i].size()}, state.step, state.config);
  }
}

double glorot_bound(Eigen::Index fan_in, Eigen::Index fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

namespace {

void fill_uniform(Eigen::MatrixXd& m, std::mt19937_64& rng) {
  const double bound = glorot_bound(m.cols(), m.rows());
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
  }
}

void fill_cell(GruParams& p, std::mt19937_64& rng) {
  for (auto* w : {&p.w_z, &p.u_z, &p.w_r, &p.u_r, &p.w_h, &p.u_h}) fill_uniform(*w, rng);
}

}  // namespace

GruParams init_gru_params(int input_dim, int hidden_dim, std::uint64_t seed) {
  GruParams p = GruParams::zeros(input_dim, hidden_dim);
  std::mt19937_64 rng(seed);
  fill_cell(p, rng);
  return p;
}

BiGruRegressor init_bigru(int input_dim, int hidden_dim, std::uint64_t seed) {
  BiGruRegressor model;
  model.weights = BiGruWeights::zeros(input_dim, hidden_dim);
  std::mt19937_64 rng(seed);
  fill_cell(model.weights.forward, rng);
  fill_cell(model.weights.backward, rng);
  const double bound = glorot_bound(2 * hidden_dim, 1);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < model.weights.head_w.size(); ++i) model.weights.head_w(i) = dist(rng);
  return model;
}

}  // namespace facialpulse
