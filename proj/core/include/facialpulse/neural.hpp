#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace facialpulse {

// Weights of one GRU direction:
//   z  = sigmoid(W_z x + U_z h + b_z)
//   r  = sigmoid(W_r x + U_r h + b_r)
//   h~ = tanh(W_h x + U_h (r .* h) + b_h)
//   h' = (1 - z) .* h + z .* h~
struct GruParams {
  Eigen::MatrixXd w_z, w_r, w_h;  // k x d
  Eigen::MatrixXd u_z, u_r, u_h;  // k x k
  Eigen::VectorXd b_z, b_r, b_h;  // k

  static GruParams zeros(int input_dim, int hidden_dim);

  int input_dim() const noexcept { return static_cast<int>(w_z.cols()); }
  int hidden_dim() const noexcept { return static_cast<int>(w_z.rows()); }
  std::size_t parameter_count() const noexcept;
};

// Named, flat view of one parameter tensor (row-major order is not implied;
// data() is Eigen's column-major storage).
struct TensorRef {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows * cols); }
};

struct ConstTensorRef {
  std::string name;
  const double* data;
  Eigen::Index rows;
  Eigen::Index cols;

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows * cols); }
};

// Everything trainable in one bidirectional regressor. Also used as the
// gradient container and the Adam moment buffers.
struct BiGruWeights {
  GruParams forward;
  GruParams backward;
  Eigen::VectorXd head_w;  // 2k
  double head_b = 0.0;

  static BiGruWeights zeros(int input_dim, int hidden_dim);

  int input_dim() const noexcept { return forward.input_dim(); }
  int hidden_dim() const noexcept { return forward.hidden_dim(); }
  std::size_t parameter_count() const noexcept;

  // Fixed traversal order shared by the optimizer, serialization and the
  // gradient checker.
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;

  void set_zero();
  BiGruWeights& operator+=(const BiGruWeights& other);
  BiGruWeights& operator*=(double factor);
  double squared_norm() const;
  bool all_finite() const;
};

enum class Pooling { kFinalState, kMeanOverTime };

std::string pooling_name(Pooling pooling);
Pooling parse_pooling(const std::string& name);

struct BiGruRegressor {
  BiGruWeights weights;
  double input_dropout_rate = 0.25;
  double hidden_dropout_rate = 0.5;
  Pooling pooling = Pooling::kFinalState;

  int input_dim() const noexcept { return weights.input_dim(); }
  int hidden_dim() const noexcept { return weights.hidden_dim(); }
  std::size_t parameter_count() const noexcept { return weights.parameter_count(); }
};

// Closed form 2 * 3 (k d + k^2 + k) + 2k + 1.
std::size_t bigru_parameter_count(int input_dim, int hidden_dim);

Eigen::VectorXd gru_cell_forward(const GruParams& params, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& h_prev);

// Activations of one direction in processing order; h has T + 1 columns
// with h.col(0) the zero initial state.
struct DirectionCache {
  Eigen::MatrixXd inputs;  // d x T in processing order
  Eigen::MatrixXd h;
  Eigen::MatrixXd z;
  Eigen::MatrixXd r;
  Eigen::MatrixXd candidate;
};

struct ForwardCache {
  int input_dim = 0;
  int hidden_dim = 0;
  int length = 0;
  bool training = false;
  Pooling pooling = Pooling::kFinalState;
  DirectionCache forward;
  DirectionCache backward;
  // Inverted-dropout multipliers (0 or 1 / (1 - rate)); all ones at inference.
  Eigen::VectorXd forward_mask;
  Eigen::VectorXd backward_mask;
  Eigen::VectorXd concat_mask;
  Eigen::VectorXd head_input;  // 2k, after all dropout
  double prediction = 0.0;
};

struct ForwardResult {
  double prediction = 0.0;
  ForwardCache cache;
};

// `sequence` is T x d (one row per timestep). Dropout masks are drawn from
// a generator seeded with `rng_seed` only when `training` is true.
ForwardResult bigru_forward(const BiGruRegressor& model, const Eigen::MatrixXd& sequence,
                            bool training, std::uint64_t rng_seed);

// Prediction without keeping the cache; dropout disabled.
double bigru_predict(const BiGruRegressor& model, const Eigen::MatrixXd& sequence);

// Exact gradients of `loss_gradient * prediction` with respect to every
// parameter, honoring the dropout masks stored in `cache`.
BiGruWeights backward(const BiGruRegressor& model, const ForwardCache& cache, double loss_gradient);

double smooth_l1(double prediction, double target);
// d smooth_l1 / d prediction.
double smooth_l1_grad(double prediction, double target);

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Raw bias-corrected Adam over flat arrays; `step` is the 1-based step
// number after incrementing.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, long step, const AdamConfig& cfg);

struct AdamState {
  BiGruWeights m;
  BiGruWeights v;
  long step = 0;
  AdamConfig config;

  static AdamState for_weights(const BiGruWeights& weights, const AdamConfig& cfg = {});
};

void adam_step(BiGruWeights& params, const BiGruWeights& grads, AdamState& state);

// Uniform Glorot weights, zero biases, fully determined by the seed.
GruParams init_gru_params(int input_dim, int hidden_dim, std::uint64_t seed);
BiGruRegressor init_bigru(int input_dim, int hidden_dim, std::uint64_t seed);

// sqrt(6 / (fan_in + fan_out)).
double glorot_bound(Eigen::Index fan_in, Eigen::Index fan_out);

}  // namespace facialpulse
