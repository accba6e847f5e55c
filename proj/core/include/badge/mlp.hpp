#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "badge/embedding.hpp"
#include "badge/types.hpp"

namespace badge {

struct MlpConfig {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 128;
  std::size_t num_classes = 0;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double train_acc_threshold = 0.99;
  std::size_t max_epochs = 300;
  std::size_t minibatch_size = 64;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Weights of the two-layer network
///   z = relu(w1 x + b1),  p = softmax(w2 z + b2).
/// The same layout holds gradients and Adam moments.
struct MlpTensors {
  Matrix w1;  // hidden x input
  Vector b1;
  Matrix w2;  // classes x hidden
  Vector b2;

  static MlpTensors zeros(const MlpConfig& config);
  std::size_t parameter_count() const;
  /// Flat views in checkpoint order: w1, b1, w2, b2 (row-major matrices).
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
};

struct MlpParams {
  MlpTensors weights;
  MlpTensors adam_m;
  MlpTensors adam_v;
  std::uint64_t adam_step = 0;

  std::size_t input_dim() const { return static_cast<std::size_t>(weights.w1.cols()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(weights.w1.rows()); }
  std::size_t num_classes() const { return static_cast<std::size_t>(weights.w2.rows()); }
};

/// Fresh parameters: every weight and bias uniform on +-1/sqrt(fan_in) of its
/// layer, drawn from config.rng_seed. Moments zeroed.
MlpParams init_params(const MlpConfig& config);

struct ForwardOutput {
  std::vector<double> probs;
  std::vector<double> features;
};

struct BatchForward {
  Matrix probs;     // n x K
  Matrix features;  // n x hidden (post-ReLU)
};

ForwardOutput forward(const MlpParams& params, std::span<const double> x);
BatchForward forward_batch(const MlpParams& params, const Matrix& x);

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& logits);

struct LossAndGrad {
  double loss = 0.0;
  MlpTensors grad;
};

/// Mean cross-entropy (p_y clamped at 1e-12 before the log) and its gradient
/// over the batch.
LossAndGrad loss_and_grad(const MlpParams& params, const Matrix& x,
                          std::span<const std::size_t> labels);

/// One bias-corrected Adam update in place.
void adam_step(MlpParams& params, const MlpTensors& grad, const MlpConfig& config);

enum class StopReason { reached_threshold, max_epochs };

struct TrainResult {
  MlpParams params;
  StopReason stop = StopReason::max_epochs;
  std::size_t epochs = 0;
  double train_accuracy = 0.0;
};

/// Initializes fresh parameters and runs minibatch Adam, reshuffling every
/// epoch, until training accuracy reaches the threshold or max_epochs pass.
/// Accuracy is checked before the first epoch as well.
TrainResult train_from_scratch(const MlpConfig& config, const Matrix& x,
                               std::span<const std::size_t> labels);

std::vector<std::size_t> predict_labels(const MlpParams& params, const Matrix& x);

/// Prediction records for the rows of `x`, tagged with `example_ids`.
std::vector<PredictionRecord> predict_pool(const MlpParams& params, const Matrix& x,
                                           std::span<const std::size_t> example_ids);

/// Fraction of rows whose argmax prediction (lowest index on ties) matches.
/// Throws InvalidInput on an empty set.
double test_accuracy(const MlpParams& params, const Matrix& x, std::span<const std::size_t> labels);

/// Binary checkpoint, all fields little-endian:
///   bytes 0-7   magic "BADGEMLP"
///   u32         format version (1)
///   u32         input_dim
///   u32         hidden_dim
///   u32         num_classes
///   u64         rng_seed
///   u64         parameter count P
///   f64[P]      w1 (row-major), b1, w2 (row-major), b2
/// Adam moments are not stored.
void save_checkpoint(const std::filesystem::path& path, const MlpParams& params,
                     std::uint64_t rng_seed);

struct Checkpoint {
  MlpParams params;
  std::uint64_t rng_seed = 0;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace badge
