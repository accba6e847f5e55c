#include "badge/mlp.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "badge/errors.hpp"
#include "badge/random.hpp"

namespace badge {
namespace {

constexpr double kProbFloor = 1e-12;
constexpr std::array<char, 8> kMagic{'B', 'A', 'D', 'G', 'E', 'M', 'L', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

Matrix add_row_bias(Matrix m, const Vector& bias) {
  m.rowwise() += bias.transpose();
  return m;
}

std::size_t argmax_row(const Matrix& m, Eigen::Index r) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < m.cols(); ++c) {
    if (m(r, c) > m(r, best)) {
      best = c;
    }
  }
  return static_cast<std::size_t>(best);
}

void check_labels(std::span<const std::size_t> labels, std::size_t rows, std::size_t classes) {
  if (labels.size() != rows) {
    throw InvalidInput("label count does not match number of rows");
  }
  for (const auto y : labels) {
    if (y >= classes) {
      throw InvalidInput("label " + std::to_string(y) + " out of range");
    }
  }
}

Matrix gather_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

void put_u32(std::ostream& os, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    os.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
}

void put_u64(std::ostream& os, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    os.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
}

std::uint64_t get_uint(std::istream& is, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) {
      throw ParseError("checkpoint truncated", 0, 0);
    }
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

}  // namespace

void MlpConfig::validate() const {
  if (input_dim == 0 || hidden_dim == 0 || num_classes == 0) {
    throw InvalidInput("MlpConfig: dimensions must be positive");
  }
  if (!(train_acc_threshold > 0.0 && train_acc_threshold <= 1.0)) {
    throw InvalidInput("MlpConfig: train_acc_threshold must lie in (0, 1]");
  }
  if (!(learning_rate > 0.0) || minibatch_size == 0) {
    throw InvalidInput("MlpConfig: learning_rate and minibatch_size must be positive");
  }
}

MlpTensors MlpTensors::zeros(const MlpConfig& config) {
  const auto d = static_cast<Eigen::Index>(config.input_dim);
  const auto h = static_cast<Eigen::Index>(config.hidden_dim);
  const auto k = static_cast<Eigen::Index>(config.num_classes);
  return {Matrix::Zero(h, d), Vector::Zero(h), Matrix::Zero(k, h), Vector::Zero(k)};
}

std::size_t MlpTensors::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
}

std::vector<double> MlpTensors::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  // Row-major storage makes the raw buffer order match the documented layout.
  flat.insert(flat.end(), w1.data(), w1.data() + w1.size());
  flat.insert(flat.end(), b1.data(), b1.data() + b1.size());
  flat.insert(flat.end(), w2.data(), w2.data() + w2.size());
  flat.insert(flat.end(), b2.data(), b2.data() + b2.size());
  return flat;
}

void MlpTensors::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw InvalidInput("MlpTensors::assign: wrong number of values");
  }
  auto it = flat.begin();
  std::copy_n(it, w1.size(), w1.data());
  it += w1.size();
  std::copy_n(it, b1.size(), b1.data());
  it += b1.size();
  std::copy_n(it, w2.size(), w2.data());
  it += w2.size();
  std::copy_n(it, b2.size(), b2.data());
}

MlpParams init_params(const MlpConfig& config) {
  config.validate();
  MlpParams params{MlpTensors::zeros(config), MlpTensors::zeros(config),
                   MlpTensors::zeros(config), 0};
  Rng rng(mix_seed(config.rng_seed, 0));
  auto fill = [&rng](auto&& values, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      values(i) = (2.0 * rng.uniform() - 1.0) * bound;
    }
  };
  const auto d = static_cast<double>(config.input_dim);
  const auto h = static_cast<double>(config.hidden_dim);
  fill(params.weights.w1.reshaped(), d);
  fill(params.weights.b1, d);
  fill(params.weights.w2.reshaped(), h);
  fill(params.weights.b2, h);
  return params;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double top = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - top).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

BatchForward forward_batch(const MlpParams& params, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != params.input_dim()) {
    throw InvalidInput("forward: input has dimension " + std::to_string(x.cols()) +
                       ", expected " + std::to_string(params.input_dim()));
  }
  if (!x.allFinite()) {
    throw InvalidInput("forward: non-finite input");
  }
  const auto& w = params.weights;
  BatchForward out;
  out.features = add_row_bias(x * w.w1.transpose(), w.b1).cwiseMax(0.0);
  out.probs = softmax_rows(add_row_bias(out.features * w.w2.transpose(), w.b2));
  return out;
}

ForwardOutput forward(const MlpParams& params, std::span<const double> x) {
  const Matrix row = Eigen::Map<const Matrix>(x.data(), 1, static_cast<Eigen::Index>(x.size()));
  const auto batch = forward_batch(params, row);
  return {{batch.probs.data(), batch.probs.data() + batch.probs.size()},
          {batch.features.data(), batch.features.data() + batch.features.size()}};
}

LossAndGrad loss_and_grad(const MlpParams& params, const Matrix& x,
                          std::span<const std::size_t> labels) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0) {
    throw InvalidInput("loss_and_grad: empty batch");
  }
  check_labels(labels, n, params.num_classes());
  const auto& w = params.weights;

  const Matrix pre = add_row_bias(x * w.w1.transpose(), w.b1);
  const Matrix features = pre.cwiseMax(0.0);
  const Matrix probs = softmax_rows(add_row_bias(features * w.w2.transpose(), w.b2));

  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  Matrix dlogits = probs;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const auto y = static_cast<Eigen::Index>(labels[i]);
    loss -= std::log(std::max(probs(r, y), kProbFloor));
    dlogits(r, y) -= 1.0;
  }
  dlogits *= inv_n;

  LossAndGrad out;
  out.loss = loss * inv_n;
  out.grad.w2 = dlogits.transpose() * features;
  out.grad.b2 = dlogits.colwise().sum().transpose();
  const Matrix dpre = (dlogits * w.w2).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  out.grad.w1 = dpre.transpose() * x;
  out.grad.b1 = dpre.colwise().sum().transpose();
  return out;
}

void adam_step(MlpParams& params, const MlpTensors& grad, const MlpConfig& config) {
  ++params.adam_step;
  const double t = static_cast<double>(params.adam_step);
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  const double lr = config.learning_rate;
  const double eps = config.adam_eps;

  auto update = [&](auto&& w, auto&& m, auto&& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    w.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  update(params.weights.w1.reshaped(), params.adam_m.w1.reshaped(), params.adam_v.w1.reshaped(),
         grad.w1.reshaped());
  update(params.weights.b1, params.adam_m.b1, params.adam_v.b1, grad.b1);
  update(params.weights.w2.reshaped(), params.adam_m.w2.reshaped(), params.adam_v.w2.reshaped(),
         grad.w2.reshaped());
  update(params.weights.b2, params.adam_m.b2, params.adam_v.b2, grad.b2);
}

std::vector<std::size_t> predict_labels(const MlpParams& params, const Matrix& x) {
  const auto out = forward_batch(params, x);
  std::vector<std::size_t> labels(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    labels[static_cast<std::size_t>(r)] = argmax_row(out.probs, r);
  }
  return labels;
}

double test_accuracy(const MlpParams& params, const Matrix& x,
                     std::span<const std::size_t> labels) {
  if (x.rows() == 0) {
    throw InvalidInput("test_accuracy: empty evaluation set");
  }
  check_labels(labels, static_cast<std::size_t>(x.rows()), params.num_classes());
  const auto predicted = predict_labels(params, x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    correct += predicted[i] == labels[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

TrainResult train_from_scratch(const MlpConfig& config, const Matrix& x,
                               std::span<const std::size_t> labels) {
  config.validate();
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0) {
    throw InvalidInput("train_from_scratch: labeled set is empty");
  }
  if (static_cast<std::size_t>(x.cols()) != config.input_dim) {
    throw InvalidInput("train_from_scratch: input dimension mismatch");
  }
  check_labels(labels, n, config.num_classes);

  TrainResult result{init_params(config), StopReason::max_epochs, 0, 0.0};
  result.train_accuracy = test_accuracy(result.params, x, labels);
  if (result.train_accuracy >= config.train_acc_threshold) {
    result.stop = StopReason::reached_threshold;
    return result;
  }

  Rng rng(mix_seed(config.rng_seed, 1));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> batch_labels;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[rng.index(i)]);
    }
    for (std::size_t start = 0; start < n; start += config.minibatch_size) {
      const std::size_t stop = std::min(n, start + config.minibatch_size);
      const std::span<const std::size_t> rows(order.data() + start, stop - start);
      batch_labels.clear();
      for (const auto r : rows) {
        batch_labels.push_back(labels[r]);
      }
      const auto lg = loss_and_grad(result.params, gather_rows(x, rows), batch_labels);
      adam_step(result.params, lg.grad, config);
    }
    result.epochs = epoch;
    result.train_accuracy = test_accuracy(result.params, x, labels);
    if (result.train_accuracy >= config.train_acc_threshold) {
      result.stop = StopReason::reached_threshold;
      return result;
    }
  }
  return result;
}

std::vector<PredictionRecord> predict_pool(const MlpParams& params, const Matrix& x,
                                           std::span<const std::size_t> example_ids) {
  if (example_ids.size() != static_cast<std::size_t>(x.rows())) {
    throw InvalidInput("predict_pool: id count does not match number of rows");
  }
  const auto out = forward_batch(params, x);
  std::vector<PredictionRecord> records(example_ids.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    records[i].probs.assign(out.probs.row(r).data(), out.probs.row(r).data() + out.probs.cols());
    records[i].features.assign(out.features.row(r).data(),
                               out.features.row(r).data() + out.features.cols());
    records[i].example_id = example_ids[i];
  }
  return records;
}

void save_checkpoint(const std::filesystem::path& path, const MlpParams& params,
                     std::uint64_t rng_seed) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  }
  os.write(kMagic.data(), kMagic.size());
  put_u32(os, kFormatVersion);
  put_u32(os, static_cast<std::uint32_t>(params.input_dim()));
  put_u32(os, static_cast<std::uint32_t>(params.hidden_dim()));
  put_u32(os, static_cast<std::uint32_t>(params.num_classes()));
  put_u64(os, rng_seed);
  const auto flat = params.weights.flatten();
  put_u64(os, flat.size());
  for (const double v : flat) {
    put_u64(os, std::bit_cast<std::uint64_t>(v));
  }
  if (!os) {
    throw std::runtime_error("failed writing checkpoint: " + path.string());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw std::runtime_error("cannot open checkpoint: " + path.string());
  }
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) {
    throw ParseError("not a BADGEMLP checkpoint: " + path.string(), 0, 0);
  }
  if (get_uint(is, 4) != kFormatVersion) {
    throw ParseError("unsupported checkpoint version", 0, 0);
  }
  MlpConfig config;
  config.input_dim = get_uint(is, 4);
  config.hidden_dim = get_uint(is, 4);
  config.num_classes = get_uint(is, 4);
  Checkpoint out;
  out.rng_seed = get_uint(is, 8);
  config.validate();
  out.params = MlpParams{MlpTensors::zeros(config), MlpTensors::zeros(config),
                         MlpTensors::zeros(config), 0};
  const auto count = get_uint(is, 8);
  if (count != out.params.weights.parameter_count()) {
    throw ParseError("checkpoint parameter count does not match its dimensions", 0, 0);
  }
  std::vector<double> flat(count);
  for (auto& v : flat) {
    v = std::bit_cast<double>(get_uint(is, 8));
  }
  out.params.weights.assign(flat);
  return out;
}

}  // namespace badge
