#include "badge/embedding.hpp"

#include <cmath>
#include <string>

#include "badge/errors.hpp"

namespace badge {
namespace {

void check_probs(std::span<const double> probs) {
  if (probs.empty()) {
    throw InvalidInput("probability vector is empty");
  }
  double total = 0.0;
  for (const double p : probs) {
    if (!std::isfinite(p)) {
      throw InvalidInput("probability vector has a non-finite entry");
    }
    if (p < 0.0) {
      throw InvalidInput("probability vector has a negative entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw InvalidInput("probability vector sums to " + std::to_string(total));
  }
}

}  // namespace

void validate(const PredictionRecord& record) {
  check_probs(record.probs);
  for (const double z : record.features) {
    if (!std::isfinite(z)) {
      throw InvalidInput("feature vector has a non-finite entry");
    }
  }
}

std::size_t hypothetical_label(std::span<const double> probs) {
  if (probs.empty()) {
    throw InvalidInput("hypothetical_label: empty probability vector");
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!std::isfinite(probs[i])) {
      throw InvalidInput("hypothetical_label: non-finite probability");
    }
    if (probs[i] > probs[best]) {
      best = i;
    }
  }
  return best;
}

GradientEmbedding::GradientEmbedding(std::size_t num_classes, std::size_t dim,
                                     std::vector<double> values)
    : num_classes_(num_classes), dim_(dim), values_(std::move(values)), norm_sq_(0.0) {
  if (values_.size() != num_classes_ * dim_) {
    throw InvalidInput("GradientEmbedding: value count does not match K*d");
  }
  for (const double v : values_) {
    norm_sq_ += v * v;
  }
}

std::span<const double> GradientEmbedding::block(std::size_t class_index) const {
  if (class_index >= num_classes_) {
    throw InvalidInput("GradientEmbedding::block: class index out of range");
  }
  return std::span<const double>(values_).subspan(class_index * dim_, dim_);
}

void output_gradient_into(std::span<const double> probs, std::size_t label,
                          std::span<const double> features, std::span<double> out) {
  const std::size_t dim = features.size();
  if (label >= probs.size()) {
    throw InvalidInput("output_gradient_into: label out of range");
  }
  if (out.size() != probs.size() * dim) {
    throw InvalidInput("output_gradient_into: output buffer has wrong size");
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double scale = probs[i] - (i == label ? 1.0 : 0.0);
    double* block = out.data() + i * dim;
    for (std::size_t j = 0; j < dim; ++j) {
      block[j] = scale * features[j];
    }
  }
}

GradientEmbedding gradient_embedding(const PredictionRecord& record, std::size_t num_classes,
                                     std::size_t dim) {
  if (record.probs.size() != num_classes || record.features.size() != dim) {
    throw InvalidInput("gradient_embedding: record dimensions do not match K=" +
                       std::to_string(num_classes) + ", d=" + std::to_string(dim));
  }
  validate(record);
  std::vector<double> values(num_classes * dim);
  output_gradient_into(record.probs, hypothetical_label(record.probs), record.features, values);
  return GradientEmbedding(num_classes, dim, std::move(values));
}

GradientEmbedding gradient_embedding(const PredictionRecord& record) {
  return gradient_embedding(record, record.probs.size(), record.features.size());
}

double grad_norm_sq_for_label(std::span<const double> probs, std::size_t label, double z_norm_sq) {
  if (label >= probs.size()) {
    throw InvalidInput("grad_norm_sq_for_label: label out of range");
  }
  if (!(z_norm_sq >= 0.0)) {
    throw InvalidInput("grad_norm_sq_for_label: z_norm_sq must be non-negative");
  }
  // Evaluated as sum_{i != y} p_i^2 + (1 - p_y)^2, which equals
  // sum_i p_i^2 + 1 - 2 p_y but does not cancel when p is nearly one-hot.
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double r = (i == label) ? 1.0 - probs[i] : probs[i];
    total += r * r;
  }
  return total * z_norm_sq;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidInput("binary logistic: weight and input dimensions differ");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += a[i] * b[i];
  }
  return s;
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

int binary_hallucinated_label(std::span<const double> w, std::span<const double> x) {
  return sigmoid(dot(w, x)) > 0.5 ? 1 : -1;
}

std::vector<double> binary_logistic_gradient(std::span<const double> w, std::span<const double> x,
                                             int label) {
  if (label != 1 && label != -1) {
    throw InvalidInput("binary_logistic_gradient: label must be -1 or +1");
  }
  const double y = static_cast<double>(label);
  const double scale = (1.0 - sigmoid(y * dot(w, x))) * -y;
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    g[i] = scale * x[i];
  }
  return g;
}

Matrix embedding_matrix(std::span<const PredictionRecord> records) {
  if (records.empty()) {
    return Matrix(0, 0);
  }
  const std::size_t k = records.front().probs.size();
  const std::size_t d = records.front().features.size();
  Matrix out(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(k * d));
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.probs.size() != k || rec.features.size() != d) {
      throw InvalidInput("embedding_matrix: records have inconsistent dimensions");
    }
    std::span<double> row(out.row(static_cast<Eigen::Index>(r)).data(), k * d);
    output_gradient_into(rec.probs, hypothetical_label(rec.probs), rec.features, row);
  }
  return out;
}

}  // namespace badge
