#include "badge/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "badge/errors.hpp"
#include "badge/random.hpp"

namespace badge {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') {
    out = out.substr(1, out.size() - 2);
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string_view rest(line);
  while (true) {
    const auto comma = rest.find(',');
    cells.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) {
      break;
    }
    rest.remove_prefix(comma + 1);
  }
  return cells;
}

bool parse_double(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') {
    text.remove_prefix(1);
  }
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && !text.empty();
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

/// Dense ids in first-appearance order.
struct LabelIndex {
  std::unordered_map<std::string, std::size_t> ids;
  std::vector<std::string> names;

  std::size_t intern(const std::string& token) {
    const auto [it, inserted] = ids.emplace(token, names.size());
    if (inserted) {
      names.push_back(token);
    }
    return it->second;
  }
};

void finish(Dataset& ds, LabelIndex& index, const SplitOptions& split) {
  ds.num_classes = index.names.size();
  ds.class_names = std::move(index.names);
  assign_split(ds, split);
  standardize_on_train(ds);
  ds.validate();
}

}  // namespace

Matrix Dataset::rows(std::span<const std::size_t> ids) const {
  Matrix out(static_cast<Eigen::Index>(ids.size()), features.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(ids[i]));
  }
  return out;
}

std::vector<std::size_t> Dataset::labels_of(std::span<const std::size_t> ids) const {
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (const auto id : ids) {
    out.push_back(labels.at(id));
  }
  return out;
}

void Dataset::validate() const {
  const std::size_t n = labels.size();
  if (static_cast<std::size_t>(features.rows()) != n) {
    throw InvalidInput("Dataset: feature rows and labels differ in count");
  }
  if (!features.allFinite()) {
    throw InvalidInput("Dataset: non-finite feature value");
  }
  for (const auto y : labels) {
    if (y >= num_classes) {
      throw InvalidInput("Dataset: label out of range");
    }
  }
  std::vector<char> seen(n, 0);
  for (const auto* ids : {&train_ids, &test_ids}) {
    for (const auto id : *ids) {
      if (id >= n || seen[id]) {
        throw InvalidInput("Dataset: split is not a partition of the examples");
      }
      seen[id] = 1;
    }
  }
  if (train_ids.size() + test_ids.size() != n) {
    throw InvalidInput("Dataset: split does not cover every example");
  }
  std::vector<char> present(num_classes, 0);
  for (const auto id : train_ids) {
    present[labels[id]] = 1;
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (!present[c]) {
      throw InvalidInput("Dataset: class " + std::to_string(c) + " missing from train split");
    }
  }
}

void assign_split(Dataset& dataset, const SplitOptions& options) {
  if (!(options.test_fraction >= 0.0 && options.test_fraction < 1.0)) {
    throw InvalidInput("test_fraction must lie in [0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(dataset.num_classes);
  for (std::size_t i = 0; i < dataset.labels.size(); ++i) {
    by_class.at(dataset.labels[i]).push_back(i);
  }
  Rng rng(mix_seed(options.seed, 7));
  dataset.train_ids.clear();
  dataset.test_ids.clear();
  for (auto& members : by_class) {
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.index(i)]);
    }
    const auto n_test = static_cast<std::size_t>(
        std::floor(static_cast<double>(members.size()) * options.test_fraction));
    dataset.test_ids.insert(dataset.test_ids.end(), members.begin(),
                            members.begin() + static_cast<std::ptrdiff_t>(n_test));
    dataset.train_ids.insert(dataset.train_ids.end(),
                             members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(dataset.train_ids.begin(), dataset.train_ids.end());
  std::sort(dataset.test_ids.begin(), dataset.test_ids.end());
}

void standardize_on_train(Dataset& dataset) {
  if (dataset.train_ids.empty()) {
    return;
  }
  const Matrix train = dataset.rows(dataset.train_ids);
  const Eigen::RowVectorXd mean = train.colwise().mean();
  const Eigen::RowVectorXd var =
      (train.rowwise() - mean).array().square().colwise().mean().matrix();
  for (Eigen::Index c = 0; c < dataset.features.cols(); ++c) {
    if (var(c) > 0.0) {
      dataset.features.col(c) = (dataset.features.col(c).array() - mean(c)) / std::sqrt(var(c));
    } else {
      dataset.features.col(c).setZero();
    }
  }
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 bool has_header, const SplitOptions& split) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path.string(), 0, 0);
  }
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  if (has_header) {
    while (std::getline(in, line)) {
      ++row;
      if (!is_blank(line)) {
        header = split_csv_line(line);
        break;
      }
    }
  }

  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> rows_of;
  while (std::getline(in, line)) {
    ++row;
    if (is_blank(line)) {
      continue;
    }
    cells.push_back(split_csv_line(line));
    rows_of.push_back(row);
  }
  if (cells.empty()) {
    throw ParseError("no data rows in " + path.string(), 0, 0);
  }

  const std::size_t width = has_header ? header.size() : cells.front().size();
  std::size_t label_idx = width;
  if (label_column == "last") {
    label_idx = width - 1;
  } else if (const auto it = std::find(header.begin(), header.end(), label_column);
             it != header.end()) {
    label_idx = static_cast<std::size_t>(it - header.begin());
  } else {
    std::size_t parsed = 0;
    const auto* end = label_column.data() + label_column.size();
    const auto [ptr, ec] = std::from_chars(label_column.data(), end, parsed);
    if (ec == std::errc() && ptr == end && !label_column.empty()) {
      label_idx = parsed;
    }
  }
  if (label_idx >= width) {
    throw ParseError("unknown label column '" + label_column + "'", has_header ? 1 : 0, 0);
  }

  Dataset ds;
  ds.name = path.stem().string();
  ds.provenance = "csv:" + path.string();
  ds.features.resize(static_cast<Eigen::Index>(cells.size()),
                     static_cast<Eigen::Index>(width - 1));
  LabelIndex index;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    const auto& rec = cells[r];
    if (rec.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, found " +
                           std::to_string(rec.size()),
                       rows_of[r], 0);
    }
    Eigen::Index out_col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_idx) {
        if (rec[c].empty()) {
          throw ParseError("empty label", rows_of[r], c + 1);
        }
        ds.labels.push_back(index.intern(rec[c]));
        continue;
      }
      double value = 0.0;
      if (!parse_double(rec[c], value) || !std::isfinite(value)) {
        throw ParseError("non-numeric feature '" + rec[c] + "'", rows_of[r], c + 1);
      }
      ds.features(static_cast<Eigen::Index>(r), out_col++) = value;
    }
  }
  finish(ds, index, split);
  return ds;
}

Dataset load_libsvm(const std::filesystem::path& path, std::size_t num_features,
                    const SplitOptions& split) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path.string(), 0, 0);
  }
  struct SparseRow {
    std::string label;
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::vector<SparseRow> parsed;
  std::size_t max_index = 0;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    if (is_blank(line)) {
      continue;
    }
    std::istringstream tokens(line);
    SparseRow sr;
    tokens >> sr.label;
    std::set<std::size_t> seen;
    std::string tok;
    std::size_t column = 1;
    while (tokens >> tok) {
      ++column;
      const auto colon = tok.find(':');
      std::size_t idx = 0;
      double value = 0.0;
      const auto* idx_end = tok.data() + (colon == std::string::npos ? 0 : colon);
      const auto [ptr, ec] = std::from_chars(tok.data(), idx_end, idx);
      if (colon == std::string::npos || ec != std::errc() || ptr != idx_end || idx == 0 ||
          !parse_double(std::string_view(tok).substr(colon + 1), value) ||
          !std::isfinite(value)) {
        throw ParseError("malformed index:value pair '" + tok + "'", row, column);
      }
      if (!seen.insert(idx).second) {
        throw ParseError("duplicate feature index " + std::to_string(idx), row, column);
      }
      if (num_features != 0 && idx > num_features) {
        throw ParseError("feature index " + std::to_string(idx) + " exceeds dimension", row,
                         column);
      }
      max_index = std::max(max_index, idx);
      sr.entries.emplace_back(idx, value);
    }
    parsed.push_back(std::move(sr));
  }
  if (parsed.empty()) {
    throw ParseError("no data rows in " + path.string(), 0, 0);
  }
  const std::size_t dim = num_features != 0 ? num_features : max_index;
  if (dim == 0) {
    throw ParseError("no features in " + path.string(), 0, 0);
  }

  Dataset ds;
  ds.name = path.stem().string();
  ds.provenance = "libsvm:" + path.string();
  ds.features = Matrix::Zero(static_cast<Eigen::Index>(parsed.size()),
                             static_cast<Eigen::Index>(dim));
  LabelIndex index;
  for (std::size_t r = 0; r < parsed.size(); ++r) {
    ds.labels.push_back(index.intern(parsed[r].label));
    for (const auto& [idx, value] : parsed[r].entries) {
      ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(idx - 1)) = value;
    }
  }
  finish(ds, index, split);
  return ds;
}

Dataset synth_gaussian_mixture(std::size_t num_classes, std::size_t input_dim, std::size_t n,
                               double separation, std::uint64_t rng_seed, double test_fraction) {
  if (num_classes == 0 || input_dim == 0 || n < num_classes) {
    throw InvalidInput("synth_gaussian_mixture: need K >= 1, d_in >= 1 and n >= K");
  }
  Rng rng(rng_seed);
  const auto d = static_cast<Eigen::Index>(input_dim);
  Matrix means(static_cast<Eigen::Index>(num_classes), d);
  for (Eigen::Index k = 0; k < means.rows(); ++k) {
    for (Eigen::Index j = 0; j < d; ++j) {
      means(k, j) = rng.normal();
    }
    means.row(k).normalize();
    means.row(k) *= separation;
  }

  Dataset ds;
  ds.name = "gaussian_mixture";
  std::ostringstream prov;
  prov << "synthetic:K=" << num_classes << ",d_in=" << input_dim << ",n=" << n
       << ",separation=" << separation << ",seed=" << rng_seed;
  ds.provenance = prov.str();
  ds.num_classes = num_classes;
  for (std::size_t k = 0; k < num_classes; ++k) {
    ds.class_names.push_back(std::to_string(k));
  }
  ds.features.resize(static_cast<Eigen::Index>(n), d);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    ds.labels[i] = i % num_classes;
    for (Eigen::Index j = 0; j < d; ++j) {
      ds.features(r, j) = means(static_cast<Eigen::Index>(ds.labels[i]), j) + rng.normal();
    }
  }
  assign_split(ds, {test_fraction, rng_seed});
  ds.validate();
  return ds;
}

}  // namespace badge
