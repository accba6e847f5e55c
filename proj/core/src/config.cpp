#include "badge/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "badge/errors.hpp"

namespace badge {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw ParseError("unknown key '" + key + "' in " + where, 0, 0);
    }
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) {
    out = it->get<T>();
  }
}

DatasetSpec parse_dataset(const json& j) {
  reject_unknown(j,
                 {"kind", "name", "path", "label_column", "has_header", "num_features",
                  "test_fraction", "split_seed", "num_classes", "input_dim", "n", "separation",
                  "seed"},
                 "dataset");
  DatasetSpec d;
  read_opt(j, "kind", d.kind);
  read_opt(j, "name", d.name);
  read_opt(j, "path", d.path);
  read_opt(j, "label_column", d.label_column);
  read_opt(j, "has_header", d.has_header);
  read_opt(j, "num_features", d.num_features);
  read_opt(j, "test_fraction", d.test_fraction);
  read_opt(j, "split_seed", d.split_seed);
  read_opt(j, "num_classes", d.num_classes);
  read_opt(j, "input_dim", d.input_dim);
  read_opt(j, "n", d.n);
  read_opt(j, "separation", d.separation);
  read_opt(j, "seed", d.seed);
  if (d.kind != "synthetic" && d.kind != "csv" && d.kind != "libsvm") {
    throw ParseError("dataset.kind must be synthetic, csv or libsvm", 0, 0);
  }
  if (d.kind != "synthetic" && d.path.empty()) {
    throw ParseError("dataset.path is required for " + d.kind, 0, 0);
  }
  return d;
}

SelectorSpec parse_selector_spec(const json& j) {
  SelectorSpec s;
  if (j.is_string()) {
    s.kind = parse_selector(j.get<std::string>());
    return s;
  }
  reject_unknown(j, {"name", "eta", "gamma", "tau"}, "selector");
  s.kind = parse_selector(j.at("name").get<std::string>());
  read_opt(j, "eta", s.albl_eta);
  read_opt(j, "gamma", s.albl_gamma);
  if (const auto it = j.find("tau"); it != j.end() && !it->is_null()) {
    s.kdpp_tau = it->get<std::size_t>();
  }
  return s;
}

MlpConfig parse_model(const json& j) {
  reject_unknown(j,
                 {"hidden_dim", "learning_rate", "adam_beta1", "adam_beta2", "adam_eps",
                  "train_acc_threshold", "max_epochs", "minibatch_size"},
                 "model");
  MlpConfig m;
  read_opt(j, "hidden_dim", m.hidden_dim);
  read_opt(j, "learning_rate", m.learning_rate);
  read_opt(j, "adam_beta1", m.adam_beta1);
  read_opt(j, "adam_beta2", m.adam_beta2);
  read_opt(j, "adam_eps", m.adam_eps);
  read_opt(j, "train_acc_threshold", m.train_acc_threshold);
  read_opt(j, "max_epochs", m.max_epochs);
  read_opt(j, "minibatch_size", m.minibatch_size);
  return m;
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), 0, 0);
  }
  RunConfig cfg;
  try {
    reject_unknown(j, {"dataset", "selector", "M", "B", "T", "R", "seed", "model", "diagnostics"},
                   "config");
    if (const auto it = j.find("dataset"); it != j.end()) {
      cfg.dataset = parse_dataset(*it);
    }
    if (const auto it = j.find("selector"); it != j.end()) {
      cfg.experiment.selector = parse_selector_spec(*it);
    }
    read_opt(j, "M", cfg.experiment.initial_labels);
    read_opt(j, "B", cfg.experiment.batch_size);
    read_opt(j, "T", cfg.experiment.rounds);
    read_opt(j, "R", cfg.experiment.repetitions);
    read_opt(j, "seed", cfg.experiment.seed);
    read_opt(j, "diagnostics", cfg.experiment.compute_diagnostics);
    if (const auto it = j.find("model"); it != j.end()) {
      cfg.experiment.model = parse_model(*it);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config has a value of the wrong type: ") + e.what(), 0, 0);
  } catch (const InvalidInput& e) {
    throw ParseError(e.what(), 0, 0);
  }
  if (cfg.dataset.name.empty()) {
    cfg.dataset.name = cfg.dataset.kind == "synthetic"
                           ? "gaussian_mixture"
                           : std::filesystem::path(cfg.dataset.path).stem().string();
  }
  cfg.experiment.dataset_name = cfg.dataset.name;
  cfg.experiment.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw ParseError("cannot open config " + path.string(), 0, 0);
  }
  std::ostringstream text;
  text << is.rdbuf();
  RunConfig cfg = parse_run_config(text.str());
  if (!cfg.dataset.path.empty() && std::filesystem::path(cfg.dataset.path).is_relative()) {
    cfg.dataset.path = (path.parent_path() / cfg.dataset.path).lexically_normal().string();
  }
  return cfg;
}

std::string to_json(const RunConfig& config) {
  const auto& d = config.dataset;
  const auto& e = config.experiment;
  const auto& m = e.model;
  json j;
  j["dataset"] = {{"kind", d.kind},
                  {"name", d.name},
                  {"path", d.path},
                  {"label_column", d.label_column},
                  {"has_header", d.has_header},
                  {"num_features", d.num_features},
                  {"test_fraction", d.test_fraction},
                  {"split_seed", d.split_seed},
                  {"num_classes", d.num_classes},
                  {"input_dim", d.input_dim},
                  {"n", d.n},
                  {"separation", d.separation},
                  {"seed", d.seed}};
  j["selector"] = {{"name", std::string(to_string(e.selector.kind))},
                   {"eta", e.selector.albl_eta},
                   {"gamma", e.selector.albl_gamma},
                   {"tau", e.selector.kdpp_tau ? json(*e.selector.kdpp_tau) : json(nullptr)}};
  j["M"] = e.initial_labels;
  j["B"] = e.batch_size;
  j["T"] = e.rounds;
  j["R"] = e.repetitions;
  j["seed"] = e.seed;
  j["diagnostics"] = e.compute_diagnostics;
  j["model"] = {{"hidden_dim", m.hidden_dim},
                {"learning_rate", m.learning_rate},
                {"adam_beta1", m.adam_beta1},
                {"adam_beta2", m.adam_beta2},
                {"adam_eps", m.adam_eps},
                {"train_acc_threshold", m.train_acc_threshold},
                {"max_epochs", m.max_epochs},
                {"minibatch_size", m.minibatch_size}};
  return j.dump(2);
}

Dataset load_dataset(const DatasetSpec& spec) {
  Dataset ds;
  const SplitOptions split{spec.test_fraction, spec.split_seed};
  if (spec.kind == "synthetic") {
    ds = synth_gaussian_mixture(spec.num_classes, spec.input_dim, spec.n, spec.separation,
                                spec.seed, spec.test_fraction);
  } else if (spec.kind == "csv") {
    ds = load_csv(spec.path, spec.label_column, spec.has_header, split);
  } else if (spec.kind == "libsvm") {
    ds = load_libsvm(spec.path, spec.num_features, split);
  } else {
    throw InvalidInput("unknown dataset kind '" + spec.kind + "'");
  }
  if (!spec.name.empty()) {
    ds.name = spec.name;
  }
  return ds;
}

}  // namespace badge
