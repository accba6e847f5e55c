// Command-line entry points: run, compare, bench-samplers, diag.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "badge/al_loop.hpp"
#include "badge/config.hpp"
#include "badge/errors.hpp"
#include "badge/random.hpp"
#include "badge/reports.hpp"
#include "badge/results_io.hpp"
#include "badge/samplers.hpp"

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "results";
  std::optional<std::string> selector;
  std::optional<std::size_t> reps;
  std::size_t workers = 0;
  bool omit_timing = false;
};

int cmd_run(const RunArgs& args) {
  badge::RunConfig cfg = badge::load_run_config(args.config);
  if (args.seed) {
    cfg.experiment.seed = *args.seed;
  }
  if (args.selector) {
    cfg.experiment.selector.kind = badge::parse_selector(*args.selector);
  }
  if (args.reps) {
    cfg.experiment.repetitions = *args.reps;
  }
  cfg.experiment.record_timing = !args.omit_timing;
  cfg.experiment.validate();

  const badge::Dataset dataset = badge::load_dataset(cfg.dataset);
  const std::string started = args.omit_timing ? "" : utc_now();
  const auto results = badge::run_experiment(cfg.experiment, dataset, args.workers);

  fs::create_directories(args.out_dir);
  badge::RunManifest manifest;
  manifest.config_json = badge::to_json(cfg);
  manifest.dataset = dataset.name;
  manifest.selector = std::string(badge::to_string(cfg.experiment.selector.kind));
  manifest.initial_labels = cfg.experiment.initial_labels;
  manifest.batch_size = cfg.experiment.batch_size;
  manifest.base_seed = cfg.experiment.seed;
  manifest.software_version = badge::software_version();
  for (const auto& rep : results) {
    const std::string file = "rep_" + std::to_string(rep.repetition) + ".csv";
    badge::write_results(fs::path(args.out_dir) / file, rep.repetition, rep.rounds);
    manifest.seeds.push_back(rep.seed);
    manifest.result_files.push_back(file);
    manifest.truncated.push_back(rep.truncated);
    const auto& last = rep.rounds.back();
    std::cout << "rep " << rep.repetition << ": labels=" << last.labels
              << " test_accuracy=" << last.test_accuracy << (rep.truncated ? " (truncated)" : "")
              << '\n';
  }
  if (!args.omit_timing) {
    manifest.started_at = started;
    manifest.finished_at = utc_now();
  }
  badge::write_manifest(fs::path(args.out_dir) / "manifest.json", manifest);
  std::cout << "wrote " << results.size() << " repetition file(s) to " << args.out_dir << '\n';
  return 0;
}

int cmd_compare(const std::vector<std::string>& inputs, const std::string& out_dir,
                const badge::CompareOptions& options) {
  std::vector<badge::RunRecord> runs;
  for (const auto& input : inputs) {
    for (const auto& manifest : badge::find_manifests(input)) {
      runs.push_back(badge::load_run(manifest));
    }
  }
  if (runs.empty()) {
    std::cerr << "compare: no manifest.json found under the given inputs\n";
    return 1;
  }
  const auto comparison = badge::build_comparison(runs, options);
  badge::write_comparison(out_dir, comparison, runs, options);
  for (const auto& w : comparison.warnings) {
    std::cerr << "warning: " << w << '\n';
  }
  std::cout << "compared " << runs.size() << " run(s), " << comparison.settings.size()
            << " setting(s); outputs in " << out_dir << '\n';
  return 0;
}

int cmd_diag(const std::string& input, const std::string& out_dir) {
  for (const auto& manifest : badge::find_manifests(input)) {
    const auto run = badge::load_run(manifest);
    const auto name = run.manifest.selector + "_" + run.manifest.dataset + "_B" +
                      std::to_string(run.manifest.batch_size) + "_diagnostics.csv";
    badge::write_diagnostics(fs::path(out_dir) / name, run);
    std::cout << "wrote " << (fs::path(out_dir) / name).string() << '\n';
  }
  return 0;
}

int cmd_bench(std::size_t n, std::size_t dim, std::size_t k, std::uint64_t seed,
              std::optional<std::size_t> tau) {
  badge::Rng rng(seed);
  badge::Matrix points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    points.data()[i] = rng.normal();
  }
  auto time = [](auto&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const double kmpp = time([&] { (void)badge::kmeanspp_seed(points, k, seed); });
  const double kdpp = time([&] { (void)badge::kdpp_mcmc_sample(points, k, seed, tau); });
  std::cout << "sampler,n,dim,k,tau,seconds\n";
  std::cout << "kmeans++," << n << ',' << dim << ',' << k << ",," << kmpp << '\n';
  std::cout << "kdpp_mcmc," << n << ',' << dim << ',' << k << ','
            << tau.value_or(badge::default_mcmc_steps(k)) << ',' << kdpp << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch active learning by diverse gradient embeddings"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("--config", run_args.config, "JSON config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", run_args.seed, "Override the base seed");
  run->add_option("--out-dir", run_args.out_dir, "Directory for result files")->capture_default_str();
  run->add_option("--selector", run_args.selector,
                  "Override the selector (random, confidence, margin, entropy, coreset, badge, "
                  "badge_kdpp, albl)");
  run->add_option("--reps", run_args.reps, "Override the number of repetitions");
  run->add_option("--workers", run_args.workers, "Parallel repetitions (0 = all cores)");
  run->add_flag("--omit-timing", run_args.omit_timing,
                "Write zero selection times and no timestamps (byte-reproducible output)");

  std::vector<std::string> compare_inputs;
  std::string compare_out = "comparison";
  badge::CompareOptions compare_options;
  auto* compare = app.add_subcommand("compare", "Aggregate runs into a penalty matrix and CDFs");
  compare->add_option("--inputs", compare_inputs, "Run directories or parent directories")
      ->required()
      ->expected(1, -1);
  compare->add_option("--out-dir", compare_out, "Output directory")->capture_default_str();
  compare->add_option("--random-name", compare_options.random_algorithm,
                      "Selector name of the random baseline")
      ->capture_default_str();
  compare->add_flag("--all-budgets", compare_options.all_budgets,
                    "Compare at every logged budget instead of the n0 schedule");

  std::string diag_input;
  std::string diag_out = "diagnostics";
  auto* diag = app.add_subcommand("diag", "Re-emit batch diagnostics from result logs");
  diag->add_option("--input", diag_input, "Run directory or parent directory")->required();
  diag->add_option("--out-dir", diag_out, "Output directory")->capture_default_str();

  std::size_t bench_n = 10000;
  std::size_t bench_dim = 192;
  std::size_t bench_k = 100;
  std::uint64_t bench_seed = 0;
  std::optional<std::size_t> bench_tau;
  auto* bench = app.add_subcommand("bench-samplers", "Time k-means++ against k-DPP MCMC");
  bench->add_option("--n", bench_n, "Pool size")->capture_default_str();
  bench->add_option("--dim", bench_dim, "Embedding dimension")->capture_default_str();
  bench->add_option("--k", bench_k, "Batch size")->capture_default_str();
  bench->add_option("--seed", bench_seed, "Seed")->capture_default_str();
  bench->add_option("--tau", bench_tau, "MCMC steps (default floor(5 k ln k))");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return cmd_run(run_args);
    }
    if (*compare) {
      return cmd_compare(compare_inputs, compare_out, compare_options);
    }
    if (*diag) {
      return cmd_diag(diag_input, diag_out);
    }
    if (*bench) {
      return cmd_bench(bench_n, bench_dim, bench_k, bench_seed, bench_tau);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
