#include <benchmark/benchmark.h>

#include "badge/embedding.hpp"
#include "badge/random.hpp"
#include "badge/samplers.hpp"

namespace {

badge::Matrix gaussian_points(std::int64_t n, std::int64_t dim, std::uint64_t seed) {
  badge::Rng rng(seed);
  badge::Matrix m(n, dim);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = rng.normal();
  }
  return m;
}

void BM_KMeansPP(benchmark::State& state) {
  const auto points = gaussian_points(state.range(0), state.range(1), 1);
  const auto k = static_cast<std::size_t>(state.range(2));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(badge::kmeanspp_seed(points, k, seed++));
  }
}

void BM_KDppMcmc(benchmark::State& state) {
  const auto points = gaussian_points(state.range(0), state.range(1), 1);
  const auto k = static_cast<std::size_t>(state.range(2));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(badge::kdpp_mcmc_sample(points, k, seed++));
  }
}

void BM_FurthestFirst(benchmark::State& state) {
  const auto pool = gaussian_points(state.range(0), state.range(1), 1);
  const auto labeled = gaussian_points(100, state.range(1), 2);
  const auto k = static_cast<std::size_t>(state.range(2));
  for (auto _ : state) {
    benchmark::DoNotOptimize(badge::ffkc_select(labeled, pool, k));
  }
}

void BM_EmbeddingMatrix(benchmark::State& state) {
  badge::Rng rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto classes = static_cast<std::size_t>(state.range(1));
  std::vector<badge::PredictionRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    records[i].probs.assign(classes, 1.0 / static_cast<double>(classes));
    records[i].features.resize(128);
    for (auto& z : records[i].features) {
      z = rng.uniform();
    }
    records[i].example_id = i;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(badge::embedding_matrix(records));
  }
}

}  // namespace

BENCHMARK(BM_KMeansPP)->Args({10000, 192, 100})->Args({10000, 192, 1000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KDppMcmc)->Args({10000, 192, 100})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FurthestFirst)->Args({10000, 128, 100})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EmbeddingMatrix)->Args({10000, 10})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
