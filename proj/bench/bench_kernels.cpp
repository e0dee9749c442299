#include <benchmark/benchmark.h>

#include <random>

#include "hsacc/kernels.hpp"

using namespace hsacc;

namespace {
Eigen::MatrixXd random_matrix(int r, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = dist(rng);
  return m;
}
}  // namespace

static void BM_MatmulSerial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_matrix(n, n, 1);
  const auto b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::matmul_serial(a, b));
}
BENCHMARK(BM_MatmulSerial)->Arg(64)->Arg(256)->Arg(512);

static void BM_MatmulOmp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_matrix(n, n, 1);
  const auto b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::matmul_omp(a, b));
}
BENCHMARK(BM_MatmulOmp)->Arg(64)->Arg(256)->Arg(512);

static void BM_PairwiseSqdistSerial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_matrix(n, 64, 3);
  const auto b = random_matrix(n / 4, 64, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::pairwise_sqdist_serial(a, b));
}
BENCHMARK(BM_PairwiseSqdistSerial)->Arg(256)->Arg(1024);

static void BM_PairwiseSqdistOmp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_matrix(n, 64, 3);
  const auto b = random_matrix(n / 4, 64, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::pairwise_sqdist_omp(a, b));
}
BENCHMARK(BM_PairwiseSqdistOmp)->Arg(256)->Arg(1024);

static void BM_KmeansAssignSerial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto x = random_matrix(n, 32, 5);
  const auto centers = random_matrix(16, 32, 6);
  std::vector<int> labels;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::kmeans_assign_serial(x, centers, labels));
}
BENCHMARK(BM_KmeansAssignSerial)->Arg(1024)->Arg(8192);

static void BM_KmeansAssignOmp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto x = random_matrix(n, 32, 5);
  const auto centers = random_matrix(16, 32, 6);
  std::vector<int> labels;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::kmeans_assign_omp(x, centers, labels));
}
BENCHMARK(BM_KmeansAssignOmp)->Arg(1024)->Arg(8192);

BENCHMARK_MAIN();
