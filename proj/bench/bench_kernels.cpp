// Serial reference loops against their OpenMP counterparts.
// Thread count for the parallel variants: NSP_BENCH_THREADS, default all cores.

#include <algorithm>
#include <cstdlib>
#include <random>
#include <thread>
#include <vector>

#include <benchmark/benchmark.h>
#include "nsp/kernels.hpp"
#include "nsp/parallel.hpp"

namespace k = nsp::kernels;

namespace {

std::vector<double> random_data(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (double& e : v) e = normal(rng);
  return v;
}

void set_threads(bool parallel) {
  const char* env = std::getenv("NSP_BENCH_THREADS");
  const int all = static_cast<int>(std::thread::hardware_concurrency());
  nsp::set_thread_count(parallel ? (env ? std::atoi(env) : std::max(all, 1)) : 1);
}

template <bool Parallel>
void dense_matvec(benchmark::State& state) {
  set_threads(Parallel);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = random_data(n * n, 1), x = random_data(n, 2);
  std::vector<double> y(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::parallel::dense_matvec(n, n, m, x, y);
    } else {
      k::serial::dense_matvec(n, n, m, x, y);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * n * n * sizeof(double)));
}

template <bool Parallel>
void gradient_2d(benchmark::State& state) {
  set_threads(Parallel);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_data(n * n, 3);
  std::vector<double> y(2 * n * n), back(n * n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::parallel::gradient_2d(n, n, x, y);
      k::parallel::gradient_2d_adjoint(n, n, y, back);
    } else {
      k::serial::gradient_2d(n, n, x, y);
      k::serial::gradient_2d_adjoint(n, n, y, back);
    }
    benchmark::DoNotOptimize(back.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}

template <bool Parallel>
void project_l2(benchmark::State& state) {
  set_threads(Parallel);
  const auto blocks = static_cast<std::size_t>(state.range(0));
  const auto u = random_data(2 * blocks, 4);
  std::vector<std::size_t> offsets(blocks + 1);
  for (std::size_t b = 0; b <= blocks; ++b) offsets[b] = 2 * b;
  std::vector<double> out(u.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::parallel::project_blocks_l2(offsets, 0.7, u, out);
    } else {
      k::serial::project_blocks_l2(offsets, 0.7, u, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * blocks));
}

template <bool Parallel>
void project_l1(benchmark::State& state) {
  set_threads(Parallel);
  const auto blocks = static_cast<std::size_t>(state.range(0));
  const auto u = random_data(8 * blocks, 5);
  std::vector<std::size_t> offsets(blocks + 1);
  for (std::size_t b = 0; b <= blocks; ++b) offsets[b] = 8 * b;
  std::vector<double> out(u.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::parallel::project_blocks_l1(offsets, 0.7, u, out);
    } else {
      k::serial::project_blocks_l1(offsets, 0.7, u, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * blocks));
}

}  // namespace

BENCHMARK(dense_matvec<false>)->Name("dense_matvec/serial")->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK(dense_matvec<true>)->Name("dense_matvec/parallel")->RangeMultiplier(4)->Range(64, 2048)->UseRealTime();
BENCHMARK(gradient_2d<false>)->Name("gradient_2d/serial")->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK(gradient_2d<true>)->Name("gradient_2d/parallel")->RangeMultiplier(4)->Range(64, 2048)->UseRealTime();
BENCHMARK(project_l2<false>)->Name("project_l2/serial")->RangeMultiplier(16)->Range(1 << 10, 1 << 22);
BENCHMARK(project_l2<true>)->Name("project_l2/parallel")->RangeMultiplier(16)->Range(1 << 10, 1 << 22)->UseRealTime();
BENCHMARK(project_l1<false>)->Name("project_l1/serial")->RangeMultiplier(16)->Range(1 << 10, 1 << 20);
BENCHMARK(project_l1<true>)->Name("project_l1/parallel")->RangeMultiplier(16)->Range(1 << 10, 1 << 20)->UseRealTime();

BENCHMARK_MAIN();
