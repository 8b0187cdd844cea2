// Serial reference kernels against the OpenMP block kernels.
//
//   ./bench_kernels --benchmark_filter=Accel
//   OMP_NUM_THREADS=4 ./bench_kernels

#include <vector>

#include <benchmark/benchmark.h>

#include "cskin/kernels.hpp"
#include "cskin/sampler.hpp"

namespace {

cskin::Ensemble make(std::size_t n) {
  return cskin::sample(cskin::InitSpec::polynomial(2, 8.0), n, 7);
}

// range(1) encodes beta in quarters, so 1 -> 0.25 and 4 -> 1.
void BM_Accel(benchmark::State& state, cskin::KernelMode mode) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const double beta = 0.25 * static_cast<double>(state.range(1));
  const auto ens = make(n);
  const cskin::ModelParams params(1.0, beta);
  std::vector<double> out(2 * n);
  for (auto _ : state) {
    cskin::kernels::acceleration(cskin::kernels::view(ens), params, mode, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["pairs/s"] = benchmark::Counter(
      static_cast<double>(n) * static_cast<double>(n - 1) / 2.0, benchmark::Counter::kIsIterationInvariantRate);
}

void BM_Dissipation(benchmark::State& state, cskin::KernelMode mode) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const double beta = 0.25 * static_cast<double>(state.range(1));
  const auto ens = make(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cskin::kernels::pair_dissipation(cskin::kernels::view(ens), beta, mode));
  }
  state.counters["pairs/s"] = benchmark::Counter(
      static_cast<double>(n) * static_cast<double>(n - 1) / 2.0, benchmark::Counter::kIsIterationInvariantRate);
}

void args(benchmark::internal::Benchmark* b) {
  for (long n : {256, 1024, 4096}) {
    for (long q : {0, 1, 3, 4}) b->Args({n, q});
  }
  b->Unit(benchmark::kMicrosecond);
}

}  // namespace

BENCHMARK_CAPTURE(BM_Accel, reference, cskin::KernelMode::Reference)->Apply(args);
BENCHMARK_CAPTURE(BM_Accel, parallel, cskin::KernelMode::Parallel)->Apply(args);
BENCHMARK_CAPTURE(BM_Dissipation, reference, cskin::KernelMode::Reference)->Apply(args);
BENCHMARK_CAPTURE(BM_Dissipation, parallel, cskin::KernelMode::Parallel)->Apply(args);

BENCHMARK_MAIN();
