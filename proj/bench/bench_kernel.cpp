#include <benchmark/benchmark.h>

#include "pinnlab/autodiff/kernel.hpp"
#include "pinnlab/autodiff/reference.hpp"
#include "pinnlab/network.hpp"
#include "pinnlab/pde.hpp"

using namespace pinnlab;

namespace {

struct Problem {
  nn::NetworkState net;
  ad::LossSpec loss;
  std::vector<double> lambda;
};

Problem make_problem(pde::CaseId id, std::size_t points, int width) {
  const auto spec = pde::benchmark(id);
  const auto set = pde::sample_collocation(spec, 1, points, {.per_segment = 64, .initial = 128});
  return {nn::init({2, width, width, width, width, spec.outputs}, 2), pde::assemble_loss(spec, set, 32),
          std::vector<double>(points, 0.5)};
}

pde::CaseId case_of(int64_t i) { return static_cast<pde::CaseId>(i); }

void BM_SerialReference(benchmark::State& state) {
  const auto p = make_problem(case_of(state.range(0)), static_cast<std::size_t>(state.range(1)), 32);
  for (auto _ : state) benchmark::DoNotOptimize(ad::reference::loss_and_param_grad(p.net, p.loss, p.lambda));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_BlockedKernel(benchmark::State& state) {
  const auto p = make_problem(case_of(state.range(0)), static_cast<std::size_t>(state.range(1)), 32);
  const ad::KernelOptions opt{.block_size = 256, .threads = static_cast<int>(state.range(2))};
  for (auto _ : state) benchmark::DoNotOptimize(ad::loss_and_param_grad(p.net, p.loss, p.lambda, opt));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_BlockedKernelWithBatches(benchmark::State& state) {
  const auto p = make_problem(case_of(state.range(0)), static_cast<std::size_t>(state.range(1)), 32);
  ad::LossEvaluator ev(p.loss, {.block_size = 256, .threads = static_cast<int>(state.range(2))});
  for (auto _ : state) {
    ev.forward(p.net);
    benchmark::DoNotOptimize(ev.backward(p.lambda, true));
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

}  // namespace

// Arguments: case index (0 allen-cahn, 1 helmholtz, 2 burgers, 3 cavity), points, threads.
BENCHMARK(BM_SerialReference)->Args({0, 256})->Args({1, 256})->Args({3, 256})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BlockedKernel)
    ->Args({0, 256, 1})
    ->Args({1, 256, 1})
    ->Args({3, 256, 1})
    ->Args({0, 8192, 1})
    ->Args({0, 8192, 0})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BlockedKernelWithBatches)->Args({0, 8192, 1})->Args({0, 8192, 0})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
