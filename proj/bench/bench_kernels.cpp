// Copyright 2026 The zELO Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference vs OpenMP kernels. Argument: candidate count n; edges are
// a degree-8 cycle union (4n edges) or, for the dense variants, all pairs.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "zelo/graphs.hpp"
#include "zelo/kernels.hpp"
#include "zelo/solver.hpp"

namespace zelo {
namespace {

struct Instance {
  std::vector<kernels::EdgeTerm> edges;
  kernels::Csr incidence;
  std::vector<double> elos;
  std::vector<double> grad;
};

Instance MakeInstance(std::size_t n, bool dense) {
  Instance in;
  std::mt19937_64 rng(n);
  std::uniform_real_distribution<double> p(0.05, 0.95);
  std::normal_distribution<double> e(0.0, 1.0);
  if (dense) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) in.edges.push_back({i, j, p(rng), 1.0});
    }
  } else {
    const auto g = SampleCycleUnion(n, 8, n);
    for (const auto& [a, b] : g.edges()) {
      in.edges.push_back({a, b, p(rng), 1.0});
    }
  }
  in.incidence = kernels::BuildIncidence(n, in.edges);
  in.elos.resize(n);
  for (double& x : in.elos) x = e(rng);
  in.grad.resize(n);
  return in;
}

template <bool kDense>
void BM_LossSerial(benchmark::State& state) {
  auto in = MakeInstance(state.range(0), kDense);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::NllLossSerial(ModelKind::kThurstone, in.edges, in.elos));
  }
  state.SetItemsProcessed(state.iterations() * in.edges.size());
}

template <bool kDense>
void BM_LossParallel(benchmark::State& state) {
  auto in = MakeInstance(state.range(0), kDense);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::NllLossParallel(ModelKind::kThurstone, in.edges, in.elos));
  }
  state.SetItemsProcessed(state.iterations() * in.edges.size());
}

template <bool kDense>
void BM_GradientSerial(benchmark::State& state) {
  auto in = MakeInstance(state.range(0), kDense);
  for (auto _ : state) {
    kernels::NllGradientSerial(ModelKind::kThurstone, in.edges, in.elos, in.grad);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * in.edges.size());
}

template <bool kDense>
void BM_GradientParallel(benchmark::State& state) {
  auto in = MakeInstance(state.range(0), kDense);
  for (auto _ : state) {
    kernels::NllGradientParallel(ModelKind::kThurstone, in.edges, in.incidence, in.elos, in.grad);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * in.edges.size());
}

void BM_BfsSerial(benchmark::State& state) {
  const auto adj = SampleCycleUnion(state.range(0), 8, 1).Adjacency();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::AllSourcesBfsSerial(adj));
}

void BM_BfsParallel(benchmark::State& state) {
  const auto adj = SampleCycleUnion(state.range(0), 8, 1).Adjacency();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::AllSourcesBfsParallel(adj));
}

BENCHMARK(BM_LossSerial<false>)->Arg(100)->Arg(10000)->Arg(100000);
BENCHMARK(BM_LossParallel<false>)->Arg(100)->Arg(10000)->Arg(100000);
BENCHMARK(BM_LossSerial<true>)->Arg(100)->Arg(1000);
BENCHMARK(BM_LossParallel<true>)->Arg(100)->Arg(1000);
BENCHMARK(BM_GradientSerial<false>)->Arg(100)->Arg(10000)->Arg(100000);
BENCHMARK(BM_GradientParallel<false>)->Arg(100)->Arg(10000)->Arg(100000);
BENCHMARK(BM_GradientSerial<true>)->Arg(100)->Arg(1000);
BENCHMARK(BM_GradientParallel<true>)->Arg(100)->Arg(1000);
BENCHMARK(BM_BfsSerial)->Arg(100)->Arg(2000);
BENCHMARK(BM_BfsParallel)->Arg(100)->Arg(2000);

// End-to-end fit of a 100-candidate query at the default budget.
void BM_FitCycles100(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> p(0.1, 0.9);
  std::vector<PreferenceRecord> records;
  const auto g = SampleCycleUnion(100, 8, 3);
  for (const auto& [a, b] : g.edges()) {
    records.push_back({"q", a, b, p(rng), 1.0});
  }
  const auto w = BuildPreferenceMatrix(records, 100);
  for (auto _ : state) benchmark::DoNotOptimize(FitElos(w, ModelKind::kThurstone));
}
BENCHMARK(BM_FitCycles100)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace zelo

BENCHMARK_MAIN();
