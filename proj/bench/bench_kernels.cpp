// Copyright 2026 The qvlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Replicate kernels, serial against the OpenMP pool. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <vector>

#include "qvlab/algorithms.hpp"
#include "qvlab/core_model.hpp"
#include "qvlab/coupling.hpp"
#include "qvlab/limit_sampler.hpp"
#include "qvlab/parallel.hpp"
#include "qvlab/path_metrics.hpp"

namespace qvlab {
namespace {

Execution mode(const benchmark::State& s) { return s.range(0) ? Execution::parallel : Execution::serial; }

void label(benchmark::State& s) { s.SetLabel(s.range(0) ? "parallel x" + std::to_string(worker_count()) : "serial"); }

std::vector<double> uniforms(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform();
  return v;
}

void BM_CoupledCounts(benchmark::State& s) {
  constexpr std::size_t reps = 32, n = 10000;
  std::vector<std::uint64_t> sink(reps);
  for (auto _ : s) {
    for_each_replicate(
        reps,
        [&](std::size_t r) {
          Rng rng(1, r);
          const auto keys = uniforms(n, rng);
          const auto p = perturb(keys, uniforms(n, rng));
          const auto tree = IntervalTree::build(keys, 6);
          sink[r] = count_levels(tree, keys, p.perturbed, n).S[0];
        },
        mode(s));
    benchmark::DoNotOptimize(sink.data());
  }
  s.SetItemsProcessed(s.iterations() * reps);
  label(s);
}
BENCHMARK(BM_CoupledCounts)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ConditionalCounts(benchmark::State& s) {
  constexpr std::size_t reps = 256, n = 100000;
  Rng setup(2, 0);
  const auto tree = IntervalTree::sample(4, setup);
  std::vector<std::uint64_t> sink(reps);
  for (auto _ : s) {
    for_each_replicate(
        reps,
        [&](std::size_t r) {
          Rng rng(2, r + 1);
          sink[r] = sample_counts_given_tree(tree, n, rng, true).S[1];
        },
        mode(s));
    benchmark::DoNotOptimize(sink.data());
  }
  s.SetItemsProcessed(s.iterations() * reps);
  label(s);
}
BENCHMARK(BM_ConditionalCounts)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_QuickVal(benchmark::State& s) {
  constexpr std::size_t reps = 64, n = 20000;
  std::vector<std::size_t> sink(reps);
  for (auto _ : s) {
    for_each_replicate(
        reps,
        [&](std::size_t r) {
          Rng rng(3, r);
          sink[r] = quickval(uniforms(n, rng), 0.3, CostModel::unit()).comparisons;
        },
        mode(s));
    benchmark::DoNotOptimize(sink.data());
  }
  s.SetItemsProcessed(s.iterations() * reps);
  label(s);
}
BENCHMARK(BM_QuickVal)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_LimitPathsHolder(benchmark::State& s) {
  constexpr std::size_t reps = 16, pairs = 5000;
  std::vector<std::size_t> sink(reps);
  for (auto _ : s) {
    for_each_replicate(
        reps,
        [&](std::size_t r) {
          Rng rng(4, r);
          const auto tree = IntervalTree::sample(10, rng);
          const auto g = sample_G_inf(sample_family(tree, rng));
          sink[r] = holder_violations(g, tree, sample_pairs(tree, pairs, rng), Metric::dG, 0.9, 2).violations;
        },
        mode(s));
    benchmark::DoNotOptimize(sink.data());
  }
  s.SetItemsProcessed(s.iterations() * reps);
  label(s);
}
BENCHMARK(BM_LimitPathsHolder)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SigmaViaJ(benchmark::State& s) {
  constexpr std::size_t trees = 8, samples = 50000;
  std::vector<double> sink(trees);
  for (auto _ : s) {
    for_each_replicate(
        trees,
        [&](std::size_t t) {
          Rng rng(5, t);
          const auto tree = IntervalTree::sample(6, rng);
          sink[t] = sigma_via_J(tree, 0.3, 0.6, 6, samples, rng).value;
        },
        mode(s));
    benchmark::DoNotOptimize(sink.data());
  }
  s.SetItemsProcessed(s.iterations() * trees);
  label(s);
}
BENCHMARK(BM_SigmaViaJ)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace qvlab

BENCHMARK_MAIN();
