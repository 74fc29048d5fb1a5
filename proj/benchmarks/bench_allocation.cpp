// Copyright 2026 The posalloc Authors.
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


#include <benchmark/benchmark.h>

#include <random>

#include "posalloc/allocation.hpp"
#include "posalloc/simulation.hpp"

namespace {

posalloc::Matrix random_scores(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  posalloc::Matrix m(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) m(j, k) = u(rng);
  }
  return m;
}

void BM_GfpRank(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> bar(n);
  for (auto& v : bar) v = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(posalloc::gfp_rank(bar));
}
BENCHMARK(BM_GfpRank)->RangeMultiplier(2)->Range(2, 256);

void BM_MatchOptimal(benchmark::State& state) {
  const auto s = random_scores(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(posalloc::match_optimal(s));
}
BENCHMARK(BM_MatchOptimal)->RangeMultiplier(2)->Range(2, 256);

void BM_MatchAuction(benchmark::State& state) {
  const auto s = random_scores(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(posalloc::match_auction_eps(s));
}
BENCHMARK(BM_MatchAuction)->RangeMultiplier(2)->Range(2, 256);

void BM_MatchBruteForce(benchmark::State& state) {
  const auto s = random_scores(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(posalloc::match_brute_force(s));
}
BENCHMARK(BM_MatchBruteForce)->DenseRange(2, 8);

void BM_Sweep(benchmark::State& state) {
  posalloc::SimulationConfig config;
  config.seeker_count = 200;
  config.depth_grid = {static_cast<std::size_t>(state.range(0))};
  config.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(posalloc::run_sweep(config));
}
BENCHMARK(BM_Sweep)->Arg(4)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
