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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "posalloc/errors.hpp"
#include "posalloc/mdp.hpp"

using namespace posalloc;
using posalloc::testing::enumerate_policies;
using posalloc::testing::random_model;
using posalloc::testing::truncated_horizon_values;

namespace {

MdpModel geometric(double gain, double discount) {
  MdpModel m;
  m.states = {"only"};
  m.actions = {1.0};
  m.gain = Matrix{{gain}};
  m.kernel = {Matrix{{1.0}}};
  m.discount = discount;
  return m;
}

// Two states, two actions. Action 1 in state 0 earns less now but moves to
// the lucrative state 1.
MdpModel two_by_two(double discount) {
  MdpModel m;
  m.states = {"low", "high"};
  m.actions = {0.5, 2.0};
  m.gain = Matrix{{1.0, 0.5}, {3.0, 2.0}};
  m.kernel = {Matrix{{0.9, 0.1}, {0.2, 0.8}}, Matrix{{0.6, 0.4}, {0.1, 0.9}}};
  m.discount = discount;
  return m;
}

double sup_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("bellman_backup") {
  SUBCASE("single step from zero") {
    const auto r = bellman_backup(geometric(1.0, 0.5), {{0.0}});
    CHECK(r.value.values[0] == 1.0);
    CHECK(r.policy.action_of[0] == 0);
  }
  SUBCASE("myopic when discount is zero") {
    auto m = two_by_two(0.0);
    const auto r = bellman_backup(m, {{100.0, -7.0}});
    CHECK(r.value.values == std::vector<double>{1.0, 3.0});
    CHECK(r.policy.action_of == std::vector<std::size_t>{0, 0});
  }
  SUBCASE("hand-computed maxima") {
    // v = (0, 10), delta = 0.9
    // s0: a0 = 1 + 0.9 * 1 = 1.9, a1 = 0.5 + 0.9 * 8 = 7.7
    // s1: a0 = 3 + 0.9 * 4 = 6.6, a1 = 2 + 0.9 * 9 = 10.1
    const auto r = bellman_backup(two_by_two(0.9), {{0.0, 10.0}});
    CHECK(r.value.values[0] == doctest::Approx(7.7));
    CHECK(r.value.values[1] == doctest::Approx(10.1));
    CHECK(r.policy.action_of == std::vector<std::size_t>{1, 1});
  }
  SUBCASE("ties go to the smallest action") {
    MdpModel m = geometric(1.0, 0.5);
    m.actions = {1.0, 2.0, 3.0};
    m.gain = Matrix{{2.0, 2.0, 2.0}};
    m.kernel = {Matrix{{1.0}, {1.0}, {1.0}}};
    CHECK(bellman_backup(m, {{0.0}}).policy.action_of[0] == 0);
  }
  CHECK_THROWS_AS(bellman_backup(two_by_two(0.5), {{0.0}}), InvalidArgument);
}

TEST_CASE("value_iteration") {
  SUBCASE("geometric series") {
    const auto r = value_iteration(geometric(1.0, 0.5));
    CHECK(std::abs(r.value.values[0] - 2.0) <= 1e-8);
    CHECK(r.policy.action_of[0] == 0);
  }
  SUBCASE("discount zero converges in one iteration") {
    const auto r = value_iteration(two_by_two(0.0));
    CHECK(r.iterations == 1);
    CHECK(r.value.values == std::vector<double>{1.0, 3.0});
    CHECK(r.policy.action_of == std::vector<std::size_t>{0, 0});
  }
  SUBCASE("two states against horizon recursion and enumeration") {
    const auto m = two_by_two(0.9);
    const auto r = value_iteration(m);
    const auto horizon = truncated_horizon_values(m, 200);
    CHECK(sup_dist(r.value.values, horizon) <= 1e-6);
    const auto best = enumerate_policies(m);
    CHECK(r.policy.action_of == best.policy);
    CHECK(sup_dist(r.value.values, best.value) <= 1e-7);
  }
  SUBCASE("non-convergence carries the residual") {
    try {
      (void)value_iteration(two_by_two(0.99), 1e-12, 3);
      FAIL("expected NonConvergence");
    } catch (const NonConvergence& e) {
      CHECK(e.residual() > 0.0);
      CHECK(e.iterations() == 3);
    }
  }
  SUBCASE("invalid inputs") {
    CHECK_THROWS_AS(value_iteration(geometric(1.0, 1.0)), InvalidArgument);
    CHECK_THROWS_AS(value_iteration(geometric(1.0, 0.5), 0.0), InvalidArgument);
    auto bad = two_by_two(0.5);
    bad.kernel[0](0, 0) = 0.5;
    CHECK_THROWS_AS(value_iteration(bad), InvalidArgument);
    bad = two_by_two(0.5);
    bad.gain = Matrix{{1.0}};
    CHECK_THROWS_AS(value_iteration(bad), InvalidArgument);
  }
}

TEST_CASE("property: contraction, monotone convergence, bound, greedy consistency") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int t = 0; t < 40; ++t) {
    const std::size_t s = 1 + t % 9;
    const std::size_t a = 1 + t % 4;
    const auto m = random_model(rng, s, a, 0.9, 0.0, 2.0);

    ValueFunction x{std::vector<double>(s)}, y{std::vector<double>(s)};
    for (auto& v : x.values) v = u(rng);
    for (auto& v : y.values) v = u(rng);
    const double before = sup_dist(x.values, y.values);
    const double after =
        sup_dist(bellman_backup(m, x).value.values, bellman_backup(m, y).value.values);
    CHECK(after <= 0.9 * before + 1e-12);

    ValueFunction v{std::vector<double>(s, 0.0)};
    for (int k = 0; k < 30; ++k) {
      auto next = bellman_backup(m, v).value;
      for (std::size_t i = 0; i < s; ++i) CHECK(next.values[i] >= v.values[i]);
      v = std::move(next);
    }

    const auto r = value_iteration(m);
    for (double val : r.value.values) CHECK(std::abs(val) <= 2.0 / (1.0 - 0.9) + 1e-9);
    const auto again = bellman_backup(m, r.value);
    CHECK(sup_dist(again.value.values, r.value.values) <= 1e-8);
    CHECK(again.policy == r.policy);
  }
}

TEST_CASE("property: policy matches exhaustive enumeration") {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 40; ++t) {
    const std::size_t s = 1 + t % 5;
    const std::size_t a = 1 + t % 3;
    const auto m = random_model(rng, s, a, 0.9);
    const auto r = value_iteration(m, 1e-10);
    const auto best = enumerate_policies(m);
    CHECK(r.policy.action_of == best.policy);
  }
}

TEST_CASE("estimate_kernel") {
  SUBCASE("frequency counts") {
    const std::vector<Episode> eps{{{0, 0, 0}, {0, 0, 1}, {0, 0, 1}}};
    const auto est = estimate_kernel(eps, 2, 1, 0.0);
    CHECK(est.kernel[0](0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(est.kernel[0](0, 1) == doctest::Approx(2.0 / 3.0));
    CHECK(est.counts_by_pair(0, 0) == 3.0);
    // State 1 was never visited.
    CHECK(est.unvisited_pairs == 1);
    CHECK(est.warnings.size() == 1);
    CHECK(est.kernel[1](0, 0) == 0.5);

    const auto smooth = estimate_kernel(eps, 2, 1, 1.0);
    CHECK(smooth.kernel[0](0, 0) == doctest::Approx(0.4));
    CHECK(smooth.kernel[0](0, 1) == doctest::Approx(0.6));
    CHECK(smooth.warnings.empty());
  }
  SUBCASE("no episodes, smoothing 1: uniform") {
    const auto est = estimate_kernel(std::span<const Episode>{}, 3, 2, 1.0);
    for (const auto& q : est.kernel) {
      for (double p : q.values()) CHECK(p == doctest::Approx(1.0 / 3.0));
    }
  }
  SUBCASE("deterministic kernel recovered exactly") {
    std::vector<Episode> eps(1);
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t a = 0; a < 2; ++a) eps[0].push_back({s, a, (s + a) % 3});
    }
    const auto est = estimate_kernel(eps, 3, 2, 0.0);
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t t = 0; t < 3; ++t) {
          CHECK(est.kernel[s](a, t) == (t == (s + a) % 3 ? 1.0 : 0.0));
        }
      }
    }
  }
  SUBCASE("errors") {
    const std::vector<Episode> eps{{{0, 5, 0}}};
    CHECK_THROWS_AS(estimate_kernel(eps, 2, 1, 0.0), InvalidArgument);
    CHECK_THROWS_AS(estimate_kernel(std::span<const Episode>{}, 2, 1, -1.0), InvalidArgument);
  }
}

TEST_CASE("learn_and_plan") {
  SUBCASE("no episodes: uniform plan with warnings") {
    auto skel = two_by_two(0.5);
    skel.kernel.clear();
    const auto r = learn_and_plan(std::span<const Episode>{}, skel);
    CHECK(r.estimate.unvisited_pairs == 4);
    CHECK(r.estimate.warnings.size() == 4);
    CHECK(r.plan.policy.action_of.size() == 2);
  }
  SUBCASE("sampled episodes recover the true policy") {
    std::mt19937_64 rng(5);
    const auto truth = random_model(rng, 3, 2, 0.8);
    const std::vector<Episode> eps{posalloc::testing::sample_transitions(rng, truth, 60000)};
    auto skel = truth;
    skel.kernel.clear();
    const auto r = learn_and_plan(eps, skel);
    CHECK(r.plan.policy == value_iteration(truth).policy);
  }
}

TEST_CASE("binning") {
  const auto axis = BinAxis::uniform(0.0, 1.0, 2);
  CHECK(axis.bin(0.75) == 1);
  CHECK(axis.bin(0.5) == 1);
  CHECK(axis.bin(0.0) == 0);
  CHECK(axis.bin(1.0) == 1);
  bool clamped = false;
  CHECK(axis.bin(3.0, &clamped) == 1);
  CHECK(clamped);
  clamped = false;
  CHECK(axis.bin(-1.0, &clamped) == 0);
  CHECK(clamped);
  clamped = false;
  (void)axis.bin(0.2, &clamped);
  CHECK_FALSE(clamped);

  const std::vector<double> samples{1, 2, 3, 4, 5};
  const auto q = BinAxis::quantiles(samples, 4);
  CHECK(q.edges == std::vector<double>{1, 2, 3, 4, 5});
  CHECK(q.bin(2.0) == 1);

  CHECK_THROWS_AS(BinAxis::uniform(1.0, 1.0, 2), InvalidArgument);
  CHECK_THROWS_AS(BinAxis::uniform(0.0, 1.0, 0), InvalidArgument);

  const StateGrid grid{{BinAxis::uniform(0.0, 2.0, 2), BinAxis::uniform(0.0, 1.0, 4)}};
  CHECK(grid.state_count() == 8);
  const std::vector<double> bids{1.5, 0.5, 2.5};  // mean 1.5 -> bin 1
  const Matrix mu{{0.3, 0.3, 0.3}, {0.3, 0.3, 0.3}, {0.3, 0.3, 0.3}};  // 0.3 -> bin 1
  const auto st = discretize_state(bids, mu, grid);
  CHECK(st.index == 1 * 4 + 1);
  CHECK_FALSE(st.clamped);
  const std::vector<double> rich{9.0};
  CHECK(discretize_state(rich, Matrix{{0.9}}, grid).clamped);
  CHECK(discretize_state(rich, Matrix{{0.9}}, grid).index == 1 * 4 + 3);
}

TEST_CASE("gain_from_allocation") {
  QueryInstance q;
  q.bids = {1.0, 0.0};
  q.pctr = Matrix{{0.5, 0.25}, {0.5, 0.25}};
  q.erelevance = Matrix{{0.0, 0.0}, {0.8, 0.4}};
  q.seeker_weight = 1.0;
  const std::vector<QueryInstance> reps{q};
  const std::vector<double> actions{0.0, 10.0};
  const auto g = gain_from_allocation(reps, actions, Mechanism::kVcg);
  // w = 0: job 0 takes slot 0, revenue 0.5, relevance 0.4
  CHECK(g(0, 0) == doctest::Approx(0.9));
  // w = 10: job 1 takes slot 0, revenue 0.25, relevance 0.8
  CHECK(g(0, 1) == doctest::Approx(1.05));
  CHECK_THROWS_AS(gain_from_allocation(reps, std::span<const double>{}, Mechanism::kGfp),
                  InvalidArgument);
}
