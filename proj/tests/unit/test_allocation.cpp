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

#include <random>

#include "oracles.hpp"
#include "posalloc/allocation.hpp"
#include "posalloc/errors.hpp"

using namespace posalloc;
using posalloc::testing::dyadic_scores;
using posalloc::testing::enumerate_assignments;
using posalloc::testing::uniform_scores;

using Assignment = std::vector<std::size_t>;

TEST_CASE("gfp_rank") {
  const std::vector<double> a{3.0, 1.0, 2.0};
  CHECK(gfp_rank(a).assignment() == Assignment{0, 2, 1});

  const std::vector<double> ties{4.0, 4.0, 4.0, 4.0};
  CHECK(gfp_rank(ties) == Matching::identity(4));

  const std::vector<double> b{1.0, 1.0, 5.0};
  CHECK(gfp_rank(b).assignment() == Assignment{1, 2, 0});

  CHECK_THROWS_AS(gfp_rank(std::vector<double>{}), InvalidInstance);
  CHECK_THROWS_AS(gfp_rank(std::vector<double>{1.0, std::nan("")}), InvalidInstance);
}

TEST_CASE("Matching validates its permutation") {
  CHECK_THROWS_AS(Matching(Assignment{0, 0}), InvalidArgument);
  CHECK_THROWS_AS(Matching(Assignment{0, 2}), InvalidArgument);
  const Matching m(Assignment{2, 0, 1});
  CHECK(m.job_at() == Assignment{1, 2, 0});
}

TEST_CASE("capacity-constrained example: Alice and Bob") {
  // rows Alice, Bob; columns items x, y
  const ScoreMatrix s{{0.0, 1.0}, {2.0, 3.0}};
  for (const auto& r : {match_optimal(s), match_brute_force(s), match_auction_eps(s)}) {
    CHECK(r.total_score == 3.0);
  }
  // Both optima total 3; the shared tie-break picks Alice->x, Bob->y.
  CHECK(match_optimal(s).matching.assignment() == Assignment{0, 1});
  CHECK(match_brute_force(s).matching.assignment() == Assignment{0, 1});
}

TEST_CASE("exact solvers on small fixed instances") {
  const ScoreMatrix a{{2.0, 1.0}, {0.0, 3.0}};
  const auto ra = match_optimal(a);
  CHECK(ra.matching.assignment() == Assignment{0, 1});
  CHECK(ra.total_score == 5.0);

  const ScoreMatrix diag{{1, 0, 0}, {0, 2, 0}, {0, 0, 3}};
  const auto rd = match_optimal(diag);
  CHECK(rd.matching == Matching::identity(3));
  CHECK(rd.total_score == 6.0);

  const ScoreMatrix one{{4.5}};
  CHECK(match_optimal(one).total_score == 4.5);
  CHECK(match_brute_force(one).matching == Matching::identity(1));
  const auto auc = match_auction_eps(one);
  CHECK(auc.total_score == 4.5);
  CHECK(auc.matching == Matching::identity(1));
}

TEST_CASE("lexicographic tie-break on fully tied matrices") {
  for (std::size_t n = 1; n <= 7; ++n) {
    const ScoreMatrix flat(n, n, 1.5);
    CHECK(match_optimal(flat).matching == Matching::identity(n));
  }
  // Two optimal matchings: {0->1, 1->0, 2->2} and {0->2, 1->0, 2->1}...
  const ScoreMatrix s{{0, 5, 5}, {5, 0, 0}, {0, 5, 5}};
  const auto oracle = enumerate_assignments(s);
  CHECK(match_optimal(s).matching.assignment() == oracle.assignment);
  CHECK(oracle.assignment == Assignment{1, 0, 2});
}

TEST_CASE("errors") {
  const ScoreMatrix rect{{1, 2, 3}, {4, 5, 6}};
  CHECK_THROWS_AS(match_optimal(rect), InvalidInstance);
  CHECK_THROWS_AS(match_brute_force(rect), InvalidInstance);
  CHECK_THROWS_AS(match_auction_eps(rect), InvalidInstance);
  CHECK_THROWS_AS(match_optimal(ScoreMatrix{}), InvalidInstance);

  const ScoreMatrix big(11, 11, 1.0);
  CHECK_THROWS_AS(match_brute_force(big), SizeLimit);
  CHECK_NOTHROW(match_optimal(big));

  const ScoreMatrix ok{{1, 2}, {3, 4}};
  CHECK_THROWS_AS(match_auction_eps(ok, AuctionOptions{{}, 1e6}), InvalidArgument);
  CHECK_THROWS_AS(match_auction_eps(ok, AuctionOptions{{1.0, 2.0}, 1e6}), InvalidArgument);
  CHECK_THROWS_AS(match_auction_eps(ok, AuctionOptions{{1.0, -0.1}, 1e6}), InvalidArgument);
  CHECK_THROWS_AS(match_auction_eps(ok, AuctionOptions{{1.0}, 0.0}), InvalidArgument);
}

TEST_CASE("default epsilon schedule") {
  const auto s = default_eps_schedule(4e6, 5);
  REQUIRE(!s.empty());
  CHECK(s.front() == 1e6);
  CHECK(s.back() == doctest::Approx(1.0 / 6.0));
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] < s[i - 1]);
  CHECK(default_eps_schedule(0.0, 1) == std::vector<double>{1.0, 0.5});
}

TEST_CASE("auction with a coarse final epsilon is flagged, not certified") {
  std::mt19937_64 rng(5);
  const auto s = dyadic_scores(rng, 5);
  AuctionOptions opts;
  opts.scale_factor = 1024.0;
  opts.eps_schedule = {1000.0, 100.0};
  const auto r = match_auction_eps(s, opts);
  CHECK_FALSE(r.exact_certified);
  CHECK(is_permutation(r.matching.assignment()));
  // Scaled total within n * eps of the scaled optimum.
  const double opt = match_optimal(s).total_score;
  CHECK(r.total_score * 1024.0 >= opt * 1024.0 - 5 * 100.0 - 1e-6);
}

TEST_CASE("property: oracle equivalence on random instances") {
  std::mt19937_64 rng(1234);
  for (std::size_t n = 2; n <= 6; ++n) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto s = (trial % 2 == 0) ? dyadic_scores(rng, n, 16) : uniform_scores(rng, n);
      const auto oracle = enumerate_assignments(s);
      const auto hung = match_optimal(s);
      const auto brute = match_brute_force(s);
      CHECK(hung.total_score == oracle.total);
      CHECK(brute.total_score == oracle.total);
      CHECK(hung.matching.assignment() == oracle.assignment);
      CHECK(brute.matching.assignment() == oracle.assignment);
    }
  }
}

TEST_CASE("property: auction matches Hungarian on integer-scaled scores") {
  std::mt19937_64 rng(99);
  for (std::size_t n = 1; n <= 9; ++n) {
    for (int trial = 0; trial < 60; ++trial) {
      const auto s = dyadic_scores(rng, n, trial % 3 == 0 ? 8 : 1 << 20);
      const auto auc = match_auction_eps(s);
      CHECK(auc.exact_certified);
      CHECK(auc.iterations >= static_cast<long>(n));
      CHECK(auc.total_score == match_optimal(s).total_score);
    }
  }
}

TEST_CASE("property: bijection, dominance, scaling invariance, degenerate equality") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> scale(0.1, 50.0);
  int strict = 0;
  int total = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + trial % 12;
    const auto s = uniform_scores(rng, n);
    const auto opt = match_optimal(s);
    CHECK(is_permutation(opt.matching.assignment()));

    // GFP on row means, evaluated on the same position-aware scores.
    std::vector<double> bar(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (double v : s.row(j)) bar[j] += v / static_cast<double>(n);
    }
    const Matching gfp = gfp_rank(bar);
    CHECK(is_permutation(gfp.assignment()));
    const double gfp_total = total_score(s, gfp);
    CHECK(opt.total_score >= gfp_total);
    ++total;
    if (opt.total_score > gfp_total) ++strict;

    const double c = scale(rng);
    ScoreMatrix scaled = s;
    for (std::size_t j = 0; j < n; ++j) {
      for (auto& v : scaled.row(j)) v *= c;
    }
    std::vector<double> bar_scaled(bar);
    for (auto& v : bar_scaled) v *= c;
    CHECK(gfp_rank(bar_scaled) == gfp);
    const auto opt_scaled = match_optimal(scaled);
    CHECK(opt_scaled.matching == opt.matching);
    CHECK(opt_scaled.total_score == doctest::Approx(c * opt.total_score).epsilon(1e-12));

    // Constant rows: every matching has the same total.
    ScoreMatrix flat(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      for (auto& v : flat.row(j)) v = s(j, 0);
    }
    std::vector<double> flat_bar(n);
    for (std::size_t j = 0; j < n; ++j) flat_bar[j] = s(j, 0);
    CHECK(match_optimal(flat).total_score == total_score(flat, gfp_rank(flat_bar)));
  }
  CHECK(strict > 0);
  CHECK(strict < total);
}
