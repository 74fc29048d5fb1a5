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

// Allocation rules mapping n jobs onto n slots.
//
//  * gfp_rank          sort jobs by slot-averaged score (position-unaware).
//  * match_optimal     Kuhn-Munkres on the position-aware score matrix.
//  * match_auction_eps forward auction with epsilon scaling.
//  * match_brute_force exhaustive enumeration, n <= 10, used as an oracle.
//
// match_optimal and match_brute_force share one tie-break: among all
// maximizing matchings, the lexicographically smallest assignment array.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "posalloc/scoring.hpp"

namespace posalloc {

/// Bijection jobs -> slots. slot_of(j) == k means job j is shown at slot k.
class Matching {
 public:
  Matching() = default;
  /// Throws InvalidArgument unless `assignment` is a permutation of 0..n-1.
  explicit Matching(std::vector<std::size_t> assignment);

  static Matching identity(std::size_t n);

  std::size_t size() const noexcept { return assignment_.size(); }
  std::size_t slot_of(std::size_t job) const { return assignment_.at(job); }
  /// Inverse map: job_at()[k] is the job occupying slot k.
  std::vector<std::size_t> job_at() const;
  const std::vector<std::size_t>& assignment() const noexcept { return assignment_; }

  bool operator==(const Matching&) const = default;

 private:
  std::vector<std::size_t> assignment_;
};

/// True when `assignment` is a permutation of 0..n-1.
bool is_permutation(std::span<const std::size_t> assignment);

enum class SolverKind { kGfp, kHungarian, kAuctionEps, kBruteForce };

std::string_view to_string(SolverKind kind);

struct SolverReport {
  Matching matching;
  double total_score = 0.0;  ///< sum_j scores(j, slot_of(j)), summed in job order
  SolverKind solver = SolverKind::kHungarian;
  long iterations = 0;       ///< bids placed (auction solver only)
  /// Auction solver: true when the final epsilon was below 1/n on the
  /// integer-scaled scores, which certifies optimality for those scores.
  bool exact_certified = true;
};

/// sum_j scores(j, matching.slot_of(j)), accumulated in increasing job order.
double total_score(const ScoreMatrix& scores, const Matching& matching);

/// Rank by descending score; the job with the k-th largest score takes slot
/// k. Ties go to the smaller job index. Throws InvalidInstance on empty or
/// non-finite input.
Matching gfp_rank(std::span<const double> score_bar);

/// Exact maximum-weight perfect matching, O(n^3). Returns the
/// lexicographically smallest optimal assignment.
SolverReport match_optimal(const ScoreMatrix& scores);

struct AuctionOptions {
  /// Strictly decreasing, positive, in units of the integer-scaled scores.
  std::vector<double> eps_schedule;
  /// Scores are rounded to integers after multiplying by this factor.
  double scale_factor = 1e6;
};

/// Forward auction (bidding / price raising) with epsilon scaling. The
/// matching is optimal for round(scale_factor * scores) when the last
/// epsilon is below 1/n; otherwise its scaled total is within n * eps of the
/// scaled optimum. total_score is reported on the original scores.
/// Throws InvalidArgument on an empty or malformed schedule.
SolverReport match_auction_eps(const ScoreMatrix& scores, const AuctionOptions& options);
/// Same, with the default scale factor and default_eps_schedule().
SolverReport match_auction_eps(const ScoreMatrix& scores);

/// Schedule for an integer benefit matrix whose largest absolute entry is
/// `max_abs`: start at max(max_abs / 4, 1), divide by 5 while above
/// 1/(n+1), finish at exactly 1/(n+1).
std::vector<double> default_eps_schedule(double max_abs, std::size_t n);

/// Enumerates all n! matchings in lexicographic order and keeps the first
/// strict maximum. Throws SizeLimit for n > 10.
SolverReport match_brute_force(const ScoreMatrix& scores);

inline constexpr std::size_t kBruteForceMaxSize = 10;

}  // namespace posalloc
