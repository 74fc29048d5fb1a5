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

// Auction-score construction. A score combines a poster component (bid times
// click probability, money per impression) with a seeker component
// (Seeker-Weight times eRelevance, money-equivalent) through a combiner S.

#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "posalloc/matrix.hpp"

namespace posalloc {

/// Rows are jobs, columns are slots. Entries are money-equivalent.
using ScoreMatrix = Matrix;

/// One seeker's query: n jobs competing for n slots.
struct QueryInstance {
  std::string seeker_id;
  std::vector<double> bids;  ///< money per click, one per job
  Matrix pctr;               ///< pctr(j, k): P(click | job j in slot k)
  Matrix erelevance;         ///< erelevance(j, k): relevance of job j at slot k
  double seeker_weight = 0;  ///< money per unit of relevance

  std::size_t size() const noexcept { return bids.size(); }

  /// Throws InvalidInstance when dimensions disagree, n == 0, any value is
  /// non-finite or negative, or a pCTR lies outside [0,1].
  void validate() const;
};

/// Binary rule S(poster, seeker) -> score. Every built-in combiner is
/// nondecreasing in both arguments with S(0,0) = 0.
class ScoreCombiner {
 public:
  using Fn = std::function<double(double, double)>;

  ScoreCombiner(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  /// S(x, y) = x + y.
  static ScoreCombiner additive();
  /// S(x, y) = (x^p + y^p)^(1/p), p > 0. p = 1 is additive; large p
  /// approaches max(x, y).
  static ScoreCombiner power_sum(double p);
  /// Parses "additive" or "power_sum:<p>". Throws ConfigError otherwise.
  static ScoreCombiner from_name(std::string_view name);

  double operator()(double poster, double seeker) const { return fn_(poster, seeker); }
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
  Fn fn_;
};

/// Slot averages of the position-aware quantities (one entry per job).
struct SlotAveragedView {
  std::vector<double> pctr_bar;
  std::vector<double> erelevance_bar;
  std::vector<double> score_bar;
};

/// s(j,k) = S(b_j * pctr(j,k), w * erelevance(j,k)).
ScoreMatrix score_position_aware(const QueryInstance& instance,
                                 const ScoreCombiner& combiner = ScoreCombiner::additive());

/// Row means of pctr, erelevance and scores.
SlotAveragedView slot_average(const QueryInstance& instance, const ScoreMatrix& scores);

/// s_bar(j) = S(b_j * pctr_bar(j), w * erelevance_bar(j)).
std::vector<double> score_position_unaware(
    const SlotAveragedView& view, const QueryInstance& instance,
    const ScoreCombiner& combiner = ScoreCombiner::additive());

/// Arithmetic mean of each row.
std::vector<double> row_means(const Matrix& m);

}  // namespace posalloc
