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

// Tabular discounted MDP for choosing Seeker-Weights over time.
//
// States are discretized (bids, eRelevance) snapshots, actions are points on
// a Seeker-Weight grid. The optimal stationary policy solves
//
//   V(x) = max_a { Gain(x, a) + discount * sum_x' Q(x, a)(x') V(x') }
//
// by value iteration from V = 0. The kernel Q can be estimated from observed
// transitions and then planned against (model-based batch learning).

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "posalloc/matrix.hpp"
#include "posalloc/metrics.hpp"
#include "posalloc/scoring.hpp"

namespace posalloc {

struct MdpModel {
  std::vector<std::string> states;
  std::vector<double> actions;  ///< Seeker-Weight per action index
  Matrix gain;                  ///< states x actions
  /// kernel[s](a, s') = P(next = s' | state s, action a)
  std::vector<Matrix> kernel;
  double discount = 0.9;

  std::size_t state_count() const noexcept { return states.size(); }
  std::size_t action_count() const noexcept { return actions.size(); }

  /// Throws InvalidArgument unless: at least one state and action, the
  /// tables are dimensioned consistently, gains are finite, every kernel
  /// row is nonnegative and sums to 1 within 1e-9, 0 <= discount < 1.
  void validate() const;
  /// Same checks minus the kernel (for skeletons awaiting estimation).
  void validate_skeleton() const;
};

struct ValueFunction {
  std::vector<double> values;
};

struct Policy {
  std::vector<std::size_t> action_of;
  bool operator==(const Policy&) const = default;
};

struct BackupResult {
  ValueFunction value;
  Policy policy;
};

/// One synchronous backup. Ties go to the smallest action index.
BackupResult bellman_backup(const MdpModel& model, const ValueFunction& v);

struct ValueIterationResult {
  ValueFunction value;
  Policy policy;  ///< greedy with respect to `value`
  int iterations = 0;
  double residual = 0.0;  ///< sup-norm change of the last backup
};

inline constexpr double kDefaultValueTolerance = 1e-8;

/// Backs up from V = 0 until the a-posteriori bound
/// discount / (1 - discount) * |V_m - V_{m-1}|_inf <= tolerance, which
/// guarantees |V_m - V*|_inf <= tolerance. Throws NonConvergence after
/// max_iters backups, InvalidArgument for tolerance <= 0.
ValueIterationResult value_iteration(const MdpModel& model,
                                     double tolerance = kDefaultValueTolerance,
                                     int max_iters = 1'000'000);

struct Transition {
  std::size_t state = 0;
  std::size_t action = 0;
  std::size_t next_state = 0;
};

using Episode = std::vector<Transition>;

struct KernelEstimate {
  std::vector<Matrix> kernel;  ///< same layout as MdpModel::kernel
  Matrix counts_by_pair;       ///< states x actions visit counts
  std::size_t unvisited_pairs = 0;
  std::vector<std::string> warnings;
};

/// Q(x,a)(x') = (count(x,a,x') + smoothing) / (count(x,a) + smoothing * S).
/// Rows with no data and zero smoothing fall back to uniform and are listed
/// in `warnings`. Throws InvalidArgument on out-of-range indices or
/// negative smoothing.
KernelEstimate estimate_kernel(std::span<const Episode> episodes, std::size_t state_count,
                               std::size_t action_count, double smoothing = 0.0);

struct LearnAndPlanResult {
  ValueIterationResult plan;
  KernelEstimate estimate;
};

/// estimate_kernel on the episodes, then value_iteration on `skeleton` with
/// its kernel replaced by the estimate.
LearnAndPlanResult learn_and_plan(std::span<const Episode> episodes, const MdpModel& skeleton,
                                  double smoothing = 0.0,
                                  double tolerance = kDefaultValueTolerance,
                                  int max_iters = 1'000'000);

/// Left-closed bins [edge_i, edge_{i+1}); the last bin also holds its upper
/// edge. Values outside the range clamp to the edge bins.
struct BinAxis {
  std::vector<double> edges;

  static BinAxis uniform(double low, double high, std::size_t bins);
  /// Edges at the empirical quantiles i / bins of `samples`.
  static BinAxis quantiles(std::span<const double> samples, std::size_t bins);

  std::size_t bin_count() const noexcept { return edges.empty() ? 0 : edges.size() - 1; }
  std::size_t bin(double x, bool* clamped = nullptr) const;
};

/// Row-major product of axes. The default features are mean bid and mean
/// eRelevance, in that order.
struct StateGrid {
  std::vector<BinAxis> axes;

  std::size_t state_count() const;
  std::size_t index(std::span<const double> features, bool* clamped = nullptr) const;
};

struct DiscretizedState {
  std::size_t index = 0;
  bool clamped = false;  ///< some feature fell outside its axis range
};

DiscretizedState discretize_state(std::span<const double> bids, const Matrix& erelevance,
                                  const StateGrid& grid);

/// Default gain table: for each state's representative instance and each
/// weight on the action grid, run the chosen allocation rule and score
/// revenue + relevance_value * relevance.
Matrix gain_from_allocation(std::span<const QueryInstance> representatives,
                            std::span<const double> actions, Mechanism mechanism,
                            double relevance_value = 1.0,
                            const ScoreCombiner& combiner = ScoreCombiner::additive());

}  // namespace posalloc
