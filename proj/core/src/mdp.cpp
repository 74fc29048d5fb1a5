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

#include "posalloc/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "posalloc/allocation.hpp"
#include "posalloc/errors.hpp"

namespace posalloc {

void MdpModel::validate_skeleton() const {
  if (states.empty()) throw InvalidArgument("model has no states");
  if (actions.empty()) throw InvalidArgument("model has no actions");
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw InvalidArgument("discount must lie in [0, 1)");
  }
  if (gain.rows() != state_count() || gain.cols() != action_count()) {
    throw InvalidArgument("gain table must be states x actions");
  }
  for (double g : gain.values()) {
    if (!std::isfinite(g)) throw InvalidArgument("gain table has non-finite entries");
  }
}

void MdpModel::validate() const {
  validate_skeleton();
  if (kernel.size() != state_count()) {
    throw InvalidArgument("kernel must have one table per state");
  }
  for (std::size_t s = 0; s < state_count(); ++s) {
    const Matrix& q = kernel[s];
    if (q.rows() != action_count() || q.cols() != state_count()) {
      throw InvalidArgument("kernel table of state " + std::to_string(s) +
                            " must be actions x states");
    }
    for (std::size_t a = 0; a < action_count(); ++a) {
      double sum = 0.0;
      for (double p : q.row(a)) {
        if (!std::isfinite(p) || p < 0.0) {
          throw InvalidArgument("kernel probabilities must be finite and >= 0");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw InvalidArgument("kernel row (" + std::to_string(s) + ", " + std::to_string(a) +
                              ") sums to " + std::to_string(sum));
      }
    }
  }
}

BackupResult bellman_backup(const MdpModel& model, const ValueFunction& v) {
  const std::size_t n_states = model.state_count();
  if (v.values.size() != n_states) {
    throw InvalidArgument("value function size does not match the model");
  }
  BackupResult out;
  out.value.values.resize(n_states);
  out.policy.action_of.resize(n_states);
  for (std::size_t s = 0; s < n_states; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_action = 0;
    for (std::size_t a = 0; a < model.action_count(); ++a) {
      double continuation = 0.0;
      const auto row = model.kernel[s].row(a);
      for (std::size_t t = 0; t < n_states; ++t) continuation += row[t] * v.values[t];
      const double q = model.gain(s, a) + model.discount * continuation;
      if (q > best) {
        best = q;
        best_action = a;
      }
    }
    out.value.values[s] = best;
    out.policy.action_of[s] = best_action;
  }
  return out;
}

ValueIterationResult value_iteration(const MdpModel& model, double tolerance, int max_iters) {
  model.validate();
  if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be > 0");
  if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");

  const double delta = model.discount;
  const double bound_factor = delta / (1.0 - delta);
  ValueFunction v{std::vector<double>(model.state_count(), 0.0)};
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iters; ++it) {
    BackupResult next = bellman_backup(model, v);
    residual = 0.0;
    for (std::size_t s = 0; s < v.values.size(); ++s) {
      residual = std::max(residual, std::abs(next.value.values[s] - v.values[s]));
    }
    v = std::move(next.value);
    if (bound_factor * residual <= tolerance) {
      ValueIterationResult out;
      out.policy = bellman_backup(model, v).policy;
      out.value = std::move(v);
      out.iterations = it;
      out.residual = residual;
      return out;
    }
  }
  throw NonConvergence("value iteration did not converge within " +
                           std::to_string(max_iters) + " iterations (residual " +
                           std::to_string(residual) + ")",
                       residual, max_iters);
}

KernelEstimate estimate_kernel(std::span<const Episode> episodes, std::size_t state_count,
                               std::size_t action_count, double smoothing) {
  if (state_count == 0 || action_count == 0) {
    throw InvalidArgument("state and action counts must be >= 1");
  }
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
    throw InvalidArgument("smoothing must be finite and >= 0");
  }
  std::vector<Matrix> counts(state_count, Matrix(action_count, state_count, 0.0));
  for (const auto& episode : episodes) {
    for (const auto& t : episode) {
      if (t.state >= state_count || t.next_state >= state_count || t.action >= action_count) {
        throw InvalidArgument("transition index out of range");
      }
      counts[t.state](t.action, t.next_state) += 1.0;
    }
  }

  KernelEstimate est;
  est.kernel.assign(state_count, Matrix(action_count, state_count, 0.0));
  est.counts_by_pair = Matrix(state_count, action_count, 0.0);
  const double uniform = 1.0 / static_cast<double>(state_count);
  for (std::size_t s = 0; s < state_count; ++s) {
    for (std::size_t a = 0; a < action_count; ++a) {
      double total = 0.0;
      for (double c : counts[s].row(a)) total += c;
      est.counts_by_pair(s, a) = total;
      if (total == 0.0) ++est.unvisited_pairs;
      const double denom = total + smoothing * static_cast<double>(state_count);
      auto row = est.kernel[s].row(a);
      if (denom == 0.0) {
        std::fill(row.begin(), row.end(), uniform);
        est.warnings.push_back("unvisited (state " + std::to_string(s) + ", action " +
                               std::to_string(a) + "): uniform transition row");
        continue;
      }
      for (std::size_t t = 0; t < state_count; ++t) {
        row[t] = (counts[s](a, t) + smoothing) / denom;
      }
    }
  }
  return est;
}

LearnAndPlanResult learn_and_plan(std::span<const Episode> episodes, const MdpModel& skeleton,
                                  double smoothing, double tolerance, int max_iters) {
  skeleton.validate_skeleton();
  LearnAndPlanResult out;
  out.estimate = estimate_kernel(episodes, skeleton.state_count(), skeleton.action_count(),
                                 smoothing);
  MdpModel model = skeleton;
  model.kernel = out.estimate.kernel;
  out.plan = value_iteration(model, tolerance, max_iters);
  return out;
}

BinAxis BinAxis::uniform(double low, double high, std::size_t bins) {
  if (bins == 0) throw InvalidArgument("an axis needs at least one bin");
  if (!(low < high) || !std::isfinite(low) || !std::isfinite(high)) {
    throw InvalidArgument("uniform axis needs finite low < high");
  }
  BinAxis axis;
  axis.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    axis.edges[i] = low + (high - low) * static_cast<double>(i) / static_cast<double>(bins);
  }
  axis.edges.back() = high;
  return axis;
}

BinAxis BinAxis::quantiles(std::span<const double> samples, std::size_t bins) {
  if (bins == 0) throw InvalidArgument("an axis needs at least one bin");
  if (samples.empty()) throw InvalidArgument("quantile axis needs samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  BinAxis axis;
  axis.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    const double pos = static_cast<double>(i) / static_cast<double>(bins) *
                       static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    axis.edges[i] = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  }
  return axis;
}

std::size_t BinAxis::bin(double x, bool* clamped) const {
  if (edges.size() < 2) throw InvalidArgument("axis has no bins");
  const bool outside = !(x >= edges.front() && x <= edges.back());
  if (clamped) *clamped = *clamped || outside;
  if (std::isnan(x) || x < edges.front()) return 0;
  if (x >= edges.back()) return bin_count() - 1;
  // First edge strictly greater than x closes x's bin on the right.
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  const auto idx = static_cast<std::size_t>(it - edges.begin()) - 1;
  return std::min(idx, bin_count() - 1);
}

std::size_t StateGrid::state_count() const {
  std::size_t total = axes.empty() ? 0 : 1;
  for (const auto& a : axes) total *= a.bin_count();
  return total;
}

std::size_t StateGrid::index(std::span<const double> features, bool* clamped) const {
  if (features.size() != axes.size()) {
    throw InvalidArgument("feature count does not match the number of grid axes");
  }
  std::size_t idx = 0;
  for (std::size_t d = 0; d < axes.size(); ++d) {
    idx = idx * axes[d].bin_count() + axes[d].bin(features[d], clamped);
  }
  return idx;
}

DiscretizedState discretize_state(std::span<const double> bids, const Matrix& erelevance,
                                  const StateGrid& grid) {
  if (bids.empty() || erelevance.empty()) {
    throw InvalidArgument("state snapshot needs bids and eRelevances");
  }
  double bid_sum = 0.0;
  for (double b : bids) bid_sum += b;
  double rel_sum = 0.0;
  for (double m : erelevance.values()) rel_sum += m;
  const double features[2] = {bid_sum / static_cast<double>(bids.size()),
                              rel_sum / static_cast<double>(erelevance.values().size())};
  DiscretizedState out;
  out.index = grid.index(features, &out.clamped);
  return out;
}

Matrix gain_from_allocation(std::span<const QueryInstance> representatives,
                            std::span<const double> actions, Mechanism mechanism,
                            double relevance_value, const ScoreCombiner& combiner) {
  if (actions.empty()) throw InvalidArgument("action grid is empty");
  Matrix gain(representatives.size(), actions.size());
  for (std::size_t s = 0; s < representatives.size(); ++s) {
    for (std::size_t a = 0; a < actions.size(); ++a) {
      QueryInstance inst = representatives[s];
      inst.seeker_weight = actions[a];
      const ScoreMatrix scores = score_position_aware(inst, combiner);
      Matching m;
      if (mechanism == Mechanism::kVcg) {
        m = match_optimal(scores).matching;
      } else {
        const auto view = slot_average(inst, scores);
        m = gfp_rank(score_position_unaware(view, inst, combiner));
      }
      gain(s, a) = revenue(inst, m) + relevance_value * relevance(inst, m);
    }
  }
  return gain;
}

}  // namespace posalloc
