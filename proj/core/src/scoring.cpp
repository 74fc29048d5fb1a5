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

#include "posalloc/scoring.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "posalloc/errors.hpp"

namespace posalloc {
namespace {

void check_matrix(const Matrix& m, std::size_t n, const char* name) {
  if (m.is_ragged()) {
    throw InvalidInstance(std::string(name) + " has rows of different lengths");
  }
  if (m.rows() != n || m.cols() != n) {
    throw InvalidInstance(std::string(name) + " must be square " + std::to_string(n) + "x" +
                          std::to_string(n) + ", got " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()));
  }
}

bool nonneg_finite(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void QueryInstance::validate() const {
  const std::size_t n = bids.size();
  if (n == 0) throw InvalidInstance("instance has no jobs");
  check_matrix(pctr, n, "pctr");
  check_matrix(erelevance, n, "erelevance");
  for (std::size_t j = 0; j < n; ++j) {
    if (!nonneg_finite(bids[j])) {
      throw InvalidInstance("bid " + std::to_string(j) + " must be finite and >= 0");
    }
  }
  for (double p : pctr.values()) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw InvalidInstance("pctr entries must lie in [0, 1]");
    }
  }
  for (double mu : erelevance.values()) {
    if (!nonneg_finite(mu)) {
      throw InvalidInstance("erelevance entries must be finite and >= 0");
    }
  }
  if (!nonneg_finite(seeker_weight)) {
    throw InvalidInstance("seeker_weight must be finite and >= 0");
  }
}

ScoreCombiner ScoreCombiner::additive() {
  return {"additive", [](double x, double y) { return x + y; }};
}

ScoreCombiner ScoreCombiner::power_sum(double p) {
  if (!std::isfinite(p) || p <= 0.0) {
    throw ConfigError("power_sum exponent must be finite and > 0");
  }
  if (p == 1.0) return {"power_sum:1", [](double x, double y) { return x + y; }};
  return {"power_sum:" + std::to_string(p), [p](double x, double y) {
            const double s = std::pow(x, p) + std::pow(y, p);
            return s == 0.0 ? 0.0 : std::pow(s, 1.0 / p);
          }};
}

ScoreCombiner ScoreCombiner::from_name(std::string_view name) {
  if (name == "additive") return additive();
  constexpr std::string_view prefix = "power_sum:";
  if (name.starts_with(prefix)) {
    const std::string_view arg = name.substr(prefix.size());
    double p = 0.0;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), p);
    if (ec != std::errc() || ptr != arg.data() + arg.size()) {
      throw ConfigError("bad power_sum exponent in combiner '" + std::string(name) + "'");
    }
    return power_sum(p);
  }
  throw ConfigError("unknown combiner '" + std::string(name) + "'");
}

ScoreMatrix score_position_aware(const QueryInstance& instance,
                                 const ScoreCombiner& combiner) {
  instance.validate();
  const std::size_t n = instance.size();
  const double w = instance.seeker_weight;
  ScoreMatrix scores(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      scores(j, k) = combiner(instance.bids[j] * instance.pctr(j, k),
                              w * instance.erelevance(j, k));
    }
  }
  return scores;
}

std::vector<double> row_means(const Matrix& m) {
  std::vector<double> out(m.rows(), 0.0);
  if (m.cols() == 0) return out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (double v : m.row(r)) sum += v;
    out[r] = sum / static_cast<double>(m.cols());
  }
  return out;
}

SlotAveragedView slot_average(const QueryInstance& instance, const ScoreMatrix& scores) {
  instance.validate();
  check_matrix(scores, instance.size(), "scores");
  return {row_means(instance.pctr), row_means(instance.erelevance), row_means(scores)};
}

std::vector<double> score_position_unaware(const SlotAveragedView& view,
                                           const QueryInstance& instance,
                                           const ScoreCombiner& combiner) {
  const std::size_t n = instance.size();
  if (view.pctr_bar.size() != n || view.erelevance_bar.size() != n) {
    throw InvalidInstance("slot-averaged view does not match instance size");
  }
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = combiner(instance.bids[j] * view.pctr_bar[j],
                      instance.seeker_weight * view.erelevance_bar[j]);
  }
  return out;
}

}  // namespace posalloc
