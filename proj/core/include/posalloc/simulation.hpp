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

// Monte-Carlo comparison of GFP ranking and position-aware matching.
//
// For every seeker and auction depth n the harness draws, in this order:
// bids, position-aware pCTR, the Seeker-Weight, position-aware eRelevance.
// It then scores the instance, ranks it with GFP on slot-averaged scores,
// matches it optimally on position-aware scores, and records revenue and
// relevance of both slates. Seekers are independent; each (seed, seeker, n)
// triple owns its own random stream so any thread count gives the same
// report bit for bit.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "posalloc/metrics.hpp"
#include "posalloc/scoring.hpp"

namespace posalloc {

struct DistributionSpec {
  enum class Family { kConstant, kUniform, kLognormal };

  Family family = Family::kConstant;
  /// constant: value; uniform: low; lognormal: mu (log-scale location)
  double a = 0.0;
  /// uniform: high; lognormal: sigma (log-scale); unused for constant
  double b = 0.0;

  static DistributionSpec constant(double value) { return {Family::kConstant, value, 0.0}; }
  static DistributionSpec uniform(double low, double high) {
    return {Family::kUniform, low, high};
  }
  static DistributionSpec lognormal(double mu, double sigma) {
    return {Family::kLognormal, mu, sigma};
  }

  /// Throws ConfigError when parameters fall outside the family's domain.
  void validate(const char* what) const;
  double sample(std::mt19937_64& rng) const;

  bool operator==(const DistributionSpec&) const = default;
};

std::string to_string(DistributionSpec::Family family);

/// Slot discount d_k applied to position-aware draws.
struct PositionDecay {
  enum class Kind { kNone, kLog2, kGeometric };
  Kind kind = Kind::kLog2;
  double rate = 1.0;  ///< geometric only: d_k = rate^k, 0 < rate <= 1

  double at(std::size_t slot) const;
  bool operator==(const PositionDecay&) const = default;
};

/// x(j,k) = quality_j * decay(k) * noise(j,k), optionally clamped to [0,1].
/// Draw order: n qualities, then the n x n noise terms row by row.
struct PositionalSpec {
  DistributionSpec quality = DistributionSpec::uniform(0.2, 1.0);
  PositionDecay decay;
  DistributionSpec noise = DistributionSpec::uniform(0.8, 1.2);
  bool clamp_unit = true;

  Matrix sample(std::size_t n, std::mt19937_64& rng) const;
  bool operator==(const PositionalSpec&) const = default;
};

struct SimulationConfig {
  std::size_t seeker_count = 1000;
  std::vector<std::size_t> depth_grid = {2, 4, 8, 16, 32};
  std::uint64_t seed = 20240601;
  DistributionSpec bid = DistributionSpec::lognormal(0.0, 0.5);
  PositionalSpec pctr;
  PositionalSpec erelevance;
  DistributionSpec weight = DistributionSpec::uniform(0.5, 2.0);
  std::string combiner = "additive";
  PaymentEvent payment = PaymentEvent::kClick;
  /// Worker threads; 0 = hardware concurrency. Does not affect results.
  unsigned threads = 0;
  bool keep_rows = false;

  /// Throws ConfigError on an invalid configuration.
  void validate() const;
};

/// Seed of the private random stream of one (seed, seeker, depth) triple.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t seeker, std::uint64_t depth);

/// Steps (i)-(iv): draw one seeker's instance from the configured families.
QueryInstance sample_instance(const SimulationConfig& config, std::size_t n,
                              std::mt19937_64& rng);

struct SeekerResult {
  std::size_t seeker = 0;
  std::size_t n = 0;
  OutcomePair outcome;
  double gfp_total_score = 0.0;  ///< position-aware score of the GFP slate
  double vcg_total_score = 0.0;
};

/// All eight steps for one seeker on its own stream. Throws Error if the
/// optimal matching ever scores below the GFP slate.
SeekerResult simulate_seeker(const SimulationConfig& config, std::size_t n,
                             std::size_t seeker);

/// Same pipeline on a caller-supplied instance.
SeekerResult evaluate_instance(const QueryInstance& instance, const ScoreCombiner& combiner,
                               PaymentEvent payment = PaymentEvent::kClick);

struct DepthSummary {
  std::size_t n = 0;
  PopulationSummary summary;
  double se_rev_gfp = 0.0;
  double se_rev_vcg = 0.0;
  double se_rel_gfp = 0.0;
  double se_rel_vcg = 0.0;
  /// Instances where the optimal matching strictly beats the GFP slate on
  /// position-aware score.
  std::size_t strict_dominance = 0;
  std::vector<SeekerResult> rows;  ///< only when config.keep_rows
};

struct SimulationReport {
  SimulationConfig config;
  std::vector<DepthSummary> depths;
};

SimulationReport run_sweep(const SimulationConfig& config);

/// Standard error of the mean, sample variance with |I| - 1 denominator.
/// Zero for fewer than two values.
double standard_error(std::span<const double> values);

}  // namespace posalloc
