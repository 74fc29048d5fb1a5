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

#include "posalloc/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "posalloc/allocation.hpp"
#include "posalloc/errors.hpp"

namespace posalloc {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum;
}

}  // namespace

std::string to_string(DistributionSpec::Family family) {
  switch (family) {
    case DistributionSpec::Family::kConstant:
      return "constant";
    case DistributionSpec::Family::kUniform:
      return "uniform";
    case DistributionSpec::Family::kLognormal:
      return "lognormal";
  }
  return "unknown";
}

void DistributionSpec::validate(const char* what) const {
  auto fail = [&](const std::string& msg) {
    throw ConfigError(std::string(what) + ": " + msg);
  };
  if (!std::isfinite(a) || !std::isfinite(b)) fail("parameters must be finite");
  switch (family) {
    case Family::kConstant:
      break;
    case Family::kUniform:
      if (a > b) fail("uniform requires low <= high");
      break;
    case Family::kLognormal:
      if (b < 0.0) fail("lognormal requires sigma >= 0");
      break;
  }
}

double DistributionSpec::sample(std::mt19937_64& rng) const {
  switch (family) {
    case Family::kConstant:
      return a;
    case Family::kUniform:
      if (a == b) return a;
      return std::uniform_real_distribution<double>(a, b)(rng);
    case Family::kLognormal:
      if (b == 0.0) return std::exp(a);
      return std::lognormal_distribution<double>(a, b)(rng);
  }
  return a;
}

double PositionDecay::at(std::size_t slot) const {
  switch (kind) {
    case Kind::kNone:
      return 1.0;
    case Kind::kLog2:
      return 1.0 / std::log2(static_cast<double>(slot) + 2.0);
    case Kind::kGeometric:
      return std::pow(rate, static_cast<double>(slot));
  }
  return 1.0;
}

Matrix PositionalSpec::sample(std::size_t n, std::mt19937_64& rng) const {
  std::vector<double> q(n);
  for (auto& v : q) v = quality.sample(rng);
  Matrix out(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      double x = q[j] * decay.at(k) * noise.sample(rng);
      if (clamp_unit) x = std::clamp(x, 0.0, 1.0);
      out(j, k) = x;
    }
  }
  return out;
}

void SimulationConfig::validate() const {
  if (seeker_count < 1) throw ConfigError("seeker_count must be >= 1");
  if (depth_grid.empty()) throw ConfigError("depth_grid must not be empty");
  for (std::size_t n : depth_grid) {
    if (n < 1) throw ConfigError("every depth in depth_grid must be >= 1");
  }
  bid.validate("bid distribution");
  weight.validate("weight distribution");
  for (const auto* spec : {&pctr, &erelevance}) {
    const char* name = spec == &pctr ? "pctr" : "erelevance";
    spec->quality.validate(name);
    spec->noise.validate(name);
    if (spec->decay.kind == PositionDecay::Kind::kGeometric &&
        !(spec->decay.rate > 0.0 && spec->decay.rate <= 1.0)) {
      throw ConfigError(std::string(name) + ": geometric decay rate must lie in (0, 1]");
    }
  }
  // Negative draws would make an instance invalid; reject families that can
  // produce them up front.
  auto nonneg = [](const DistributionSpec& d) {
    return d.family == DistributionSpec::Family::kLognormal || d.a >= 0.0;
  };
  if (!nonneg(bid)) throw ConfigError("bid distribution can produce negative bids");
  if (!nonneg(weight)) throw ConfigError("weight distribution can produce negative weights");
  for (const auto* spec : {&pctr, &erelevance}) {
    if (!nonneg(spec->quality) || !nonneg(spec->noise)) {
      throw ConfigError("positional distributions must be nonnegative");
    }
  }
  if (!pctr.clamp_unit) {
    // Decay never exceeds 1, so quality_max * noise_max <= 1 keeps pCTR a
    // probability without clamping.
    auto upper = [](const DistributionSpec& d) {
      switch (d.family) {
        case DistributionSpec::Family::kConstant:
          return d.a;
        case DistributionSpec::Family::kUniform:
          return d.b;
        case DistributionSpec::Family::kLognormal:
          return d.b == 0.0 ? std::exp(d.a) : HUGE_VAL;
      }
      return HUGE_VAL;
    };
    if (upper(pctr.quality) * upper(pctr.noise) > 1.0) {
      throw ConfigError("unclamped pctr draws must be bounded by 1");
    }
  }
  (void)ScoreCombiner::from_name(combiner);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t seeker, std::uint64_t depth) {
  return splitmix64(splitmix64(splitmix64(seed) ^ seeker) ^ depth);
}

QueryInstance sample_instance(const SimulationConfig& config, std::size_t n,
                              std::mt19937_64& rng) {
  QueryInstance inst;
  inst.bids.resize(n);
  for (auto& b : inst.bids) b = config.bid.sample(rng);
  inst.pctr = config.pctr.sample(n, rng);
  inst.seeker_weight = config.weight.sample(rng);
  inst.erelevance = config.erelevance.sample(n, rng);
  return inst;
}

SeekerResult evaluate_instance(const QueryInstance& instance, const ScoreCombiner& combiner,
                               PaymentEvent payment) {
  const ScoreMatrix scores = score_position_aware(instance, combiner);
  const SlotAveragedView view = slot_average(instance, scores);
  const auto score_bar = score_position_unaware(view, instance, combiner);

  SeekerResult r;
  r.n = instance.size();
  auto& gfp = r.outcome.gfp;
  gfp.mechanism = Mechanism::kGfp;
  gfp.matching = gfp_rank(score_bar);
  gfp.revenue = revenue(instance, gfp.matching, payment);
  gfp.relevance = relevance(instance, gfp.matching);

  auto& vcg = r.outcome.vcg;
  vcg.mechanism = Mechanism::kVcg;
  vcg.matching = match_optimal(scores).matching;
  vcg.revenue = revenue(instance, vcg.matching, payment);
  vcg.relevance = relevance(instance, vcg.matching);

  r.gfp_total_score = total_score(scores, gfp.matching);
  r.vcg_total_score = total_score(scores, vcg.matching);
  const double slack = 1e-9 * std::max(1.0, std::abs(r.gfp_total_score));
  if (r.vcg_total_score < r.gfp_total_score - slack) {
    throw Error("optimal matching scored below the GFP slate; solver invariant broken");
  }
  return r;
}

SeekerResult simulate_seeker(const SimulationConfig& config, std::size_t n,
                             std::size_t seeker) {
  std::mt19937_64 rng(stream_seed(config.seed, seeker, n));
  QueryInstance inst = sample_instance(config, n, rng);
  inst.seeker_id = std::to_string(seeker);
  SeekerResult r =
      evaluate_instance(inst, ScoreCombiner::from_name(config.combiner), config.payment);
  r.seeker = seeker;
  return r;
}

double standard_error(std::span<const double> values) {
  const std::size_t count = values.size();
  if (count < 2) return 0.0;
  const double mean = sorted_sum({values.begin(), values.end()}) / static_cast<double>(count);
  std::vector<double> sq;
  sq.reserve(count);
  for (double v : values) sq.push_back((v - mean) * (v - mean));
  const double var = sorted_sum(std::move(sq)) / static_cast<double>(count - 1);
  return std::sqrt(var / static_cast<double>(count));
}

SimulationReport run_sweep(const SimulationConfig& config) {
  config.validate();
  const ScoreCombiner combiner = ScoreCombiner::from_name(config.combiner);
  unsigned threads = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
  threads = std::max(1u, threads);

  SimulationReport report;
  report.config = config;
  for (std::size_t n : config.depth_grid) {
    std::vector<SeekerResult> rows(config.seeker_count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;

    auto work = [&] {
      try {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
          rows[i] = simulate_seeker(config, n, i);
        }
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = rows.size();
      }
    };
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(threads, rows.size()));
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    DepthSummary depth;
    depth.n = n;
    std::vector<OutcomePair> pairs;
    std::vector<double> rev_gfp, rev_vcg, rel_gfp, rel_vcg;
    pairs.reserve(rows.size());
    for (const auto& r : rows) {
      pairs.push_back(r.outcome);
      rev_gfp.push_back(r.outcome.gfp.revenue);
      rev_vcg.push_back(r.outcome.vcg.revenue);
      rel_gfp.push_back(r.outcome.gfp.relevance);
      rel_vcg.push_back(r.outcome.vcg.relevance);
      const double slack = 1e-12 * std::max(1.0, std::abs(r.gfp_total_score));
      if (r.vcg_total_score > r.gfp_total_score + slack) ++depth.strict_dominance;
    }
    depth.summary = aggregate(pairs);
    depth.se_rev_gfp = standard_error(rev_gfp);
    depth.se_rev_vcg = standard_error(rev_vcg);
    depth.se_rel_gfp = standard_error(rel_gfp);
    depth.se_rel_vcg = standard_error(rel_vcg);
    if (config.keep_rows) depth.rows = std::move(rows);
    report.depths.push_back(std::move(depth));
  }
  return report;
}

}  // namespace posalloc
