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

#include "posalloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "posalloc/errors.hpp"

namespace posalloc {
namespace {

void require_compatible(const QueryInstance& instance, const Matching& matching) {
  instance.validate();
  if (matching.size() != instance.size()) {
    throw InvalidInstance("matching has " + std::to_string(matching.size()) +
                          " jobs, instance has " + std::to_string(instance.size()));
  }
}

double sorted_mean(std::span<const OutcomePair> outcomes,
                   const std::function<double(const OutcomePair&)>& field) {
  std::vector<double> values;
  values.reserve(outcomes.size());
  for (const auto& o : outcomes) values.push_back(field(o));
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double dcg(std::span<const double> gains_by_slot) {
  double total = 0.0;
  for (std::size_t k = 0; k < gains_by_slot.size(); ++k) {
    total += gains_by_slot[k] / std::log2(static_cast<double>(k) + 2.0);
  }
  return total;
}

}  // namespace

std::string_view to_string(Mechanism m) { return m == Mechanism::kGfp ? "gfp" : "vcg"; }

double revenue(const QueryInstance& instance, const Matching& matching, PaymentEvent event) {
  require_compatible(instance, matching);
  double total = 0.0;
  for (std::size_t j = 0; j < instance.size(); ++j) {
    const double b = instance.bids[j];
    total += event == PaymentEvent::kClick ? b * instance.pctr(j, matching.slot_of(j)) : b;
  }
  return total;
}

double relevance(const QueryInstance& instance, const Matching& matching) {
  require_compatible(instance, matching);
  double total = 0.0;
  for (std::size_t j = 0; j < instance.size(); ++j) {
    total += instance.erelevance(j, matching.slot_of(j));
  }
  return total;
}

double ndcg(std::span<const double> erelevance_bar, const Matching& matching) {
  if (erelevance_bar.size() != matching.size()) {
    throw InvalidInstance("eRelevance vector and matching differ in size");
  }
  std::vector<double> shown(matching.size());
  const auto job_at = matching.job_at();
  for (std::size_t k = 0; k < job_at.size(); ++k) shown[k] = erelevance_bar[job_at[k]];
  std::vector<double> ideal(erelevance_bar.begin(), erelevance_bar.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double best = dcg(ideal);
  return best > 0.0 ? dcg(shown) / best : 0.0;
}

PopulationSummary aggregate(std::span<const OutcomePair> outcomes) {
  if (outcomes.empty()) throw InvalidArgument("cannot aggregate an empty outcome collection");
  PopulationSummary s;
  s.seeker_count = outcomes.size();
  s.rev_gfp = sorted_mean(outcomes, [](const OutcomePair& o) { return o.gfp.revenue; });
  s.rev_vcg = sorted_mean(outcomes, [](const OutcomePair& o) { return o.vcg.revenue; });
  s.rel_gfp = sorted_mean(outcomes, [](const OutcomePair& o) { return o.gfp.relevance; });
  s.rel_vcg = sorted_mean(outcomes, [](const OutcomePair& o) { return o.vcg.relevance; });
  return s;
}

}  // namespace posalloc
