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

#pragma once

#include <span>
#include <string_view>

#include "posalloc/allocation.hpp"
#include "posalloc/scoring.hpp"

namespace posalloc {

enum class Mechanism { kGfp, kVcg };

std::string_view to_string(Mechanism m);

/// What the poster pays for. Per-click charges b_j * pctr(j, slot); per
/// impression charges b_j whatever the slot.
enum class PaymentEvent { kClick, kImpression };

struct AllocationOutcome {
  Matching matching;
  double revenue = 0.0;
  double relevance = 0.0;
  Mechanism mechanism = Mechanism::kGfp;
};

/// Expected first-price pay-for-performance revenue of a slate.
double revenue(const QueryInstance& instance, const Matching& matching,
               PaymentEvent event = PaymentEvent::kClick);

/// sum_j erelevance(j, slot_of(j)). Positional discounting already lives in
/// the position-aware eRelevance, so the raw sum is the headline metric.
double relevance(const QueryInstance& instance, const Matching& matching);

/// NDCG-style slate quality on slot-averaged eRelevance: slot k (0-based)
/// is discounted by 1/log2(k + 2) and normalized by the ideal ordering.
/// Returns 0 when every eRelevance is 0.
double ndcg(std::span<const double> erelevance_bar, const Matching& matching);

struct OutcomePair {
  AllocationOutcome gfp;
  AllocationOutcome vcg;
};

struct PopulationSummary {
  std::size_t seeker_count = 0;
  double rev_gfp = 0.0;
  double rev_vcg = 0.0;
  double rel_gfp = 0.0;
  double rel_vcg = 0.0;
};

/// Population means of the four per-seeker quantities. Each sum runs over
/// the values in sorted order, so the result is bit-identical for any
/// permutation of `outcomes`. Throws InvalidArgument on an empty collection.
PopulationSummary aggregate(std::span<const OutcomePair> outcomes);

}  // namespace posalloc
