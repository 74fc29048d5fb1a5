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

#include "posalloc/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <string>

#include "posalloc/errors.hpp"

namespace posalloc {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

void require_square_finite(const ScoreMatrix& scores) {
  if (scores.is_ragged()) throw InvalidInstance("score matrix has ragged rows");
  if (scores.rows() == 0) throw InvalidInstance("score matrix is empty");
  if (!scores.square()) {
    throw InvalidInstance("score matrix must be square, got " +
                          std::to_string(scores.rows()) + "x" +
                          std::to_string(scores.cols()));
  }
  for (double v : scores.values()) {
    if (!std::isfinite(v)) throw InvalidInstance("score matrix has non-finite entries");
  }
}

// Kuhn-Munkres with row/column potentials (shortest augmenting paths) on
// cost = max(scores) - scores, which turns maximization into minimization
// with nonnegative costs. O(n^3). Returns the assignment plus potentials
// satisfying cost(j,k) - u[j] - v[k] >= 0 with equality on matched edges.
struct HungarianResult {
  std::vector<std::size_t> assignment;
  std::vector<double> u;
  std::vector<double> v;
};

HungarianResult hungarian_min(const Matrix& cost) {
  const std::size_t n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based internally; index 0 is the virtual root of each search.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> row_of_col(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    row_of_col[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t row0 = row_of_col[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double cur = cost(row0 - 1, col - 1) - u[row0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= n; ++col) {
        if (used[col]) {
          u[row_of_col[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (row_of_col[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      row_of_col[col0] = row_of_col[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  HungarianResult out;
  out.assignment.assign(n, kNone);
  for (std::size_t col = 1; col <= n; ++col) out.assignment[row_of_col[col] - 1] = col - 1;
  out.u.assign(u.begin() + 1, u.end());
  out.v.assign(v.begin() + 1, v.end());
  return out;
}

// By complementary slackness, the optimal matchings are exactly the perfect
// matchings of the equality subgraph of any optimal dual. Starting from one
// such matching, fix jobs in index order, each to the smallest tight slot
// that still admits a perfect completion. Feasibility of "job j takes slot
// k" is an alternating path from k back to j's current slot through unfixed
// jobs; one reverse BFS per job finds all feasible k at once. O(n^3).
std::vector<std::size_t> lexicographic_optimum(const Matrix& cost,
                                               const HungarianResult& h) {
  const std::size_t n = cost.rows();
  double scale = 1.0;
  for (double c : cost.values()) scale = std::max(scale, std::abs(c));
  const double tol = 64.0 * std::numeric_limits<double>::epsilon() *
                     static_cast<double>(n) * scale;
  auto tight = [&](std::size_t j, std::size_t k) {
    return std::abs(cost(j, k) - h.u[j] - h.v[k]) <= tol;
  };

  std::vector<std::size_t> slot_of = h.assignment;
  std::vector<std::size_t> job_at(n);
  for (std::size_t j = 0; j < n; ++j) job_at[slot_of[j]] = j;

  std::vector<std::size_t> next(n);
  std::vector<char> reach(n);
  std::deque<std::size_t> queue;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t home = slot_of[j];
    std::fill(reach.begin(), reach.end(), 0);
    reach[home] = 1;
    next[home] = kNone;
    queue.assign(1, home);
    while (!queue.empty()) {
      const std::size_t target = queue.front();
      queue.pop_front();
      for (std::size_t k = 0; k < n; ++k) {
        if (reach[k]) continue;
        const std::size_t occupant = job_at[k];
        if (occupant <= j) continue;  // fixed jobs and j itself stay put
        if (tight(occupant, target)) {
          reach[k] = 1;
          next[k] = target;
          queue.push_back(k);
        }
      }
    }
    std::size_t chosen = home;
    for (std::size_t k = 0; k < n; ++k) {
      if (reach[k] && tight(j, k)) {
        chosen = k;
        break;
      }
    }
    // Shift occupants along the chain chosen -> ... -> home.
    std::vector<std::size_t> movers;
    for (std::size_t k = chosen; k != home; k = next[k]) movers.push_back(job_at[k]);
    for (std::size_t k = chosen, i = 0; k != home; k = next[k], ++i) {
      slot_of[movers[i]] = next[k];
      job_at[next[k]] = movers[i];
    }
    slot_of[j] = chosen;
    job_at[chosen] = j;
  }
  return slot_of;
}

SolverReport make_report(const ScoreMatrix& scores, std::vector<std::size_t> assignment,
                         SolverKind kind) {
  SolverReport report;
  report.matching = Matching(std::move(assignment));
  report.total_score = total_score(scores, report.matching);
  report.solver = kind;
  return report;
}

}  // namespace

Matching::Matching(std::vector<std::size_t> assignment) : assignment_(std::move(assignment)) {
  if (!is_permutation(assignment_)) {
    throw InvalidArgument("assignment is not a permutation of 0..n-1");
  }
}

Matching Matching::identity(std::size_t n) {
  std::vector<std::size_t> a(n);
  std::iota(a.begin(), a.end(), std::size_t{0});
  return Matching(std::move(a));
}

std::vector<std::size_t> Matching::job_at() const {
  std::vector<std::size_t> inv(assignment_.size());
  for (std::size_t j = 0; j < assignment_.size(); ++j) inv[assignment_[j]] = j;
  return inv;
}

bool is_permutation(std::span<const std::size_t> assignment) {
  std::vector<char> seen(assignment.size(), 0);
  for (std::size_t k : assignment) {
    if (k >= assignment.size() || seen[k]) return false;
    seen[k] = 1;
  }
  return true;
}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kGfp:
      return "gfp";
    case SolverKind::kHungarian:
      return "hungarian";
    case SolverKind::kAuctionEps:
      return "auction_eps";
    case SolverKind::kBruteForce:
      return "brute_force";
  }
  return "unknown";
}

double total_score(const ScoreMatrix& scores, const Matching& matching) {
  if (scores.rows() != matching.size() || scores.cols() != matching.size()) {
    throw InvalidInstance("matching size does not match score matrix");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < matching.size(); ++j) total += scores(j, matching.slot_of(j));
  return total;
}

Matching gfp_rank(std::span<const double> score_bar) {
  if (score_bar.empty()) throw InvalidInstance("cannot rank an empty job list");
  for (double s : score_bar) {
    if (!std::isfinite(s)) throw InvalidInstance("slot-averaged scores must be finite");
  }
  std::vector<std::size_t> order(score_bar.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return score_bar[a] > score_bar[b];
  });
  std::vector<std::size_t> assignment(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) assignment[order[k]] = k;
  return Matching(std::move(assignment));
}

SolverReport match_optimal(const ScoreMatrix& scores) {
  require_square_finite(scores);
  const std::size_t n = scores.rows();
  double top = -std::numeric_limits<double>::infinity();
  for (double s : scores.values()) top = std::max(top, s);
  Matrix cost(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) cost(j, k) = top - scores(j, k);
  }
  const HungarianResult h = hungarian_min(cost);
  SolverReport hungarian = make_report(scores, h.assignment, SolverKind::kHungarian);
  SolverReport lex = make_report(scores, lexicographic_optimum(cost, h), SolverKind::kHungarian);
  // A near-tie inside the tightness tolerance could pick a matching that is
  // worse in the last ulp; keep the strictly better one in that case.
  return lex.total_score >= hungarian.total_score ? lex : hungarian;
}

std::vector<double> default_eps_schedule(double max_abs, std::size_t n) {
  const double last = 1.0 / static_cast<double>(n + 1);
  std::vector<double> schedule;
  for (double eps = std::max(max_abs / 4.0, 1.0); eps > last; eps /= 5.0) {
    schedule.push_back(eps);
  }
  schedule.push_back(last);
  return schedule;
}

namespace {

Matrix scaled_benefits(const ScoreMatrix& scores, double factor, double* max_abs) {
  if (!std::isfinite(factor) || factor <= 0.0) {
    throw InvalidArgument("auction scale factor must be finite and > 0");
  }
  constexpr double kExactIntegerLimit = 4503599627370496.0;  // 2^52
  Matrix benefit(scores.rows(), scores.cols());
  *max_abs = 0.0;
  for (std::size_t j = 0; j < scores.rows(); ++j) {
    for (std::size_t k = 0; k < scores.cols(); ++k) {
      const double a = std::round(scores(j, k) * factor);
      if (!(std::abs(a) < kExactIntegerLimit)) {
        throw InvalidArgument("scaled score exceeds the exactly representable integer range");
      }
      benefit(j, k) = a;
      *max_abs = std::max(*max_abs, std::abs(a));
    }
  }
  return benefit;
}

SolverReport run_auction(const ScoreMatrix& scores, const Matrix& benefit,
                         const std::vector<double>& schedule) {
  const std::size_t n = scores.rows();
  std::vector<double> price(n, 0.0);
  std::vector<std::size_t> slot_of(n, kNone), owner(n, kNone);
  long bids = 0;
  std::deque<std::size_t> unassigned;

  for (double eps : schedule) {
    std::fill(slot_of.begin(), slot_of.end(), kNone);
    std::fill(owner.begin(), owner.end(), kNone);
    unassigned.resize(n);
    std::iota(unassigned.begin(), unassigned.end(), std::size_t{0});

    while (!unassigned.empty()) {
      const std::size_t job = unassigned.front();
      unassigned.pop_front();
      double best = -std::numeric_limits<double>::infinity();
      double second = best;
      std::size_t best_slot = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const double value = benefit(job, k) - price[k];
        if (value > best) {
          second = best;
          best = value;
          best_slot = k;
        } else if (value > second) {
          second = value;
        }
      }
      // A lone bidder has no competing slot; raise by eps alone.
      const double increment = (n == 1 ? 0.0 : best - second) + eps;
      price[best_slot] += increment;
      if (owner[best_slot] != kNone) {
        slot_of[owner[best_slot]] = kNone;
        unassigned.push_back(owner[best_slot]);
      }
      owner[best_slot] = job;
      slot_of[job] = best_slot;
      ++bids;
    }
  }

  SolverReport report = make_report(scores, slot_of, SolverKind::kAuctionEps);
  report.iterations = bids;
  report.exact_certified = schedule.back() < 1.0 / static_cast<double>(n);
  return report;
}

}  // namespace

SolverReport match_auction_eps(const ScoreMatrix& scores, const AuctionOptions& options) {
  if (options.eps_schedule.empty()) throw InvalidArgument("epsilon schedule is empty");
  for (std::size_t i = 0; i < options.eps_schedule.size(); ++i) {
    const double eps = options.eps_schedule[i];
    if (!std::isfinite(eps) || eps <= 0.0) {
      throw InvalidArgument("epsilon schedule entries must be finite and > 0");
    }
    if (i > 0 && !(eps < options.eps_schedule[i - 1])) {
      throw InvalidArgument("epsilon schedule must be strictly decreasing");
    }
  }
  require_square_finite(scores);
  double max_abs = 0.0;
  const Matrix benefit = scaled_benefits(scores, options.scale_factor, &max_abs);
  return run_auction(scores, benefit, options.eps_schedule);
}

SolverReport match_auction_eps(const ScoreMatrix& scores) {
  require_square_finite(scores);
  AuctionOptions options;
  double max_abs = 0.0;
  const Matrix benefit = scaled_benefits(scores, options.scale_factor, &max_abs);
  return run_auction(scores, benefit, default_eps_schedule(max_abs, scores.rows()));
}

SolverReport match_brute_force(const ScoreMatrix& scores) {
  require_square_finite(scores);
  const std::size_t n = scores.rows();
  if (n > kBruteForceMaxSize) {
    throw SizeLimit("brute-force matching supports n <= " +
                    std::to_string(kBruteForceMaxSize) + ", got " + std::to_string(n));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> best = perm;
  double best_total = -std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += scores(j, perm[j]);
    if (total > best_total) {
      best_total = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return make_report(scores, std::move(best), SolverKind::kBruteForce);
}

}  // namespace posalloc
