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

#include "posalloc/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "posalloc/errors.hpp"

namespace posalloc {
namespace {

struct SegmentMoments {
  std::size_t count = 0;
  double sum_x = 0.0;  // log w
  double sum_y = 0.0;  // log Rel
  double mean_x() const { return sum_x / static_cast<double>(count); }
  double mean_y() const { return sum_y / static_cast<double>(count); }
};

void check_domain(const SegmentObservation& o) {
  if (!(std::isfinite(o.seeker_weight) && o.seeker_weight > 0.0)) {
    throw DomainError("seeker_weight must be finite and > 0 (segment '" + o.segment_id + "')");
  }
  if (!(std::isfinite(o.relevance) && o.relevance > 0.0)) {
    throw DomainError("relevance must be finite and > 0 (segment '" + o.segment_id + "')");
  }
}

std::map<std::string, SegmentMoments> segment_moments(
    std::span<const SegmentObservation> obs) {
  std::map<std::string, SegmentMoments> m;
  for (const auto& o : obs) {
    check_domain(o);
    auto& s = m[o.segment_id];
    ++s.count;
    s.sum_x += std::log(o.seeker_weight);
    s.sum_y += std::log(o.relevance);
  }
  return m;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

PowerLawFit fit_power_law(std::span<const SegmentObservation> observations) {
  if (observations.size() < 2) {
    throw InvalidArgument("power-law fit needs at least two observations");
  }
  const auto moments = segment_moments(observations);

  // Within-segment demeaning removes the fixed effects; the shared slope is
  // the pooled within covariance over the pooled within variance.
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& o : observations) {
    const auto& s = moments.at(o.segment_id);
    const double dx = std::log(o.seeker_weight) - s.mean_x();
    const double dy = std::log(o.relevance) - s.mean_y();
    sxx += dx * dx;
    sxy += dx * dy;
  }
  if (sxx == 0.0) {
    throw Unidentifiable(
        "elasticity is unidentifiable: no segment observes two distinct seeker weights");
  }

  PowerLawFit fit;
  fit.alpha = sxy / sxx;
  fit.n_obs = observations.size();
  for (const auto& [seg, s] : moments) {
    fit.z[seg] = std::exp(s.mean_y() - fit.alpha * s.mean_x());
  }

  double grand_y = 0.0;
  for (const auto& o : observations) grand_y += std::log(o.relevance);
  grand_y /= static_cast<double>(observations.size());
  double ssr = 0.0;
  double sst = 0.0;
  for (const auto& o : observations) {
    const auto& s = moments.at(o.segment_id);
    const double y = std::log(o.relevance);
    const double fitted = s.mean_y() + fit.alpha * (std::log(o.seeker_weight) - s.mean_x());
    ssr += (y - fitted) * (y - fitted);
    sst += (y - grand_y) * (y - grand_y);
  }
  fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;

  fit.dof = static_cast<long>(observations.size()) - static_cast<long>(moments.size()) - 1;
  if (fit.dof > 0) {
    const double sigma2 = ssr / static_cast<double>(fit.dof);
    fit.alpha_std_error = std::sqrt(sigma2 / sxx);
    const boost::math::students_t t(static_cast<double>(fit.dof));
    const double crit = boost::math::quantile(boost::math::complement(t, 0.025));
    fit.alpha_ci95_low = fit.alpha - crit * fit.alpha_std_error;
    fit.alpha_ci95_high = fit.alpha + crit * fit.alpha_std_error;
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    fit.alpha_std_error = fit.alpha_ci95_low = fit.alpha_ci95_high = nan;
  }
  return fit;
}

std::map<std::string, double> fit_alpha_per_segment(
    std::span<const SegmentObservation> observations) {
  const auto moments = segment_moments(observations);
  std::map<std::string, std::pair<double, double>> acc;  // sxx, sxy
  for (const auto& o : observations) {
    const auto& s = moments.at(o.segment_id);
    const double dx = std::log(o.seeker_weight) - s.mean_x();
    const double dy = std::log(o.relevance) - s.mean_y();
    auto& [sxx, sxy] = acc[o.segment_id];
    sxx += dx * dx;
    sxy += dx * dy;
  }
  std::map<std::string, double> out;
  for (const auto& [seg, v] : acc) {
    if (v.first > 0.0) out[seg] = v.second / v.first;
  }
  return out;
}

double predicted_relevance(const PowerLawFit& fit, const std::string& segment, double weight) {
  const auto it = fit.z.find(segment);
  if (it == fit.z.end()) throw LookupError("unknown segment '" + segment + "'");
  if (!(weight > 0.0)) throw DomainError("weight must be > 0");
  return it->second * std::pow(weight, fit.alpha);
}

double predicted_lift(const PowerLawFit& fit, double w_old, double w_new) {
  if (!(w_old > 0.0 && w_new > 0.0) || !std::isfinite(w_old) || !std::isfinite(w_new)) {
    throw DomainError("weights must be finite and > 0");
  }
  return std::pow(w_new / w_old, fit.alpha) - 1.0;
}

double required_weight(const PowerLawFit& fit, const std::string& segment, double target) {
  const auto it = fit.z.find(segment);
  if (it == fit.z.end()) throw LookupError("unknown segment '" + segment + "'");
  if (!(fit.alpha > 0.0)) {
    throw DomainError("weight inversion is undefined for alpha <= 0");
  }
  if (!(target > 0.0) || !std::isfinite(target)) {
    throw DomainError("target relevance must be finite and > 0");
  }
  return std::pow(target / it->second, 1.0 / fit.alpha);
}

DistributionStats describe(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("cannot describe an empty population");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  DistributionStats s;
  s.count = sorted.size();
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(sorted.size());
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  return s;
}

DispersionReport dispersion_report(std::span<const double> before,
                                   std::span<const double> after) {
  return {describe(before), describe(after)};
}

std::vector<double> reweighted_relevance(std::span<const SegmentObservation> observations,
                                         const PowerLawFit& fit,
                                         const std::map<std::string, double>& new_weights) {
  std::vector<double> out;
  out.reserve(observations.size());
  for (const auto& o : observations) {
    check_domain(o);
    const auto it = new_weights.find(o.segment_id);
    if (it == new_weights.end()) {
      out.push_back(o.relevance);
    } else {
      (void)predicted_lift(fit, o.seeker_weight, it->second);  // domain check
      out.push_back(o.relevance * std::pow(it->second / o.seeker_weight, fit.alpha));
    }
  }
  return out;
}

}  // namespace posalloc
