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

// Seeker-Weight calibration with the power-law relevance model
//
//   Rel_g = z_g * w^alpha
//
// fitted by least squares on log Rel = log z_g + alpha * log w with one shared
// slope and a fixed effect per segment. Under this model the relative lift
// from a weight change depends only on the weight ratio and alpha.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace posalloc {

struct SegmentObservation {
  std::string segment_id;
  double seeker_weight = 0.0;  ///< > 0
  double relevance = 0.0;      ///< > 0
  std::optional<std::string> arm;
};

struct PowerLawFit {
  double alpha = 0.0;
  std::map<std::string, double> z;  ///< per-segment efficiency, > 0
  double r_squared = 0.0;           ///< on the log scale
  std::size_t n_obs = 0;
  /// Residual degrees of freedom n_obs - segments - 1. Zero or negative
  /// leaves the standard error and interval NaN.
  long dof = 0;
  double alpha_std_error = 0.0;
  double alpha_ci95_low = 0.0;
  double alpha_ci95_high = 0.0;

  /// The model assumes diminishing returns, alpha in (0, 1). Fits outside
  /// that range are returned with this flag cleared.
  bool alpha_in_unit_interval() const { return alpha > 0.0 && alpha < 1.0; }
};

/// Throws DomainError for nonpositive weights or relevances, InvalidArgument
/// for fewer than two observations and Unidentifiable when no segment has
/// two distinct weights.
PowerLawFit fit_power_law(std::span<const SegmentObservation> observations);

/// Diagnostic variant: a separate slope per segment. Segments without two
/// distinct weights are omitted.
std::map<std::string, double> fit_alpha_per_segment(
    std::span<const SegmentObservation> observations);

/// z_g * w^alpha. Throws LookupError for an unknown segment.
double predicted_relevance(const PowerLawFit& fit, const std::string& segment, double weight);

/// (w_new / w_old)^alpha - 1, independent of segment and baseline relevance.
double predicted_lift(const PowerLawFit& fit, double w_old, double w_new);

/// Weight at which the segment's predicted relevance equals `target`:
/// (target / z_g)^(1 / alpha). Throws DomainError unless alpha > 0.
double required_weight(const PowerLawFit& fit, const std::string& segment, double target);

struct DistributionStats {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr() const { return q3 - q1; }
};

/// Mean and linearly interpolated quartiles. Throws InvalidArgument on empty input.
DistributionStats describe(std::span<const double> values);

struct DispersionReport {
  DistributionStats before;
  DistributionStats after;
};

DispersionReport dispersion_report(std::span<const double> before, std::span<const double> after);

/// Relevance each observation would show under its segment's new weight,
/// scaling the observed value by the model lift. Observations whose segment
/// is absent from `new_weights` keep their value.
std::vector<double> reweighted_relevance(std::span<const SegmentObservation> observations,
                                         const PowerLawFit& fit,
                                         const std::map<std::string, double>& new_weights);

}  // namespace posalloc
