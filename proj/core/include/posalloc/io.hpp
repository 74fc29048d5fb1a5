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

// File formats. Configs and instances are JSON documents carrying
// "schema_version": 1; tabular data is comma-separated with a header row.
// Parse failures throw ConfigError. Numbers are written in shortest
// round-trip form so rewriting a file never changes its bytes.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "posalloc/allocation.hpp"
#include "posalloc/calibration.hpp"
#include "posalloc/mdp.hpp"
#include "posalloc/scoring.hpp"
#include "posalloc/simulation.hpp"

namespace posalloc::io {

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// --- simulation ----------------------------------------------------------

SimulationConfig parse_simulation_config(std::string_view json_text);
std::string simulation_config_to_json(const SimulationConfig& config);

/// Columns: n, rev_gfp, rev_vcg, rel_gfp, rel_vcg, se_rev_gfp, se_rev_vcg,
/// se_rel_gfp, se_rel_vcg.
std::string summary_csv(const SimulationReport& report);

/// Columns: seeker_id, n, mechanism, revenue, relevance. Two rows per
/// seeker and depth (gfp then vcg). Requires config.keep_rows.
std::string per_seeker_csv(const SimulationReport& report);

// --- allocation ----------------------------------------------------------

struct InstanceDocument {
  QueryInstance instance;
  std::string combiner = "additive";
};

/// {"bids": [...], "pctr": [[...]], "erelevance": [[...]], "seeker_weight": w,
///  "seeker_id": "...", "combiner": "additive"}. Dimension problems surface
/// as InvalidInstance from QueryInstance::validate().
InstanceDocument parse_instance(std::string_view json_text);

/// Both mechanisms on one instance: matchings, position-aware totals,
/// revenue and relevance.
std::string allocation_to_json(const QueryInstance& instance, const SeekerResult& result,
                               const std::string& combiner);

// --- calibration ---------------------------------------------------------

/// Header: segment_id,seeker_weight,relevance[,arm]
std::vector<SegmentObservation> parse_observations_csv(std::string_view csv_text);

/// Header: segment_id,target_relevance
std::map<std::string, double> parse_targets_csv(std::string_view csv_text);

/// {"schema_version", "alpha", "r_squared", "z": {segment: value}, ...}
std::string fit_to_json(const PowerLawFit& fit);

/// Columns: segment_id, z, target_relevance, required_weight
std::string required_weights_csv(const PowerLawFit& fit,
                                 const std::map<std::string, double>& targets,
                                 const std::map<std::string, double>& weights);

/// Columns: statistic, before, after, change
std::string dispersion_csv(const DispersionReport& report);

// --- dynamic optimization ------------------------------------------------

struct ModelDocument {
  MdpModel model;
  bool has_kernel = false;
  std::string episodes_path;  ///< relative paths resolve against the config
  double smoothing = 0.0;
  double tolerance = kDefaultValueTolerance;
  int max_iters = 1'000'000;
};

ModelDocument parse_model(std::string_view json_text);

/// Header: state,action,next_state with an optional leading episode column.
/// Consecutive rows with the same episode id form one episode.
std::vector<Episode> parse_episodes_csv(std::string_view csv_text);

std::string plan_to_json(const MdpModel& model, const ValueIterationResult& result,
                         const KernelEstimate* estimate, double tolerance);

}  // namespace posalloc::io
