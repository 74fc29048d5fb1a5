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

#include "cli.hpp"

#include <ostream>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "posalloc/calibration.hpp"
#include "posalloc/errors.hpp"
#include "posalloc/io.hpp"
#include "posalloc/mdp.hpp"
#include "posalloc/simulation.hpp"

namespace posalloc::cli {
namespace {

namespace fs = std::filesystem;

using Outputs = std::vector<std::pair<fs::path, std::string>>;

// Every output of a command is rendered in memory first and only then
// written, each file atomically.
void write_all(const Outputs& outputs) {
  for (const auto& [path, contents] : outputs) io::write_file_atomic(path, contents);
}

std::string manifest(const CommandSpec& spec, const Outputs& outputs,
                     nlohmann::ordered_json extra = nlohmann::ordered_json::object()) {
  nlohmann::ordered_json j;
  j["schema_version"] = io::kSchemaVersion;
  j["command"] = spec.subcommand;
  j["config"] = spec.config.string();
  if (spec.seed) j["seed_override"] = *spec.seed;
  for (auto& [key, value] : extra.items()) j[key] = value;
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& [path, _] : outputs) j["outputs"].push_back(path.filename().string());
  return j.dump(2) + "\n";
}

bool prepare_out_dir(const CommandSpec& spec, std::ostream& err) {
  std::error_code ec;
  fs::create_directories(spec.out_dir, ec);
  if (ec || !fs::is_directory(spec.out_dir)) {
    err << "error: cannot create output directory '" << spec.out_dir.string() << "'\n";
    return false;
  }
  return true;
}

// Shared error mapping: configuration problems are usage errors, anything
// the library raises while computing is a runtime error.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const NonConvergence& e) {
    err << "runtime error: " << e.what() << " [residual=" << io::format_number(e.residual())
        << "]\n";
    return kRuntimeError;
  } catch (const Error& e) {
    err << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace

int cmd_simulate(const CommandSpec& spec, std::ostream& out, std::ostream& err) {
  SimulationConfig config;
  const int parsed = guarded(err, [&] {
    config = io::parse_simulation_config(io::read_file(spec.config));
    if (spec.seed) config.seed = *spec.seed;
    if (spec.threads) config.threads = *spec.threads;
    config.keep_rows = spec.per_seeker;
    return kOk;
  });
  if (parsed != kOk) return parsed;
  if (!prepare_out_dir(spec, err)) return kUsageError;

  return guarded(err, [&] {
    const SimulationReport report = run_sweep(config);
    Outputs outputs;
    outputs.emplace_back(spec.out_dir / "summary.csv", io::summary_csv(report));
    if (spec.per_seeker) {
      outputs.emplace_back(spec.out_dir / "per_seeker.csv", io::per_seeker_csv(report));
    }
    nlohmann::ordered_json extra;
    extra["seed"] = config.seed;
    extra["resolved_config"] = nlohmann::ordered_json::parse(io::simulation_config_to_json(config));
    outputs.emplace_back(spec.out_dir / "manifest.json", manifest(spec, outputs, extra));
    write_all(outputs);
    if (spec.verbosity != Verbosity::kQuiet) {
      for (const auto& d : report.depths) {
        out << "n=" << d.n << " rev_gfp=" << io::format_number(d.summary.rev_gfp)
            << " rev_vcg=" << io::format_number(d.summary.rev_vcg)
            << " rel_gfp=" << io::format_number(d.summary.rel_gfp)
            << " rel_vcg=" << io::format_number(d.summary.rel_vcg) << "\n";
        if (spec.verbosity == Verbosity::kVerbose) {
          out << "  strict VCG dominance on " << d.strict_dominance << "/"
              << config.seeker_count << " instances\n";
        }
      }
    }
    return kOk;
  });
}

int cmd_allocate(const CommandSpec& spec, std::ostream& out, std::ostream& err) {
  io::InstanceDocument doc;
  ScoreCombiner combiner = ScoreCombiner::additive();
  const int parsed = guarded(err, [&] {
    doc = io::parse_instance(io::read_file(spec.config));
    try {
      doc.instance.validate();
    } catch (const InvalidInstance& e) {
      throw ConfigError(e.what());
    }
    combiner = ScoreCombiner::from_name(doc.combiner);
    return kOk;
  });
  if (parsed != kOk) return parsed;
  if (!prepare_out_dir(spec, err)) return kUsageError;

  return guarded(err, [&] {
    const SeekerResult result = evaluate_instance(doc.instance, combiner);
    const std::string json = io::allocation_to_json(doc.instance, result, doc.combiner);
    Outputs outputs;
    outputs.emplace_back(spec.out_dir / "allocation.json", json);
    outputs.emplace_back(spec.out_dir / "manifest.json", manifest(spec, outputs));
    write_all(outputs);
    if (spec.verbosity != Verbosity::kQuiet) out << json;
    return kOk;
  });
}

int cmd_calibrate(const CommandSpec& spec, std::ostream& out, std::ostream& err) {
  std::vector<SegmentObservation> observations;
  std::map<std::string, double> targets;
  const int parsed = guarded(err, [&] {
    observations = io::parse_observations_csv(io::read_file(spec.config));
    if (spec.targets) targets = io::parse_targets_csv(io::read_file(*spec.targets));
    return kOk;
  });
  if (parsed != kOk) return parsed;
  if (!prepare_out_dir(spec, err)) return kUsageError;

  return guarded(err, [&] {
    const PowerLawFit fit = fit_power_law(observations);
    Outputs outputs;
    outputs.emplace_back(spec.out_dir / "fit.json", io::fit_to_json(fit));
    if (spec.targets) {
      std::map<std::string, double> weights;
      for (const auto& [seg, target] : targets) weights[seg] = required_weight(fit, seg, target);
      outputs.emplace_back(spec.out_dir / "required_weights.csv",
                           io::required_weights_csv(fit, targets, weights));
      std::vector<double> before;
      before.reserve(observations.size());
      for (const auto& o : observations) before.push_back(o.relevance);
      const auto after = reweighted_relevance(observations, fit, weights);
      outputs.emplace_back(spec.out_dir / "dispersion.csv",
                           io::dispersion_csv(dispersion_report(before, after)));
    }
    outputs.emplace_back(spec.out_dir / "manifest.json", manifest(spec, outputs));
    write_all(outputs);
    if (!fit.alpha_in_unit_interval()) {
      err << "warning: fitted alpha " << io::format_number(fit.alpha)
          << " lies outside (0, 1); the diminishing-returns model does not hold\n";
    }
    if (spec.verbosity != Verbosity::kQuiet) {
      out << "alpha=" << io::format_number(fit.alpha)
          << " r_squared=" << io::format_number(fit.r_squared) << " segments=" << fit.z.size()
          << " n_obs=" << fit.n_obs << "\n";
    }
    return kOk;
  });
}

int cmd_optimize_weights(const CommandSpec& spec, std::ostream& out, std::ostream& err) {
  io::ModelDocument doc;
  std::vector<Episode> episodes;
  const int parsed = guarded(err, [&] {
    doc = io::parse_model(io::read_file(spec.config));
    if (!doc.has_kernel) {
      fs::path ep = doc.episodes_path;
      if (ep.is_relative()) ep = spec.config.parent_path() / ep;
      episodes = io::parse_episodes_csv(io::read_file(ep));
    }
    return kOk;
  });
  if (parsed != kOk) return parsed;
  if (!prepare_out_dir(spec, err)) return kUsageError;

  return guarded(err, [&] {
    ValueIterationResult plan;
    KernelEstimate estimate;
    const KernelEstimate* estimate_ptr = nullptr;
    if (doc.has_kernel) {
      plan = value_iteration(doc.model, doc.tolerance, doc.max_iters);
    } else {
      auto learned =
          learn_and_plan(episodes, doc.model, doc.smoothing, doc.tolerance, doc.max_iters);
      plan = std::move(learned.plan);
      estimate = std::move(learned.estimate);
      estimate_ptr = &estimate;
      for (const auto& w : estimate.warnings) err << "warning: " << w << "\n";
    }
    Outputs outputs;
    outputs.emplace_back(spec.out_dir / "policy.json",
                         io::plan_to_json(doc.model, plan, estimate_ptr, doc.tolerance));
    outputs.emplace_back(spec.out_dir / "manifest.json", manifest(spec, outputs));
    write_all(outputs);
    if (spec.verbosity != Verbosity::kQuiet) {
      out << "converged in " << plan.iterations
          << " iterations, residual=" << io::format_number(plan.residual) << "\n";
      if (spec.verbosity == Verbosity::kVerbose) {
        for (std::size_t s = 0; s < doc.model.state_count(); ++s) {
          out << "  " << doc.model.states[s] << ": V=" << io::format_number(plan.value.values[s])
              << " weight=" << io::format_number(doc.model.actions[plan.policy.action_of[s]])
              << "\n";
        }
      }
    }
    return kOk;
  });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Slot allocation for marketplace search auctions: GFP ranking vs. "
               "position-aware matching, Seeker-Weight calibration and planning"};
  app.name("posalloc");
  app.require_subcommand(1);

  CommandSpec spec;
  std::string config, out_dir = ".", targets;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool quiet = false, verbose = false;

  std::vector<CLI::Option*> seed_opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Input file")->required();
    seed_opts.push_back(sub->add_option("--seed", seed, "Override the config seed"));
    sub->add_option("--out", out_dir, "Output directory (created if missing)");
    sub->add_flag("--quiet", quiet, "Suppress progress output");
    sub->add_flag("--verbose", verbose, "Extra diagnostics");
  };

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo sweep over auction depth");
  add_common(simulate);
  simulate->add_flag("--per-seeker", spec.per_seeker, "Also write per_seeker.csv");
  auto* threads_opt = simulate->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* allocate = app.add_subcommand("allocate", "Run GFP and optimal matching on one instance");
  add_common(allocate);

  auto* calibrate = app.add_subcommand("calibrate", "Fit the power-law relevance model");
  add_common(calibrate);
  auto* targets_opt =
      calibrate->add_option("--targets", targets, "CSV of segment_id,target_relevance");

  auto* optimize =
      app.add_subcommand("optimize-weights", "Solve the discounted Seeker-Weight MDP");
  add_common(optimize);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();  // program name
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }
  if (quiet && verbose) {
    err << "error: --quiet and --verbose are mutually exclusive\n";
    return kUsageError;
  }

  spec.config = config;
  spec.out_dir = out_dir;
  spec.verbosity = quiet ? Verbosity::kQuiet : verbose ? Verbosity::kVerbose : Verbosity::kNormal;
  for (const auto* opt : seed_opts) {
    if (opt->count() > 0) spec.seed = seed;
  }
  if (threads_opt->count() > 0) spec.threads = threads;
  if (targets_opt->count() > 0) spec.targets = targets;

  if (simulate->parsed()) {
    spec.subcommand = "simulate";
    return cmd_simulate(spec, out, err);
  }
  if (allocate->parsed()) {
    spec.subcommand = "allocate";
    return cmd_allocate(spec, out, err);
  }
  if (calibrate->parsed()) {
    spec.subcommand = "calibrate";
    return cmd_calibrate(spec, out, err);
  }
  spec.subcommand = "optimize-weights";
  return cmd_optimize_weights(spec, out, err);
}

}  // namespace posalloc::cli
