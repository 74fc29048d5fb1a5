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

#include "posalloc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "posalloc/errors.hpp"

namespace posalloc::io {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const char* where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

void check_schema(const json& doc) {
  if (doc.contains("schema_version") && doc.at("schema_version") != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + doc.at("schema_version").dump() +
                      " (expected " + std::to_string(kSchemaVersion) + ")");
  }
}

// Typed field access that reports the offending key instead of a bare
// nlohmann type error.
template <typename T>
T get_as(const json& obj, const char* key, const char* where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + "." + key + ": " + e.what());
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const char* where) {
  return obj.contains(key) ? get_as<T>(obj, key, where) : fallback;
}

DistributionSpec parse_distribution(const json& j, const char* where) {
  check_keys(j, {"family", "value", "low", "high", "mu", "sigma"}, where);
  const auto family = get_as<std::string>(j, "family", where);
  DistributionSpec d;
  if (family == "constant") {
    d = DistributionSpec::constant(get_as<double>(j, "value", where));
  } else if (family == "uniform") {
    d = DistributionSpec::uniform(get_as<double>(j, "low", where),
                                  get_as<double>(j, "high", where));
  } else if (family == "lognormal") {
    d = DistributionSpec::lognormal(get_as<double>(j, "mu", where),
                                    get_as<double>(j, "sigma", where));
  } else {
    throw ConfigError(std::string(where) + ": unknown distribution family '" + family + "'");
  }
  d.validate(where);
  return d;
}

ordered_json distribution_json(const DistributionSpec& d) {
  ordered_json j;
  j["family"] = to_string(d.family);
  switch (d.family) {
    case DistributionSpec::Family::kConstant:
      j["value"] = d.a;
      break;
    case DistributionSpec::Family::kUniform:
      j["low"] = d.a;
      j["high"] = d.b;
      break;
    case DistributionSpec::Family::kLognormal:
      j["mu"] = d.a;
      j["sigma"] = d.b;
      break;
  }
  return j;
}

PositionDecay parse_decay(const json& j, const char* where) {
  PositionDecay decay;
  const std::string kind = j.is_string() ? j.get<std::string>()
                                         : get_as<std::string>(j, "kind", where);
  if (kind == "none") {
    decay.kind = PositionDecay::Kind::kNone;
  } else if (kind == "log2") {
    decay.kind = PositionDecay::Kind::kLog2;
  } else if (kind == "geometric") {
    decay.kind = PositionDecay::Kind::kGeometric;
    if (!j.is_object()) throw ConfigError(std::string(where) + ": geometric decay needs a rate");
    decay.rate = get_as<double>(j, "rate", where);
  } else {
    throw ConfigError(std::string(where) + ": unknown decay '" + kind + "'");
  }
  return decay;
}

ordered_json decay_json(const PositionDecay& d) {
  switch (d.kind) {
    case PositionDecay::Kind::kNone:
      return "none";
    case PositionDecay::Kind::kLog2:
      return "log2";
    case PositionDecay::Kind::kGeometric: {
      ordered_json j;
      j["kind"] = "geometric";
      j["rate"] = d.rate;
      return j;
    }
  }
  return "log2";
}

PositionalSpec parse_positional(const json& j, const char* where) {
  check_keys(j, {"quality", "decay", "noise", "clamp_unit"}, where);
  PositionalSpec spec;
  if (j.contains("quality")) spec.quality = parse_distribution(j.at("quality"), where);
  if (j.contains("decay")) spec.decay = parse_decay(j.at("decay"), where);
  if (j.contains("noise")) spec.noise = parse_distribution(j.at("noise"), where);
  spec.clamp_unit = get_or<bool>(j, "clamp_unit", spec.clamp_unit, where);
  return spec;
}

ordered_json positional_json(const PositionalSpec& p) {
  ordered_json j;
  j["quality"] = distribution_json(p.quality);
  j["decay"] = decay_json(p.decay);
  j["noise"] = distribution_json(p.noise);
  j["clamp_unit"] = p.clamp_unit;
  return j;
}

Matrix parse_matrix(const json& doc, const char* key) {
  try {
    return Matrix::from_rows(doc.at(key).get<std::vector<std::vector<double>>>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string(key) + ": expected a matrix of numbers (" + e.what() + ")");
  }
}

// --- CSV -------------------------------------------------------------------

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ConfigError("CSV is missing column '" + name + "'");
  }
  bool has(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
  }
};

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto cells = split_row(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ConfigError("CSV line " + std::to_string(line_no) + " has " +
                        std::to_string(cells.size()) + " fields, header has " +
                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) throw ConfigError("CSV has no header row");
  return table;
}

template <typename T>
T parse_cell(const std::string& cell, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ConfigError("CSV line " + std::to_string(line) + ": cannot parse '" + cell + "'");
  }
  return value;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move output into place at '" + path.string() + "'");
  }
}

// --- simulation ------------------------------------------------------------

SimulationConfig parse_simulation_config(std::string_view json_text) {
  const json doc = parse_json(json_text);
  constexpr const char* where = "simulation config";
  check_keys(doc,
             {"schema_version", "seeker_count", "depth_grid", "seed", "combiner", "payment",
              "threads", "distributions"},
             where);
  check_schema(doc);
  SimulationConfig c;
  c.seeker_count = get_or<std::size_t>(doc, "seeker_count", c.seeker_count, where);
  c.depth_grid = get_or<std::vector<std::size_t>>(doc, "depth_grid", c.depth_grid, where);
  c.seed = get_or<std::uint64_t>(doc, "seed", c.seed, where);
  c.combiner = get_or<std::string>(doc, "combiner", c.combiner, where);
  c.threads = get_or<unsigned>(doc, "threads", c.threads, where);
  const auto payment = get_or<std::string>(doc, "payment", "click", where);
  if (payment == "click") {
    c.payment = PaymentEvent::kClick;
  } else if (payment == "impression") {
    c.payment = PaymentEvent::kImpression;
  } else {
    throw ConfigError("payment must be 'click' or 'impression'");
  }
  if (doc.contains("distributions")) {
    const json& d = doc.at("distributions");
    check_keys(d, {"bid", "pctr", "erelevance", "weight"}, "distributions");
    if (d.contains("bid")) c.bid = parse_distribution(d.at("bid"), "distributions.bid");
    if (d.contains("pctr")) c.pctr = parse_positional(d.at("pctr"), "distributions.pctr");
    if (d.contains("erelevance")) {
      c.erelevance = parse_positional(d.at("erelevance"), "distributions.erelevance");
    }
    if (d.contains("weight")) {
      c.weight = parse_distribution(d.at("weight"), "distributions.weight");
    }
  }
  c.validate();
  return c;
}

std::string simulation_config_to_json(const SimulationConfig& c) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["seeker_count"] = c.seeker_count;
  j["depth_grid"] = c.depth_grid;
  j["seed"] = c.seed;
  j["combiner"] = c.combiner;
  j["payment"] = c.payment == PaymentEvent::kClick ? "click" : "impression";
  j["distributions"]["bid"] = distribution_json(c.bid);
  j["distributions"]["pctr"] = positional_json(c.pctr);
  j["distributions"]["erelevance"] = positional_json(c.erelevance);
  j["distributions"]["weight"] = distribution_json(c.weight);
  return j.dump(2) + "\n";
}

std::string summary_csv(const SimulationReport& report) {
  std::string out =
      "n,rev_gfp,rev_vcg,rel_gfp,rel_vcg,se_rev_gfp,se_rev_vcg,se_rel_gfp,se_rel_vcg\n";
  for (const auto& d : report.depths) {
    const auto& s = d.summary;
    out += std::to_string(d.n);
    for (double v : {s.rev_gfp, s.rev_vcg, s.rel_gfp, s.rel_vcg, d.se_rev_gfp, d.se_rev_vcg,
                     d.se_rel_gfp, d.se_rel_vcg}) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

std::string per_seeker_csv(const SimulationReport& report) {
  std::string out = "seeker_id,n,mechanism,revenue,relevance\n";
  for (const auto& d : report.depths) {
    for (const auto& r : d.rows) {
      for (const AllocationOutcome* o : {&r.outcome.gfp, &r.outcome.vcg}) {
        out += std::to_string(r.seeker) + ',' + std::to_string(r.n) + ',' +
               std::string(to_string(o->mechanism)) + ',' + format_number(o->revenue) + ',' +
               format_number(o->relevance) + '\n';
      }
    }
  }
  return out;
}

// --- allocation ------------------------------------------------------------

InstanceDocument parse_instance(std::string_view json_text) {
  const json doc = parse_json(json_text);
  constexpr const char* where = "instance";
  check_keys(doc,
             {"schema_version", "seeker_id", "bids", "pctr", "erelevance", "seeker_weight",
              "combiner"},
             where);
  check_schema(doc);
  InstanceDocument out;
  auto& inst = out.instance;
  inst.seeker_id = get_or<std::string>(doc, "seeker_id", "", where);
  inst.bids = get_as<std::vector<double>>(doc, "bids", where);
  inst.pctr = parse_matrix(doc, "pctr");
  inst.erelevance = parse_matrix(doc, "erelevance");
  inst.seeker_weight = get_as<double>(doc, "seeker_weight", where);
  out.combiner = get_or<std::string>(doc, "combiner", out.combiner, where);
  return out;
}

std::string allocation_to_json(const QueryInstance& instance, const SeekerResult& result,
                               const std::string& combiner) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["seeker_id"] = instance.seeker_id;
  j["n"] = instance.size();
  j["combiner"] = combiner;
  auto mech = [](const AllocationOutcome& o, double total) {
    ordered_json m;
    m["assignment"] = o.matching.assignment();
    m["slate"] = o.matching.job_at();
    m["total_score"] = total;
    m["revenue"] = o.revenue;
    m["relevance"] = o.relevance;
    return m;
  };
  j["gfp"] = mech(result.outcome.gfp, result.gfp_total_score);
  j["vcg"] = mech(result.outcome.vcg, result.vcg_total_score);
  return j.dump(2) + "\n";
}

// --- calibration -----------------------------------------------------------

std::vector<SegmentObservation> parse_observations_csv(std::string_view csv_text) {
  const CsvTable t = parse_csv(csv_text);
  const auto seg = t.column("segment_id");
  const auto w = t.column("seeker_weight");
  const auto rel = t.column("relevance");
  const bool has_arm = t.has("arm");
  const auto arm = has_arm ? t.column("arm") : 0;
  std::vector<SegmentObservation> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    SegmentObservation o;
    o.segment_id = row[seg];
    o.seeker_weight = parse_cell<double>(row[w], t.line_numbers[i]);
    o.relevance = parse_cell<double>(row[rel], t.line_numbers[i]);
    if (has_arm && !row[arm].empty()) o.arm = row[arm];
    out.push_back(std::move(o));
  }
  return out;
}

std::map<std::string, double> parse_targets_csv(std::string_view csv_text) {
  const CsvTable t = parse_csv(csv_text);
  const auto seg = t.column("segment_id");
  const auto target = t.column("target_relevance");
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    out[t.rows[i][seg]] = parse_cell<double>(t.rows[i][target], t.line_numbers[i]);
  }
  return out;
}

std::string fit_to_json(const PowerLawFit& fit) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["alpha"] = fit.alpha;
  j["r_squared"] = fit.r_squared;
  j["z"] = ordered_json::object();
  for (const auto& [seg, z] : fit.z) j["z"][seg] = z;
  j["n_obs"] = fit.n_obs;
  j["dof"] = fit.dof;
  auto finite_or_null = [](double v) -> ordered_json {
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
  };
  j["alpha_std_error"] = finite_or_null(fit.alpha_std_error);
  j["alpha_ci95"] = {finite_or_null(fit.alpha_ci95_low), finite_or_null(fit.alpha_ci95_high)};
  j["alpha_in_unit_interval"] = fit.alpha_in_unit_interval();
  return j.dump(2) + "\n";
}

std::string required_weights_csv(const PowerLawFit& fit,
                                 const std::map<std::string, double>& targets,
                                 const std::map<std::string, double>& weights) {
  std::string out = "segment_id,z,target_relevance,required_weight\n";
  for (const auto& [seg, target] : targets) {
    out += seg + ',' + format_number(fit.z.at(seg)) + ',' + format_number(target) + ',' +
           format_number(weights.at(seg)) + '\n';
  }
  return out;
}

std::string dispersion_csv(const DispersionReport& r) {
  std::string out = "statistic,before,after,change\n";
  auto row = [&](const char* name, double a, double b) {
    out += std::string(name) + ',' + format_number(a) + ',' + format_number(b) + ',' +
           format_number(b - a) + '\n';
  };
  row("count", static_cast<double>(r.before.count), static_cast<double>(r.after.count));
  row("mean", r.before.mean, r.after.mean);
  row("median", r.before.median, r.after.median);
  row("q1", r.before.q1, r.after.q1);
  row("q3", r.before.q3, r.after.q3);
  row("iqr", r.before.iqr(), r.after.iqr());
  return out;
}

// --- dynamic optimization --------------------------------------------------

ModelDocument parse_model(std::string_view json_text) {
  const json doc = parse_json(json_text);
  constexpr const char* where = "model";
  check_keys(doc,
             {"schema_version", "states", "actions", "gain", "kernel", "discount", "episodes",
              "smoothing", "tolerance", "max_iters"},
             where);
  check_schema(doc);
  ModelDocument out;
  MdpModel& m = out.model;
  const json& states = doc.at("states");
  if (states.is_number_unsigned()) {
    for (std::size_t s = 0; s < states.get<std::size_t>(); ++s) m.states.push_back(std::to_string(s));
  } else {
    m.states = get_as<std::vector<std::string>>(doc, "states", where);
  }
  m.actions = get_as<std::vector<double>>(doc, "actions", where);
  m.gain = parse_matrix(doc, "gain");
  m.discount = get_as<double>(doc, "discount", where);
  if (doc.contains("kernel")) {
    out.has_kernel = true;
    try {
      for (const auto& table :
           doc.at("kernel").get<std::vector<std::vector<std::vector<double>>>>()) {
        m.kernel.push_back(Matrix::from_rows(table));
      }
    } catch (const json::exception& e) {
      throw ConfigError(std::string("kernel: expected states x actions x states numbers (") +
                        e.what() + ")");
    }
  }
  out.episodes_path = get_or<std::string>(doc, "episodes", "", where);
  out.smoothing = get_or<double>(doc, "smoothing", out.smoothing, where);
  out.tolerance = get_or<double>(doc, "tolerance", out.tolerance, where);
  out.max_iters = get_or<int>(doc, "max_iters", out.max_iters, where);
  if (!out.has_kernel && out.episodes_path.empty()) {
    throw ConfigError("model needs either a kernel or an episodes file");
  }
  try {
    out.has_kernel ? m.validate() : m.validate_skeleton();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid model: ") + e.what());
  }
  if (!(out.tolerance > 0.0)) throw ConfigError("tolerance must be > 0");
  if (out.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(out.smoothing >= 0.0)) throw ConfigError("smoothing must be >= 0");
  return out;
}

std::vector<Episode> parse_episodes_csv(std::string_view csv_text) {
  const CsvTable t = parse_csv(csv_text);
  const auto s = t.column("state");
  const auto a = t.column("action");
  const auto next = t.column("next_state");
  const bool has_episode = t.has("episode");
  const auto ep = has_episode ? t.column("episode") : 0;
  std::vector<Episode> out;
  std::string current;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string id = has_episode ? row[ep] : std::string();
    if (out.empty() || id != current) {
      out.emplace_back();
      current = id;
    }
    const auto line = t.line_numbers[i];
    out.back().push_back({parse_cell<std::size_t>(row[s], line),
                          parse_cell<std::size_t>(row[a], line),
                          parse_cell<std::size_t>(row[next], line)});
  }
  return out;
}

std::string plan_to_json(const MdpModel& model, const ValueIterationResult& result,
                         const KernelEstimate* estimate, double tolerance) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["converged"] = true;
  j["iterations"] = result.iterations;
  j["residual"] = result.residual;
  j["tolerance"] = tolerance;
  j["discount"] = model.discount;
  j["kernel_source"] = estimate ? "episodes" : "model";
  j["values"] = ordered_json::object();
  j["policy"] = ordered_json::array();
  for (std::size_t s = 0; s < model.state_count(); ++s) {
    j["values"][model.states[s]] = result.value.values[s];
    const std::size_t a = result.policy.action_of[s];
    ordered_json p;
    p["state"] = model.states[s];
    p["action_index"] = a;
    p["seeker_weight"] = model.actions[a];
    j["policy"].push_back(p);
  }
  if (estimate) {
    j["unvisited_pairs"] = estimate->unvisited_pairs;
    j["warnings"] = estimate->warnings;
  }
  return j.dump(2) + "\n";
}

}  // namespace posalloc::io
