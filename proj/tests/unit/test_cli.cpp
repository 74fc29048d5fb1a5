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

#include <doctest.h>

#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "posalloc/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using posalloc::cli::kOk;
using posalloc::cli::kRuntimeError;
using posalloc::cli::kUsageError;

namespace {

const fs::path kFixtures = POSALLOC_FIXTURE_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "posalloc");
  std::ostringstream out, err;
  const int code = posalloc::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("posalloc_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

json read_json(const fs::path& p) { return json::parse(posalloc::io::read_file(p)); }

}  // namespace

TEST_CASE("usage errors") {
  CHECK(invoke({}).code == kUsageError);
  CHECK(invoke({"frobnicate"}).code == kUsageError);
  CHECK(invoke({"simulate"}).code == kUsageError);
  CHECK(invoke({"simulate", "--config", "x", "--quiet", "--verbose"}).code == kUsageError);
  CHECK(invoke({"--help"}).code == kOk);
  const auto missing = invoke({"allocate", "--config", (kFixtures / "nope.json").string()});
  CHECK(missing.code == kUsageError);
  CHECK(missing.err.find("cannot open") != std::string::npos);
}

TEST_CASE("simulate") {
  const auto dir = scratch("simulate");
  const auto cfg = (kFixtures / "simulation_small.json").string();
  const auto r = invoke({"simulate", "--config", cfg, "--out", dir.string(), "--per-seeker",
                         "--quiet"});
  REQUIRE(r.code == kOk);
  CHECK(r.out.empty());
  const auto summary = posalloc::io::read_file(dir / "summary.csv");
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 1 + 3);
  CHECK(fs::exists(dir / "per_seeker.csv"));
  const auto manifest = read_json(dir / "manifest.json");
  CHECK(manifest.at("seed") == 12345);
  CHECK(manifest.at("resolved_config").at("seeker_count") == 300);

  SUBCASE("rerun is byte-identical, seed override changes output") {
    const auto dir2 = scratch("simulate2");
    REQUIRE(invoke({"simulate", "--config", cfg, "--out", dir2.string(), "--quiet",
                    "--threads", "3"})
                .code == kOk);
    CHECK(posalloc::io::read_file(dir2 / "summary.csv") == summary);
    CHECK_FALSE(fs::exists(dir2 / "per_seeker.csv"));

    const auto dir3 = scratch("simulate3");
    REQUIRE(invoke({"simulate", "--config", cfg, "--out", dir3.string(), "--quiet", "--seed",
                    "99"})
                .code == kOk);
    CHECK(posalloc::io::read_file(dir3 / "summary.csv") != summary);
    CHECK(read_json(dir3 / "manifest.json").at("seed") == 99);
    fs::remove_all(dir2);
    fs::remove_all(dir3);
  }

  SUBCASE("per-seeker rows reproduce the summary means") {
    std::istringstream rows(posalloc::io::read_file(dir / "per_seeker.csv"));
    std::string line;
    std::getline(rows, line);
    std::map<std::string, std::vector<double>> rev;
    while (std::getline(rows, line)) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      rev[cells[1] + cells[2]].push_back(std::stod(cells[3]));
    }
    auto mean = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    std::istringstream sum(summary);
    std::getline(sum, line);
    std::getline(sum, line);  // n = 2
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    CHECK(mean(rev["2gfp"]) == std::stod(cells[1]));
    CHECK(mean(rev["2vcg"]) == std::stod(cells[2]));
  }

  SUBCASE("malformed JSON: exit 2, nothing written") {
    const auto bad = scratch("simulate_bad");
    const auto rb = invoke({"simulate", "--config",
                            (kFixtures / "simulation_malformed.json").string(), "--out",
                            bad.string()});
    CHECK(rb.code == kUsageError);
    CHECK(rb.err.find("malformed JSON") != std::string::npos);
    CHECK_FALSE(fs::exists(bad));
  }
  fs::remove_all(dir);
}

TEST_CASE("allocate") {
  const auto dir = scratch("allocate");
  SUBCASE("example 1") {
    const auto r = invoke({"allocate", "--config", (kFixtures / "example1_instance.json").string(),
                           "--out", dir.string()});
    REQUIRE(r.code == kOk);
    const auto j = json::parse(r.out);
    CHECK(j.at("vcg").at("total_score") == 3.0);
    CHECK(j == read_json(dir / "allocation.json"));
    CHECK(fs::exists(dir / "manifest.json"));
  }
  SUBCASE("n = 1: mechanisms coincide") {
    const auto r = invoke({"allocate", "--config", (kFixtures / "single_instance.json").string(),
                           "--out", dir.string(), "--quiet"});
    REQUIRE(r.code == kOk);
    const auto j = read_json(dir / "allocation.json");
    CHECK(j.at("gfp") == j.at("vcg"));
  }
  SUBCASE("random 5x5: VCG dominates and matches an external solver") {
    const auto r = invoke({"allocate", "--config", (kFixtures / "random5_instance.json").string(),
                           "--out", dir.string()});
    REQUIRE(r.code == kOk);
    const auto j = json::parse(r.out);
    const double vcg = j.at("vcg").at("total_score").get<double>();
    CHECK(vcg >= j.at("gfp").at("total_score").get<double>());
    CHECK(vcg == doctest::Approx(8.20872965).epsilon(1e-9));
  }
  SUBCASE("non-square: exit 2 with a dimension message") {
    const auto r = invoke({"allocate", "--config",
                           (kFixtures / "nonsquare_instance.json").string(), "--out",
                           dir.string()});
    CHECK(r.code == kUsageError);
    CHECK(r.err.find("square") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "allocation.json"));
  }
  fs::remove_all(dir);
}

TEST_CASE("calibrate") {
  const auto dir = scratch("calibrate");
  SUBCASE("noiseless alpha = 0.5 with targets") {
    const auto r = invoke({"calibrate", "--config",
                           (kFixtures / "calibration_noiseless.csv").string(), "--targets",
                           (kFixtures / "calibration_targets.csv").string(), "--out",
                           dir.string()});
    REQUIRE(r.code == kOk);
    const auto fit = read_json(dir / "fit.json");
    CHECK(std::abs(fit.at("alpha").get<double>() - 0.5) <= 1e-9);
    CHECK(fit.at("z").at("power").get<double>() == doctest::Approx(5.0));
    const auto weights = posalloc::io::read_file(dir / "required_weights.csv");
    CHECK(weights.rfind("segment_id,z,target_relevance,required_weight\n", 0) == 0);
    // active: z = 2, target 3 -> (3/2)^2
    CHECK(weights.find("active,2") != std::string::npos);
    CHECK(fs::exists(dir / "dispersion.csv"));
  }
  SUBCASE("constant relevance: alpha 0 with a warning") {
    const auto r = invoke({"calibrate", "--config",
                           (kFixtures / "calibration_constant.csv").string(), "--out",
                           dir.string()});
    REQUIRE(r.code == kOk);
    CHECK(read_json(dir / "fit.json").at("alpha") == 0.0);
    CHECK(r.err.find("warning") != std::string::npos);
  }
  SUBCASE("single weight: exit 3") {
    const auto r = invoke({"calibrate", "--config",
                           (kFixtures / "calibration_single_weight.csv").string(), "--out",
                           dir.string()});
    CHECK(r.code == kRuntimeError);
    CHECK(r.err.find("unidentifiable") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "fit.json"));
  }
  fs::remove_all(dir);
}

TEST_CASE("optimize-weights") {
  const auto dir = scratch("optimize");
  SUBCASE("geometric fixture") {
    const auto r = invoke({"optimize-weights", "--config",
                           (kFixtures / "mdp_geometric.json").string(), "--out", dir.string()});
    REQUIRE(r.code == kOk);
    const auto j = read_json(dir / "policy.json");
    CHECK(std::abs(j.at("values").at("only").get<double>() - 2.0) <= 1e-8);
    CHECK(j.at("iterations").get<int>() > 0);
    CHECK(j.contains("residual"));
  }
  SUBCASE("tiny model matches the enumeration golden file") {
    const auto r = invoke({"optimize-weights", "--config",
                           (kFixtures / "mdp_tiny.json").string(), "--out", dir.string(),
                           "--quiet"});
    REQUIRE(r.code == kOk);
    const auto j = read_json(dir / "policy.json");
    const auto golden = read_json(kFixtures / "mdp_tiny_policy.golden.json");
    std::vector<std::size_t> policy;
    for (const auto& p : j.at("policy")) policy.push_back(p.at("action_index"));
    CHECK(policy == golden.at("policy").get<std::vector<std::size_t>>());
    std::size_t s = 0;
    for (const auto& [label, v] : j.at("values").items()) {
      CHECK(v.get<double>() == doctest::Approx(golden.at("values").at(s++).get<double>()).epsilon(1e-7));
    }
  }
  SUBCASE("discount 1: exit 2") {
    const auto r = invoke({"optimize-weights", "--config",
                           (kFixtures / "mdp_delta_one.json").string(), "--out", dir.string()});
    CHECK(r.code == kUsageError);
    CHECK(r.err.find("discount") != std::string::npos);
  }
  SUBCASE("learned kernel from episodes") {
    const auto r = invoke({"optimize-weights", "--config",
                           (kFixtures / "mdp_learned.json").string(), "--out", dir.string()});
    REQUIRE(r.code == kOk);
    const auto j = read_json(dir / "policy.json");
    CHECK(j.at("kernel_source") == "episodes");
    CHECK(j.at("unvisited_pairs") == 0);
  }
  SUBCASE("non-convergence: exit 3 with residual") {
    fs::create_directories(dir);
    const auto cfg = dir / "slow.json";
    posalloc::io::write_file_atomic(
        cfg, R"({"states": 1, "actions": [1], "gain": [[1]], "kernel": [[[1]]],
                 "discount": 0.99, "max_iters": 5})");
    const auto r = invoke({"optimize-weights", "--config", cfg.string(), "--out",
                           (dir / "o").string()});
    CHECK(r.code == kRuntimeError);
    CHECK(r.err.find("residual=") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "o" / "policy.json"));
  }
  fs::remove_all(dir);
}
