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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace posalloc::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 2;    // bad flags, unreadable or invalid config
inline constexpr int kRuntimeError = 3;  // solver or data failure

enum class Verbosity { kQuiet, kNormal, kVerbose };

struct CommandSpec {
  std::string subcommand;
  std::filesystem::path config;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  Verbosity verbosity = Verbosity::kNormal;
  bool per_seeker = false;                 // simulate
  std::optional<unsigned> threads;         // simulate
  std::optional<std::filesystem::path> targets;  // calibrate
};

int cmd_simulate(const CommandSpec& spec, std::ostream& out, std::ostream& err);
int cmd_allocate(const CommandSpec& spec, std::ostream& out, std::ostream& err);
int cmd_calibrate(const CommandSpec& spec, std::ostream& out, std::ostream& err);
int cmd_optimize_weights(const CommandSpec& spec, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace posalloc::cli
