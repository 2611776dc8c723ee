// Copyright 2026 The lastpass Authors
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
#include <string>
#include <vector>

#include <json.hpp>

#include "lastpass/report.hpp"

namespace lastpass {

struct RunConfig {
  double lambda = 1.0;
  double z = 1.0;
  std::uint64_t seed = 42;
  std::size_t n_paths = 100000;
  double dt = 1e-4;
  std::string out_dir = "out";
  std::vector<std::string> suite;  // empty: every check

  // Throws ConfigError naming the first bad field.
  void validate() const;
};

nlohmann::ordered_json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::ordered_json& j, RunConfig base = {});

// Every check name in suite order.
const std::vector<std::string>& check_names();
bool is_check(const std::string& name);

// Runs one check. Unknown names throw UsageError.
TestReport run_check(const std::string& name, const RunConfig& cfg);

struct SuiteEntry {
  TestReport report;
  double wall_seconds = 0.0;
};

struct SuiteReport {
  RunConfig config;
  std::vector<SuiteEntry> entries;
  Verdict overall = Verdict::Inconclusive;
};

// Empty suite list in cfg means all checks; an explicitly empty selection is
// rejected by the CLI before this point.
SuiteReport run_suite(const RunConfig& cfg, bool echo_progress = false);

nlohmann::ordered_json to_json(const SuiteReport& s, bool with_timing = true);
SuiteReport suite_from_json(const nlohmann::ordered_json& j);

// Writes via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& target, const std::string& bytes);

}  // namespace lastpass
