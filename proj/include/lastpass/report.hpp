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

#include <string>
#include <vector>

#include <json.hpp>

namespace lastpass {

enum class Verdict { Pass, Fail, Inconclusive };

const char* to_string(Verdict v);

struct TestReport {
  std::string name;
  double statistic = 0.0;
  double p_value_or_error = 0.0;
  long long n = 0;
  Verdict verdict = Verdict::Inconclusive;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

nlohmann::ordered_json to_json(const TestReport& r);
TestReport report_from_json(const nlohmann::ordered_json& j);

// Exit code convention shared by every command.
int exit_code(Verdict v);

}  // namespace lastpass
