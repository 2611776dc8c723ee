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

#include "lastpass/report.hpp"

#include <stdexcept>

namespace lastpass {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

nlohmann::ordered_json to_json(const TestReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["statistic"] = r.statistic;
  j["p_value_or_error"] = r.p_value_or_error;
  j["n"] = r.n;
  j["verdict"] = to_string(r.verdict);
  j["metadata"] = r.metadata;
  return j;
}

TestReport report_from_json(const nlohmann::ordered_json& j) {
  TestReport r;
  r.name = j.at("name").get<std::string>();
  r.statistic = j.at("statistic").get<double>();
  r.p_value_or_error = j.at("p_value_or_error").get<double>();
  r.n = j.at("n").get<long long>();
  const auto v = j.at("verdict").get<std::string>();
  if (v == "PASS") r.verdict = Verdict::Pass;
  else if (v == "FAIL") r.verdict = Verdict::Fail;
  else if (v == "INCONCLUSIVE") r.verdict = Verdict::Inconclusive;
  else throw std::invalid_argument("unknown verdict " + v);
  r.metadata = j.at("metadata");
  return r;
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Pass: return 0;
    case Verdict::Fail: return 1;
    case Verdict::Inconclusive: return 3;
  }
  return 3;
}

}  // namespace lastpass
