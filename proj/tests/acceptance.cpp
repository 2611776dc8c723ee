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

// Runs `lastpass suite` at the default configuration twice and prints one
// PASS/FAIL line per acceptance criterion.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Run {
  int exit_code = -1;
  double seconds = 0.0;
  std::string bytes;
  json report;
};

Run run_suite(const fs::path& out) {
  fs::remove_all(out);
  const std::string cmd = std::string(LASTPASS_BIN) + " suite --out " + out.string();
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = std::system(cmd.c_str());
  Run r;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::ifstream f(out / "suite.json", std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  r.bytes = s.str();
  if (!r.bytes.empty()) r.report = json::parse(r.bytes);
  return r;
}

std::string without_timing(json j) {
  for (auto& c : j["checks"]) c.erase("wall_seconds");
  return j.dump(2);
}

int failures = 0;

void line(int id, bool ok, const std::string& what) {
  std::printf("criterion %2d  %s  %s\n", id, ok ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  failures += !ok;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "lastpass_acceptance";
  std::printf("running suite (default config) ...\n");
  std::fflush(stdout);
  const Run first = run_suite(root / "run1");
  if (first.report.is_null()) {
    std::printf("suite produced no report (exit %d)\n", first.exit_code);
    return 1;
  }
  std::map<std::string, json> by;
  for (const auto& c : first.report["checks"]) by[c["name"].get<std::string>()] = c;
  auto pass = [&](const std::string& n) { return by.count(n) && by[n]["verdict"] == "PASS"; };
  auto wall = [&](const std::string& n) { return by.count(n) ? by[n]["wall_seconds"].get<double>() : 1e9; };
  auto md = [&](const std::string& n) { return by.count(n) ? by[n]["metadata"] : json::object(); };
  auto stat = [&](const std::string& n) { return by.count(n) ? by[n]["statistic"].get<double>() : 0.0; };
  auto pv = [&](const std::string& n) { return by.count(n) ? by[n]["p_value_or_error"].get<double>() : 0.0; };

  line(1, pass("law-sigma") && pv("law-sigma") > 0.01 && wall("law-sigma") <= 10.0,
       fmt("sigma law, exact sampler n=1e5: D=%.5f p=%.4f (> 0.01), %.1f s (<= 10 s)", stat("law-sigma"),
           pv("law-sigma"), wall("law-sigma")));
  for (auto [id, name] : {std::pair{2, "oracle-bruteforce"}, std::pair{3, "oracle-bangbang"}}) {
    const auto m = md(name);
    line(id, pass(name) && stat(name) <= m.value("allowance", 0.0) && wall(name) <= 300.0,
         std::string(id == 2 ? "brute-force" : "killed bang-bang") +
             fmt(" sigma vs law, n=2e4: D=%.5f <= %.5f, %.1f s (<= 300 s)", stat(name), m.value("allowance", 0.0),
                 wall(name)));
  }
  {
    const auto m = md("law-localtime");
    line(4, pass("law-localtime") && pv("law-localtime") > 0.01 && m.value("mean_rel_error", 1.0) <= 0.02,
         fmt("local time at sigma vs Exp(lambda): D=%.5f p=%.4f, mean %.4f (within 2%% of %.4f)",
             stat("law-localtime"), pv("law-localtime"), m.value("mean", 0.0), 1.0));
  }
  {
    const auto m = md("law-suptest");
    line(5, pass("law-suptest") && pv("law-suptest") > 0.01 && std::abs(m.value("mean_z", 9.0)) <= 3.0,
         fmt("path supremum: D=%.5f p=%.4f, mean excess %.5f (z=%.2f)", stat("law-suptest"), pv("law-suptest"),
             m.value("mean_excess", 0.0), m.value("mean_z", 0.0)));
  }
  {
    std::string detail;
    const auto m = md("mean-sigma");
    for (const auto& r : m["pairs"]) {
      detail += fmt(" (%.0f, %.1f): %.4f vs %.4f,", r["lambda"].get<double>(), r["z"].get<double>(),
                    r["mean"].get<double>(), r["target"].get<double>()) +
                fmt(" z=%.2f;", r["zscore"].get<double>());
    }
    line(6, pass("mean-sigma"), "E[sigma] = 1/lambda^2 + z/lambda:" + detail);
  }
  line(7, pass("martingale-b") && pass("compensator") && pass("martingale-N"),
       fmt("martingales: b max|z|=%.2f, compensator max|z|=%.2f, N max|z|=%.2f", stat("martingale-b"),
           stat("compensator"), stat("martingale-N")));
  {
    const auto m = md("nonmartingale");
    line(8, pass("nonmartingale"),
         fmt("E[B_(1^sigma)] = %.5f: z vs 0 = %.1f (|z| > 3), z vs formula %.5f = %.2f (|z| < 3)",
             m.value("mc_mean", 0.0), m.value("z_vs_zero", 0.0), m.value("formula", 0.0),
             m.value("z_vs_formula", 0.0)));
  }
  line(9, pass("nonfeller") && pv("nonfeller") <= 1e-8 && stat("nonfeller") > 0.0,
       fmt("non-Feller limit %.10f: |limit - formula| = %.1e (<= 1e-8), gap %.6f > 0", md("nonfeller").value("limit_above", 0.0),
           pv("nonfeller"), stat("nonfeller")));
  {
    const auto m = md("strong-markov");
    line(10, pass("strong-markov"),
         fmt("strong Markov witness p=%.5f se=%.5f: p - 3se > 0, p + 3se >= bound %.4f", stat("strong-markov"),
             pv("strong-markov"), m.value("bound", 0.0)));
  }
  {
    const auto m = md("semigroup");
    line(11, pass("semigroup"),
         fmt("semigroup: CK residual %.1e (<= 1e-6), |Q_t h - h| at t=1e-4 %.1e, |Q_1 h| far %.1e (<= 1e-6)",
             m.value("chapman_kolmogorov_max", 1.0), m["strong_continuity"].back()["sup_diff"].get<double>(),
             m.value("vanishing_at_infinity", 1.0)));
  }
  line(12, pass("generator"),
       fmt("generator slope %.3f (>= 0.8), domain-violating control slope %.3f -> FAIL", stat("generator"),
           md("generator")["domain_violating_control"]["statistic"].get<double>()));
  {
    const auto m = md("pde");
    line(13, pass("pde"),
         fmt("PDE: sup error %.2e (<= 5e-3), order %.2f global (>= 1), %.2f away from z (>= 1.8)", stat("pde"),
             m.value("order_global", 0.0), m.value("order_away", 0.0)) +
             fmt(", interior residual %.1e (<= 1e-4)", m["interior_residual"]["statistic"].get<double>()));
  }
  line(14, pass("integrals") && stat("integrals") <= 1e-8 && wall("integrals") <= 10.0,
       fmt("closed forms vs quadrature: max error %.1e (<= 1e-8), %.2f s (<= 10 s)", stat("integrals"),
           wall("integrals")));

  std::printf("rerunning suite for byte comparison ...\n");
  std::fflush(stdout);
  const Run second = run_suite(root / "run1");
  const bool identical = !second.bytes.empty() && without_timing(first.report) == without_timing(second.report);
  const std::string overall = first.report["overall"].get<std::string>();
  line(15, first.exit_code == 0 && overall == "PASS" && first.seconds <= 1200.0 && identical,
       "suite overall " + overall + fmt(" in %.0f s (<= 1200 s), exit %.0f; rerun identical apart from wall-clock: ",
                                        first.seconds, first.exit_code) +
           (identical ? "yes" : "no"));
  std::printf("%d of 15 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
