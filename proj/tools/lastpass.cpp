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

// lastpass: sample, verify and run the full check suite.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lastpass/checks.hpp"
#include "lastpass/kernels.hpp"
#include "lastpass/params.hpp"
#include "lastpass/pde.hpp"
#include "lastpass/rng.hpp"
#include "lastpass/sampler.hpp"

namespace fs = std::filesystem;
using lastpass::ConfigError;
using lastpass::RunConfig;
using lastpass::UsageError;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 2;

struct Flags {
  double lambda = 0, z = 0, dt = 0;
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  std::string out, config, method = "exact", check;
  std::vector<std::string> checks;
  double t_end = 0.5, y_min = -7.0, y_max = 9.0;
  int n_y = 1601;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--lambda", f.lambda, "drift, > 0");
  sub->add_option("--z", f.z, "level, > 0");
  sub->add_option("--seed", f.seed, "64-bit seed");
  sub->add_option("--paths", f.paths, "number of paths");
  sub->add_option("--dt", f.dt, "time step");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--config", f.config, "JSON config file; flags override it");
}

RunConfig resolve(const CLI::App* sub, const Flags& f) {
  RunConfig c;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("cannot read config " + f.config);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("suite") && j["suite"].is_array() && j["suite"].empty()) {
      throw ConfigError("suite list is empty");
    }
    c = lastpass::run_config_from_json(j, c);
  }
  if (sub->count("--lambda")) c.lambda = f.lambda;
  if (sub->count("--z")) c.z = f.z;
  if (sub->count("--seed")) c.seed = f.seed;
  if (sub->count("--paths")) c.n_paths = f.paths;
  if (sub->count("--dt")) c.dt = f.dt;
  if (sub->count("--out")) c.out_dir = f.out;
  c.validate();
  return c;
}

// Files land in a staging directory inside out_dir and are renamed into
// place only once every one of them has been written.
class Staging {
 public:
  explicit Staging(const fs::path& out) : out_(out) {
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec || !fs::is_directory(out_)) throw ConfigError("cannot create out dir " + out_.string());
    dir_ = out_ / (".staging-" + std::to_string(::getpid()));
    fs::remove_all(dir_, ec);
    if (!fs::create_directory(dir_, ec) || ec) {
      throw ConfigError("out dir is not writable: " + out_.string());
    }
  }
  ~Staging() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  fs::path path(const std::string& name) const { return dir_ / name; }
  void commit() {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir_)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) fs::rename(f, out_ / f.filename());
  }

 private:
  fs::path out_, dir_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_sample(const RunConfig& c, const std::string& method_name) {
  const auto method = lastpass::parse_method(method_name);
  const lastpass::ModelParams p(c.lambda, c.z);
  lastpass::SamplerConfig sc;
  sc.dt = c.dt;
  Staging st(c.out_dir);
  const auto base = lastpass::stream_hash("sample");
  lastpass::PathGrid g;
  char name[64];
  for (std::size_t i = 0; i < c.n_paths; ++i) {
    lastpass::sample_path(p, c.seed, base + i, sc, method, g);
    std::snprintf(name, sizeof name, "path_%06zu.csv", i);
    lastpass::write_path_csv(st.path(name), g, {c.lambda, c.z, c.dt, method, c.seed, base + i});
  }
  st.commit();
  return 0;
}

int cmd_verify(const RunConfig& c, const std::string& check) {
  if (!lastpass::is_check(check)) {
    std::string all;
    for (const auto& n : lastpass::check_names()) all += "  " + n + "\n";
    std::cerr << "lastpass: unknown check '" << check << "'; valid names:\n" << all;
    return kExitUsage;
  }
  Staging st(c.out_dir);
  const auto r = lastpass::run_check(check, c);
  lastpass::write_file_atomic(st.path(check + ".json"), dump(lastpass::to_json(r)));
  st.commit();
  std::cout << check << ": " << lastpass::to_string(r.verdict) << "\n";
  return lastpass::exit_code(r.verdict);
}

int cmd_suite(RunConfig c, const std::vector<std::string>& only) {
  if (!only.empty()) c.suite = only;
  c.validate();
  Staging st(c.out_dir);
  const auto s = lastpass::run_suite(c, true);
  lastpass::write_file_atomic(st.path("suite.json"), dump(lastpass::to_json(s)));
  st.commit();
  std::cout << "overall: " << lastpass::to_string(s.overall) << "\n";
  return lastpass::exit_code(s.overall);
}

int cmd_pde(const RunConfig& c, const Flags& f) {
  const lastpass::ModelParams p(c.lambda, c.z);
  const auto h = lastpass::canonical_h(p);
  const lastpass::Grid1D grid(p, f.y_min, f.y_max, f.n_y);
  lastpass::SchemeConfig scheme;
  const auto u = lastpass::solve_kbe(p, h, f.t_end, grid, scheme);
  const double limit = 0.9 * lastpass::stability_limit(p, grid.dy, scheme);
  const double dt_pde = f.t_end / std::ceil(f.t_end / limit);
  Staging st(c.out_dir);
  lastpass::write_grid_csv(st.path("grid.csv"), grid, u, {f.t_end, c.lambda, c.z, grid.dy, dt_pde, scheme});
  st.commit();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drifted Brownian motion stopped at its last passage time: sampling and checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lastpass 0.1");
  app.add_flag_callback("--list-checks", [] {
    for (const auto& n : lastpass::check_names()) std::cout << n << "\n";
    throw CLI::Success();
  }, "print check names in suite order");
  Flags f;

  auto* sample = app.add_subcommand("sample", "write sampled paths as CSV with JSON sidecars");
  add_common(sample, f);
  sample->add_option("--method", f.method, "exact | bruteforce | bangbang");

  auto* verify = app.add_subcommand("verify", "run one check and write <check>.json");
  add_common(verify, f);
  verify->add_option("--check", f.check, "check name")->required();

  auto* suite = app.add_subcommand("suite", "run the checks in order and write suite.json");
  add_common(suite, f);
  suite->add_option("--check", f.checks, "restrict to these checks (repeatable)");

  auto* pde = app.add_subcommand("pde", "solve the backward equation for the canonical h, write grid.csv");
  add_common(pde, f);
  pde->add_option("--t-end", f.t_end, "final time");
  pde->add_option("--y-min", f.y_min, "left edge");
  pde->add_option("--y-max", f.y_max, "right edge");
  pde->add_option("--n-y", f.n_y, "grid nodes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*sample) return cmd_sample(resolve(sample, f), f.method);
    if (*verify) return cmd_verify(resolve(verify, f), f.check);
    if (*suite) return cmd_suite(resolve(suite, f), f.checks);
    if (*pde) return cmd_pde(resolve(pde, f), f);
  } catch (const UsageError& e) {
    std::cerr << "lastpass: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "lastpass: " << e.what() << "\n";
    return kExitUsage;
  } catch (const lastpass::DomainError& e) {
    std::cerr << "lastpass: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "lastpass: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
