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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <vector>

#include <json.hpp>

#include "lastpass/analytic.hpp"
#include "lastpass/rng.hpp"
#include "lastpass/sampler.hpp"

using namespace lastpass;

namespace {

const ModelParams kUnit(1.0, 1.0);

struct Moments {
  double mean = 0, se = 0;
};

Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double v = 0;
  for (double a : x) v += (a - m) * (a - m);
  return {m, std::sqrt(v / (n - 1) / n)};
}

void check_invariants(const PathGrid& g, double z) {
  REQUIRE(g.size() >= 2);
  CHECK(g.times[0] == 0.0);
  CHECK(g.values[0] == 0.0);
  CHECK(std::is_sorted(g.times.begin(), g.times.end()));
  CHECK(std::adjacent_find(g.times.begin(), g.times.end()) == g.times.end());
  REQUIRE(g.absorbed_index.has_value());
  const std::size_t k = *g.absorbed_index;
  CHECK(g.times[k] == g.sigma);
  for (std::size_t i = k; i < g.size(); ++i) CHECK(g.values[i] == z);
}

// Last sign change of (w - z) on a uniform grid, interpolated linearly.
double last_crossing(const std::vector<double>& w, double dt, double z) {
  for (std::size_t i = w.size() - 1; i > 0; --i) {
    const double a = w[i - 1] - z, b = w[i] - z;
    if (a * b <= 0.0) return (static_cast<double>(i - 1) + (a == b ? 0.0 : a / (a - b))) * dt;
  }
  return 0.0;
}

}  // namespace

TEST_CASE("rng streams") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7), e(42, 7, 1);
  const double x = a.uniform();
  CHECK(x == b.uniform());
  CHECK(x != c.uniform());
  CHECK(x != d.uniform());
  CHECK(x != e.uniform());
  RngStream u(1, 2);
  for (int i = 0; i < 100000; ++i) {
    const double v = u.uniform();
    REQUIRE((v > 0.0 && v < 1.0));
  }
  CHECK(stream_hash("law-sigma") == stream_hash("law-sigma"));
  CHECK(stream_hash("law-sigma") != stream_hash("law-suptest"));
  CHECK(stream_hash("") == 0xcbf29ce484222325ULL);
}

TEST_CASE("sample_sigma") {
  RngStream a(42, 1), b(42, 1);
  for (int i = 0; i < 10; ++i) CHECK(sample_sigma(kUnit, a) == sample_sigma(kUnit, b));
  // The inverse-CDF step, with the uniform pinned.
  CHECK(sigma_cdf_inverse(kUnit, 0.33189799877682939) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("exact sampler invariants") {
  for (std::uint64_t i = 0; i < 50; ++i) {
    RngStream r(3, i);
    PathGrid g;
    sample_exact_path(kUnit, r, 1e-2, g);
    check_invariants(g, 1.0);
    CHECK(g.values.back() == 1.0);
    CHECK(g.value_at(g.sigma + 3.0, 1.0) == 1.0);
  }
  RngStream r(3, 99);
  PathGrid g;
  sample_exact_path(kUnit, r, 1e-2, g, 0.5);
  CHECK(g.times.back() >= 0.5);
  CHECK_NOTHROW(g.value_at(0.5, 1.0));
}

TEST_CASE("exact sampler marginal at t = 0.5 and t = 1") {
  // Oracle moments: quadrature of the transition density (mpmath).
  const double m1[2] = {0.43203679992751363, 0.66379599755365879};
  const double m2[2] = {0.55893549876963719, 0.87021744042030525};
  const double ts[2] = {0.5, 1.0};
  for (int k = 0; k < 2; ++k) {
    const double grid[2] = {0.0, ts[k]};
    std::vector<double> a, b;
    PathGrid g;
    for (std::uint64_t i = 0; i < 40000; ++i) {
      RngStream r(5, i);
      sample_exact_on(kUnit, r, sample_sigma(kUnit, r), grid, g);
      const double v = g.value_at(ts[k], 1.0);
      a.push_back(v - m1[k]);
      b.push_back(v * v - m2[k]);
    }
    CHECK(std::abs(moments(a).mean) <= 3 * moments(a).se);
    CHECK(std::abs(moments(b).mean) <= 3 * moments(b).se);
  }
}

TEST_CASE("quadratic variation over [0, sigma] is sigma") {
  double rel = 0.0;
  const int n = 200;
  PathGrid g;
  for (int i = 0; i < n; ++i) {
    RngStream r(9, i);
    sample_exact_path(kUnit, r, 1e-4, g);
    double qv = 0.0;
    for (std::size_t j = 1; j <= *g.absorbed_index; ++j) qv += std::pow(g.values[j] - g.values[j - 1], 2);
    rel += std::abs(qv / g.sigma - 1.0);
  }
  CHECK(rel / n <= 0.05);
}

TEST_CASE("refine_near and bridge_supremum") {
  RngStream r(4, 4), extra(4, 4, 1);
  PathGrid g, f;
  sample_exact_path(kUnit, r, 1e-2, g);
  refine_near(extra, 1.0, 0.3, 4, g, f);
  CHECK(f.size() > g.size());
  CHECK(f.sigma == g.sigma);
  check_invariants(f, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto it = std::lower_bound(f.times.begin(), f.times.end(), g.times[i]);
    REQUIRE(it != f.times.end());
    CHECK(*it == g.times[i]);
    CHECK(f.values[it - f.times.begin()] == g.values[i]);
  }
  RngStream s(4, 5);
  const double sup = bridge_supremum(g, s);
  CHECK(sup >= *std::max_element(g.values.begin(), g.values.end()));
}

TEST_CASE("brute-force sampler") {
  SamplerConfig c;
  c.dt = 1e-3;
  c.horizon = 3.0;
  RngStream r(1, 1);
  PathGrid g;
  CHECK_THROWS_AS(sample_bruteforce_path(kUnit, r, c, g), ConfigError);
  c.horizon = 0.0;
  c.tail_delta = 1e-4;
  CHECK(horizon_for(kUnit, 1e-4) == doctest::Approx(16.979600838).epsilon(1e-8));
  for (std::uint64_t i = 0; i < 40; ++i) {
    RngStream q(1, i);
    sample_bruteforce_path(kUnit, q, c, g);
    check_invariants(g, 1.0);
    if (!g.truncation_suspect) {
      // Last crossing found: everything after sigma sits at z and the step
      // before it straddles z.
      const std::size_t k = *g.absorbed_index;
      CHECK(g.values[k - 1] != 1.0);
    }
  }
}

TEST_CASE("last-crossing bias shrinks with dt on coupled noise") {
  // One fine Brownian path with drift, read at dt, 2 dt, 4 dt.
  const double fine = 2.5e-4, horizon = 12.0;
  std::mt19937_64 g(17);
  std::normal_distribution<double> nd;
  double err[3] = {0, 0, 0};
  const int paths = 200;
  for (int p = 0; p < paths; ++p) {
    const auto n = static_cast<std::size_t>(horizon / fine);
    std::vector<double> w(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) w[i] = w[i - 1] + fine + std::sqrt(fine) * nd(g);
    const double ref = last_crossing(w, fine, 1.0);
    for (int k = 0; k < 3; ++k) {
      const std::size_t step = std::size_t{2} << k;
      std::vector<double> c;
      for (std::size_t i = 0; i <= n; i += step) c.push_back(w[i]);
      err[k] += std::abs(last_crossing(c, fine * static_cast<double>(step), 1.0) - ref);
    }
  }
  CHECK(err[0] < err[1]);
  CHECK(err[1] < err[2]);
}

TEST_CASE("killed bang-bang sampler") {
  SamplerConfig c;
  c.dt = 1e-3;
  CHECK(c.epsilon() == doctest::Approx(2 * std::sqrt(1e-3)));
  std::vector<double> below, above;
  PathGrid g;
  for (std::uint64_t i = 0; i < 300; ++i) {
    RngStream r(2, i);
    sample_killed_bangbang_path(kUnit, r, c, g);
    check_invariants(g, 1.0);
    for (std::size_t j = 1; j < *g.absorbed_index; ++j) {
      const double d = (g.values[j] - g.values[j - 1]) / c.dt;
      if (g.values[j - 1] < 1.0) below.push_back(d);
      if (g.values[j - 1] > 1.0) above.push_back(d);
    }
  }
  // Drift +lambda below z, -lambda above.
  for (auto& x : below) x -= 1.0;
  for (auto& x : above) x += 1.0;
  CHECK(std::abs(moments(below).mean) <= 3 * moments(below).se);
  CHECK(std::abs(moments(above).mean) <= 3 * moments(above).se);
}

TEST_CASE("batches are partition independent") {
  SamplerConfig c;
  c.dt = 1e-2;
  for (Method m : {Method::Exact, Method::BruteForce, Method::BangBang}) {
    const auto ten = path_batch(kUnit, 42, 1000, c, 10, m);
    const auto lo = path_batch(kUnit, 42, 1000, c, 5, m);
    const auto hi = path_batch(kUnit, 42, 1005, c, 5, m);
    for (int i = 0; i < 5; ++i) {
      CHECK(ten[i].values == lo[i].values);
      CHECK(ten[5 + i].values == hi[i].values);
    }
    PathGrid one;
    sample_path(kUnit, 42, 1000, c, m, one);
    CHECK(one.values == ten[0].values);
    CHECK(one.sigma == ten[0].sigma);
  }
  CHECK(parse_method("bangbang") == Method::BangBang);
  CHECK_THROWS_AS(parse_method("euler"), UsageError);
}

TEST_CASE("path csv and sidecar") {
  const auto dir = std::filesystem::temp_directory_path() / "lastpass_sampler_test";
  std::filesystem::create_directories(dir);
  PathGrid g;
  RngStream r(42, 3);
  sample_exact_path(kUnit, r, 0.05, g);
  write_path_csv(dir / "p.csv", g, {1.0, 1.0, 0.05, Method::Exact, 42, 3});
  std::ifstream csv(dir / "p.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,value");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == g.size());
  std::ifstream js(dir / "p.json");
  const auto j = nlohmann::json::parse(js);
  for (const char* k : {"sigma", "lambda", "z", "dt", "method", "seed", "stream_id"}) CHECK(j.contains(k));
  CHECK(j["sigma"].get<double>() == g.sigma);
  CHECK(j["method"] == "exact");
  std::filesystem::remove_all(dir);
}
