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

// Kolmogorov tail values: mpmath series at 30 digits.

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lastpass/estimators.hpp"
#include "lastpass/rng.hpp"
#include "lastpass/sampler.hpp"

using namespace lastpass;

namespace {

const ModelParams kUnit(1.0, 1.0);

PathGrid linear(std::vector<double> t, std::vector<double> v, double sigma) {
  PathGrid g;
  g.times = std::move(t);
  g.values = std::move(v);
  g.sigma = sigma;
  return g;
}

auto uniform_cdf = [](double x) { return x <= 0 ? 0.0 : x >= 1 ? 1.0 : x; };

}  // namespace

TEST_CASE("ecdf") {
  const Ecdf one({1.0});
  CHECK(one(0.5) == 0.0);
  CHECK(one(1.0) == 1.0);
  const Ecdf three = ecdf({3.0, 1.0, 2.0});
  CHECK(three(2.0) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(Ecdf({}), UsageError);
}

TEST_CASE("kolmogorov distribution") {
  CHECK(kolmogorov_sf(0.5) == doctest::Approx(0.96394524366487509).epsilon(1e-13));
  CHECK(kolmogorov_sf(1.0) == doctest::Approx(0.26999967167735452).epsilon(1e-13));
  CHECK(kolmogorov_sf(1.5) == doctest::Approx(0.022217962616525129).epsilon(1e-13));
  CHECK(kolmogorov_sf(2.0) == doctest::Approx(0.00067092525577969535).epsilon(1e-12));
  CHECK(ks_critical(100000) == doctest::Approx(0.0051469977858689535).epsilon(1e-10));
}

TEST_CASE("ks_test") {
  const auto r = ks_test(Ecdf({0.25, 0.5, 0.75}), uniform_cdf);
  CHECK(r.statistic == doctest::Approx(0.25).epsilon(1e-15));
  const auto flat = ks_test(Ecdf(std::vector<double>(50, 0.3)), uniform_cdf);
  CHECK(flat.statistic >= 0.5);
  CHECK(flat.verdict == Verdict::Fail);
  CHECK(flat.metadata["alpha"] == kKsAlpha);

  // Same D after a strictly monotone map applied to both sides.
  std::mt19937_64 g(3);
  std::exponential_distribution<double> ex(1.7);
  std::vector<double> x(2000), u(2000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = ex(g);
    u[i] = -std::expm1(-1.7 * x[i]);
  }
  const double dx = ks_distance(Ecdf(x), [](double y) { return y <= 0 ? 0.0 : -std::expm1(-1.7 * y); });
  const double du = ks_distance(Ecdf(u), uniform_cdf);
  CHECK(dx == doctest::Approx(du).epsilon(1e-12));
}

TEST_CASE("ks_test calibration") {
  int pass = 0;
  std::vector<double> s(100000);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RngStream r(seed, 0);
    for (auto& v : s) v = r.uniform();
    pass += ks_test(Ecdf(s), uniform_cdf).verdict == Verdict::Pass;
  }
  CHECK(pass >= 98);
}

TEST_CASE("local_time_estimate") {
  const auto up = linear({0.0, 2.0}, {0.0, 2.0}, 5.0);
  CHECK(local_time_estimate(up, 1.0, 0.1) == doctest::Approx(1.0).epsilon(1e-14));
  const auto high = linear({0.0, 1.0, 2.0}, {1.5, 1.2, 1.9}, 5.0);
  CHECK(local_time_estimate(high, 1.0, 0.1) == 0.0);
  // Windows add up.
  const auto zig = linear({0.0, 0.3, 0.7, 1.0, 1.6}, {0.8, 1.05, 0.97, 1.2, 0.9}, 9.0);
  const double whole = local_time_estimate(zig, 1.0, 0.1);
  const double parts = local_time_estimate(zig, 1.0, 0.1, 0.0, 0.5) + local_time_estimate(zig, 1.0, 0.1, 0.5, 1.6);
  CHECK(whole == doctest::Approx(parts).epsilon(1e-14));
  // Inserting nodes on the segments changes nothing.
  const auto fine = linear({0.0, 0.15, 0.3, 0.5, 0.7, 1.0, 1.3, 1.6},
                           {0.8, 0.925, 1.05, 1.01, 0.97, 1.2, 1.05, 0.9}, 9.0);
  CHECK(local_time_estimate(fine, 1.0, 0.1) == doctest::Approx(whole).epsilon(1e-14));
  // Stops at sigma.
  CHECK(local_time_estimate(up, 1.0, 0.1, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
  const auto cut = linear({0.0, 2.0}, {0.0, 2.0}, 1.0);
  CHECK(local_time_estimate(cut, 1.0, 0.1) == doctest::Approx(0.5).epsilon(1e-14));

  const auto y = local_time_ladder(zig, 1.0, 0.025);
  CHECK(y[0] == doctest::Approx(local_time_estimate(zig, 1.0, 0.1)).epsilon(1e-14));
  CHECK(y[2] == doctest::Approx(local_time_estimate(zig, 1.0, 0.025)).epsilon(1e-14));
  CHECK(extrapolate_ladder({3.0 + 0.5 * 4, 3.0 + 0.5 * 2, 3.0 + 0.5}) == doctest::Approx(3.0).epsilon(1e-15));
  const auto q = extrapolate_quantiles({6.0, 2.0}, {4.0, 1.5}, {3.0, 1.25});
  CHECK(q[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(q[1] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("quad_var_estimate") {
  CHECK(quad_var_estimate(linear({0, 1, 2}, {0.3, 0.3, 0.3}, 9.0), 2.0) == 0.0);
  CHECK(quad_var_estimate(linear({0, 1, 2}, {0.0, 0.1, -0.1}, 9.0), 2.0) == doctest::Approx(0.05).epsilon(1e-14));
}

TEST_CASE("martingale_ztest") {
  const std::vector<double> zero(100, 0.0);
  const auto z0 = martingale_ztest(zero);
  CHECK(z0.statistic == 0.0);
  CHECK(z0.verdict == Verdict::Pass);
  CHECK(martingale_ztest(std::vector<double>(10, 1.0)).verdict == Verdict::Inconclusive);

  std::mt19937_64 g(1);
  std::normal_distribution<double> nd;
  std::vector<double> x(10000);
  for (auto& v : x) v = 1.0 + nd(g);
  const auto big = martingale_ztest(x);
  // 20 contiguous batches of 500: z = mean / (sd of batch means / sqrt 20).
  double bm[20] = {}, grand = 0.0;
  for (int b = 0; b < 20; ++b) {
    for (int i = 0; i < 500; ++i) bm[b] += x[b * 500 + i] / 500.0;
    grand += bm[b] / 20.0;
  }
  double ss = 0.0;
  for (double v : bm) ss += (v - grand) * (v - grand);
  const double z_ref = grand / std::sqrt(ss / 19.0 / 20.0);
  CHECK(big.statistic == doctest::Approx(z_ref).epsilon(1e-10));
  // The batch SE carries ~16% relative noise around the iid value 0.01.
  CHECK(std::abs(big.statistic) > 60.0);
  CHECK(std::abs(big.statistic) < 160.0);
  CHECK(big.verdict == Verdict::Fail);

  std::vector<double> w(x.size(), 2.0);
  CHECK(martingale_ztest(x, w).statistic == doctest::Approx(big.statistic).epsilon(1e-12));

  int pass = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RngStream r(seed, 1);
    for (auto& v : x) v = r.normal();
    pass += martingale_ztest(x).verdict == Verdict::Pass;
  }
  CHECK(pass >= 99);
}

TEST_CASE("compensator_residual") {
  SamplerConfig c;
  c.dt = 1e-3;
  const auto paths = path_batch(kUnit, 42, 0, c, 2000, Method::Exact);
  const double unit = std::sqrt(c.dt);
  const auto r = compensator_residual(kUnit, paths, {0.0, 1.3, 200.0}, unit);
  const auto& per = r.metadata["per_t"];
  CHECK(per[0]["mean"].get<double>() == 0.0);
  CHECK(per[0]["se"].get<double>() == 0.0);
  CHECK(std::abs(per[2]["z"].get<double>()) < 3.0);
  CHECK(r.verdict == Verdict::Pass);
}

TEST_CASE("jump_scan") {
  SamplerConfig c;
  c.dt = 1e-3;
  const auto paths = path_batch(kUnit, 42, 0, c, 200, Method::Exact);
  const auto ok = jump_scan(kUnit, paths);
  CHECK(ok.verdict == Verdict::Pass);
  CHECK(ok.statistic == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
  CHECK(ok.metadata["bad_first_coordinate_paths"] == 0);
  CHECK(jump_scan(kUnit, paths, 1.0).verdict == Verdict::Fail);
  // A path that never comes back down to its sigma node is flagged.
  auto broken = paths[0];
  broken.values.back() = 0.5;
  CHECK(jump_scan(kUnit, std::span<const PathGrid>(&broken, 1)).verdict == Verdict::Fail);
}

TEST_CASE("strong_markov_violation_test") {
  const auto a = strong_markov_violation_test(kUnit, 42, 7, 10000, 1e-3);
  const auto b = strong_markov_violation_test(kUnit, 42, 7, 10000, 1e-3);
  CHECK(a.statistic == b.statistic);
  CHECK(a.verdict == Verdict::Pass);
  CHECK(a.metadata["control_mean"] == 0.0);
}
