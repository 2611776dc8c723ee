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

// Reference values: mpmath quadrature of the transition densities, 40 digits.

#include <doctest.h>

#include <cmath>

#include "lastpass/analytic.hpp"
#include "lastpass/kernels.hpp"
#include "lastpass/quadrature.hpp"
#include "lastpass/special.hpp"

using namespace lastpass;

namespace {

const ModelParams kUnit(1.0, 1.0);

TestFunction constant(double c) {
  TestFunction f;
  f.h = [c](int, double) { return c; };
  f.dh = [](double) { return 0.0; };
  f.d2h = [](double) { return 0.0; };
  return f;
}

}  // namespace

TEST_CASE("transition_expectation") {
  auto one = [](double) { return 1.0; };
  auto bump = [](double y) { return std::exp(-std::abs(y - 1.0)); };
  CHECK(transition_expectation(kUnit, 0.7, 1.0, bump) == 1.0);
  CHECK(std::abs(transition_expectation(kUnit, 1.0, 0.0, one) - 1.0) <= 1e-8);
  for (double lam : {0.5, 1.0, 2.0}) {
    for (double z : {0.3, 1.0, 2.5}) {
      const ModelParams p(lam, z);
      for (double t : {0.05, 1.0, 4.0}) {
        for (double x : {z - 2.0, z - 0.1, z, z + 0.1, z + 3.0}) {
          CHECK(std::abs(transition_expectation(p, t, x, one) - 1.0) <= 1e-8);
        }
      }
    }
  }
  const double gap = nonfeller_gap(kUnit, 1.0);
  CHECK(std::abs(transition_expectation(kUnit, 1.0, 1.0 + 1e-9, bump) - gap) <= 1e-8);
  CHECK(std::abs(transition_expectation(kUnit, 1.0, 1.0 - 1e-9, bump) - gap) <= 1e-8);
  CHECK(1.0 - gap > 0.1);
}

TEST_CASE("semigroup_Q") {
  const TestFunction h = canonical_h(kUnit);
  TestFunction g;
  g.h = [](int y1, double y) { return y1 == 0 ? 0.25 + y : std::sin(y); };
  CHECK(semigroup_Q(kUnit, 5.0, {0, 3.7}, g) == 0.25 + 3.7);
  CHECK(semigroup_Q(kUnit, 0.0, {1, 0.2}, g) == std::sin(0.2));
  CHECK(std::abs(semigroup_Q(kUnit, 1.0, {1, 1.0}, h) - 0.049872274718192376) <= 1e-9);
  CHECK(std::abs(semigroup_Q(kUnit, 1.0, {1, 0.5}, h) - 0.079449200763498121) <= 1e-9);
  const double sup_h = std::exp(-1.0);
  for (double t : {0.01, 0.3, 2.0}) {
    for (double y = -3.0; y <= 5.0; y += 0.5) {
      const double q = semigroup_Q(kUnit, t, {1, y}, h);
      CHECK(q >= 0.0);
      CHECK(q <= sup_h);
    }
  }
}

TEST_CASE("chapman_kolmogorov_residual") {
  const TestFunction h = canonical_h(kUnit);
  CHECK(chapman_kolmogorov_residual(kUnit, 0.5, 0.5, {0, 0.3}, h) == 0.0);
  CHECK(chapman_kolmogorov_residual(kUnit, 0.5, 0.5, {1, 1.0}, h) <= 1e-6);
  CHECK(chapman_kolmogorov_residual(kUnit, 0.2, 0.9, {1, -0.4}, h) <= 1e-6);
  CHECK(chapman_kolmogorov_residual(kUnit, 0.5, 0.5, {1, 0.3}, constant(2.5)) <= 1e-10);
}

TEST_CASE("cond_sigma_law and cond_exp_sigma") {
  const auto law = cond_sigma_law(kUnit, 1.0, 0.4, false);
  QuadOptions q;
  q.abs_tol = 1e-12;
  const double brk[1] = {1.6};
  CHECK(integrate(law.density, 1.0, 80.0, brk, q).value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(law.density(0.9) == 0.0);
  CHECK_THROWS_AS(cond_sigma_law(kUnit, 1.0, 1.0, true), UsageError);
  CHECK(*cond_sigma_law(kUnit, 1.0, 1.0, true, 0.6).atom_known == 0.6);
  // Prefactors at z - d and z + d differ by exp(2 lambda d) and the Gaussian
  // factors by its inverse, so the two laws coincide.
  const auto below = cond_sigma_law(kUnit, 1.0, 0.8, false);
  const auto above = cond_sigma_law(kUnit, 1.0, 1.2, false);
  CHECK(above.normalizer / below.normalizer == doctest::Approx(std::exp(0.4)).epsilon(1e-14));
  for (double r : {1.01, 1.3, 2.0, 5.0}) CHECK(above.density(r) == doctest::Approx(below.density(r)).epsilon(1e-13));

  CHECK(cond_exp_sigma(kUnit, 0.0, 0.0, false) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cond_exp_sigma(ModelParams(2.0, 1.0), 3.0, 1.0, false) == doctest::Approx(3.25).epsilon(1e-12));
  CHECK(cond_exp_sigma(kUnit, 2.0, 1.0, true, 1.7) == 1.7);
}

TEST_CASE("survival_prob and conditional means") {
  CHECK(survival_prob(kUnit, 0.3, 0.2, 0.3) == 1.0);
  CHECK(survival_prob(kUnit, 0.0, 0.0, 1e4) <= 1e-12);
  CHECK(std::abs(survival_prob(kUnit, 0.0, 0.0, 1.0) - 0.66810200122317061) <= 1e-12);
  CHECK_THROWS_AS(survival_prob(kUnit, 0.0, 1.0, 1.0), UsageError);
  for (double lam : {0.5, 1.0, 2.0}) {
    for (double z : {0.3, 1.0, 2.0}) {
      const ModelParams p(lam, z);
      for (double t : {0.1, 1.0, 5.0}) CHECK(std::abs(survival_prob(p, 0.0, 0.0, t) + sigma_cdf(p, t) - 1.0) <= 1e-10);
    }
  }
  CHECK(cond_mean_xi(kUnit, 0.4, 0.3, 0.4) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(cond_mean_xi(kUnit, 0.4, 1.0, 3.0) == 1.0);
  CHECK(std::abs(cond_mean_xi(kUnit, 0.0, 0.0, 1.0) - 0.66379599755365879) <= 1e-9);
  CHECK(std::abs(cond_mean_xi(kUnit, 0.0, 0.0, 0.5) - 0.43203679992751363) <= 1e-9);

  CHECK(std::abs(cond_mean_stopped_B(kUnit, 0.0, 0.0, 1.0, false) + 0.20642144286664646) <= 1e-9);
  CHECK(cond_mean_stopped_B(kUnit, 0.6, 0.2, 0.6, false) == doctest::Approx(0.2 - 0.6).epsilon(1e-12));
  // Split form: E[xi_t] - lambda E[t ^ sigma].
  for (double x : {-0.5, 0.4, 1.3, 2.2}) {
    const double s = 0.3, t = 1.4;
    const double surv = survival_prob(kUnit, s, x, t);
    // E[(t ^ sigma) 1{sigma <= t}] from the closed forms in r - s.
    const double e_sig = kUnit.lambda * std::exp(kUnit.lambda * alpha(kUnit, x)) * (s * int_p_dr(kUnit, s, t, x) + int_rp_dr(kUnit, s, t, x));
    const double split = cond_mean_xi(kUnit, s, x, t) - (t * surv + e_sig);
    CHECK(std::abs(cond_mean_stopped_B(kUnit, s, x, t, false) - split) <= 1e-8);
  }
}

TEST_CASE("sup_cdf and localtime_at_sigma_cdf") {
  CHECK(sup_cdf(kUnit, 1.0) == 0.0);
  CHECK(sup_cdf(kUnit, 0.5) == 0.0);
  CHECK(sup_cdf(kUnit, 1.5) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(sup_cdf(kUnit, 60.0) == doctest::Approx(1.0).epsilon(1e-14));
  const ModelParams two(2.0, 1.0);
  CHECK(localtime_at_sigma_cdf(two, 0.0) == 0.0);
  CHECK(localtime_at_sigma_cdf(two, 0.5) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  // Mean via the tail integral: int_0^inf (1 - F) = 1/lambda.
  double m = 0.0;
  const double dy = 1e-4;
  for (double y = 0.5 * dy; y < 20.0; y += dy) m += (1.0 - localtime_at_sigma_cdf(two, y)) * dy;
  CHECK(m == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("generator_apply") {
  const TestFunction h = canonical_h(kUnit);
  CHECK(generator_apply(kUnit, h, {0, 0.3}) == 0.0);
  CHECK(generator_apply(kUnit, h, {1, 1.0}) == doctest::Approx(1.0).epsilon(1e-14));
  for (double u : {0.3, 1.0, 1.7}) {
    const double want = (2 * u * (u * u - 1) + 1 - 5 * u * u + 2 * u * u * u * u) * std::exp(-u * u);
    CHECK(generator_apply(kUnit, h, {1, 1.0 + u}) == doctest::Approx(want).epsilon(1e-13));
  }
  const TestFunction fd = with_fd_derivatives(TestFunction{h.h, {}, {}, true});
  CHECK(generator_apply(kUnit, fd, {1, 1.6}) == doctest::Approx(generator_apply(kUnit, h, {1, 1.6})).epsilon(1e-6));
}

TEST_CASE("generator_consistency") {
  const TestFunction h = canonical_h(kUnit);
  const std::vector<double> ts = {0.1, 0.05, 0.025};
  const auto ok = generator_consistency(kUnit, h, {{1, 0.5}, {1, 1.5}}, ts);
  CHECK(ok.verdict == Verdict::Pass);
  const auto err = ok.metadata["max_error"];
  CHECK(err[0].get<double>() > err[1].get<double>());
  CHECK(err[1].get<double>() > err[2].get<double>());
  const auto absorbed = generator_consistency(kUnit, h, {{0, 0.7}}, ts);
  for (const auto& e : absorbed.metadata["max_error"]) CHECK(e.get<double>() == 0.0);
  TestFunction bad;
  bad.h = [](int y1, double y) { return y1 == 0 ? 0.0 : std::exp(-(y - 1) * (y - 1)); };
  bad = with_fd_derivatives(bad);
  CHECK(generator_consistency(kUnit, bad, {{1, 1.0}}, ts).verdict == Verdict::Fail);
}

TEST_CASE("strong_markov_violation_bound") {
  CHECK(std::abs(strong_markov_violation_bound(kUnit) - 0.063906653509285454) <= 1e-12);
  CHECK(strong_markov_violation_bound(ModelParams(1.0, 40.0)) < 1e-100);
}
