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

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lastpass/params.hpp"
#include "lastpass/report.hpp"

namespace lastpass {

// (y1, y2): y1 = 1 while the process is still running.
struct StatePoint {
  int y1;
  double y2;
};

struct TestFunction {
  std::function<double(int, double)> h;
  std::function<double(double)> dh;   // d/dy2 of h(1, .)
  std::function<double(double)> d2h;  // d2/dy2^2 of h(1, .)
  bool decays = false;
};

// Central differences with step 1e-5 for whichever derivatives are missing.
TestFunction with_fd_derivatives(TestFunction f, double step = 1e-5);

// h(0, .) = 0, h(1, y) = (y - z)^2 exp(-(y - z)^2), with exact derivatives.
TestFunction canonical_h(const ModelParams& p);

struct ConditionalSigmaLaw {
  std::optional<double> atom_known;
  std::function<double(double)> density;  // zero outside (start, inf)
  double normalizer = 1.0;
  double start = 0.0;
};

// Mass that P_t puts on {z} starting from x != z.
double atom_weight(const ModelParams& p, double t, double x);

double transition_expectation(const ModelParams& p, double t, double x,
                              const std::function<double(double)>& f);

double semigroup_Q(const ModelParams& p, double t, StatePoint pt, const TestFunction& h);

double chapman_kolmogorov_residual(const ModelParams& p, double s, double t, StatePoint pt,
                                   const TestFunction& h);

ConditionalSigmaLaw cond_sigma_law(const ModelParams& p, double t, double xi_t, bool absorbed,
                                   std::optional<double> sigma = std::nullopt);

double cond_exp_sigma(const ModelParams& p, double t, double xi_t, bool absorbed,
                      std::optional<double> sigma_if_absorbed = std::nullopt);

double survival_prob(const ModelParams& p, double s, double xi_s, double t);

double cond_mean_xi(const ModelParams& p, double s, double xi_s, double t);

double cond_mean_stopped_B(const ModelParams& p, double s, double xi_s, double t, bool absorbed,
                           std::optional<double> sigma_if_absorbed = std::nullopt);

double sup_cdf(const ModelParams& p, double x);

double localtime_at_sigma_cdf(const ModelParams& p, double y);

double generator_apply(const ModelParams& p, const TestFunction& h, StatePoint pt);

TestReport generator_consistency(const ModelParams& p, const TestFunction& h,
                                 const std::vector<StatePoint>& probes,
                                 const std::vector<double>& t_sequence);

double strong_markov_violation_bound(const ModelParams& p);

}  // namespace lastpass
