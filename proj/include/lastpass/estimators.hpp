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

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lastpass/params.hpp"
#include "lastpass/report.hpp"
#include "lastpass/sampler.hpp"

namespace lastpass {

inline constexpr double kKsAlpha = 0.01;
inline constexpr double kZCut = 3.0;
inline constexpr int kBatches = 20;

class Ecdf {
 public:
  explicit Ecdf(std::vector<double> samples);
  double operator()(double x) const;
  std::size_t n() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

Ecdf ecdf(std::vector<double> samples);

// P(K > x) for the limiting Kolmogorov law.
double kolmogorov_sf(double x);
// D with P(sqrt(n) D > c) = alpha, asymptotically.
double ks_critical(std::size_t n, double alpha = kKsAlpha);

double ks_distance(const Ecdf& e, const std::function<double(double)>& cdf);
TestReport ks_test(const Ecdf& e, const std::function<double(double)>& cdf,
                   const std::string& name = "ks");

// (1 / 2 eps) times the time in [t_begin, min(t_end, sigma)] that the linear
// interpolant spends within eps of level.
double local_time_estimate(const PathGrid& path, double level, double epsilon,
                           double t_begin = 0.0, double t_end = 1e300);
// Same for the three widths {4, 2, 1} * eps_unit in one pass.
std::array<double, 3> local_time_ladder(const PathGrid& path, double level, double eps_unit,
                                        double t_begin = 0.0, double t_end = 1e300);
// Least-squares line through (4, y[0]), (2, y[1]), (1, y[2]) evaluated at 0.
double extrapolate_ladder(const std::array<double, 3>& y);
// Order statistics of the three samples extrapolated one by one; the result
// is sorted.
std::vector<double> extrapolate_quantiles(std::vector<double> wide, std::vector<double> mid,
                                          std::vector<double> narrow);

double quad_var_estimate(const PathGrid& path, double t);

// Batch-means z-score of the mean of x[i] * w[i] (w empty: all ones).
TestReport martingale_ztest(std::span<const double> x, std::span<const double> w = {},
                            const std::string& name = "martingale");

// E[1{sigma <= t} - lambda L(t ^ sigma, z)] for each t, per-path extrapolated.
class CompensatorAccumulator {
 public:
  CompensatorAccumulator(const ModelParams& p, std::vector<double> t_grid, double eps_unit);
  void add(const PathGrid& path);
  TestReport finish() const;

 private:
  ModelParams p_;
  std::vector<double> t_grid_;
  double eps_unit_;
  std::vector<std::vector<double>> samples_;
};

TestReport compensator_residual(const ModelParams& p, std::span<const PathGrid> paths,
                                const std::vector<double>& t_grid, double eps_unit);

// (a) largest one-cell increment of lambda L(. ^ sigma, z) on the grid taken
// with strides 4, 2, 1 (eps = 2 sqrt(step)); (b) the first coordinate of zeta
// drops exactly once, at the sigma node.
class JumpScanAccumulator {
 public:
  explicit JumpScanAccumulator(const ModelParams& p, double fake_jump = 0.0);
  void add(const PathGrid& path);
  TestReport finish() const;

 private:
  ModelParams p_;
  double fake_jump_;
  std::array<double, 3> max_inc_{};
  long long paths_ = 0;
  long long bad_jumps_ = 0;
};

TestReport jump_scan(const ModelParams& p, std::span<const PathGrid> paths,
                     double fake_jump = 0.0);

// P(T_z <= 1, xi_{T_z + 1} != z) on exact paths, T_z the first grid passage.
TestReport strong_markov_violation_test(const ModelParams& p, std::uint64_t seed,
                                        std::uint64_t base_stream, std::size_t n, double dt);

}  // namespace lastpass
