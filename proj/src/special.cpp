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

#include "lastpass/special.hpp"

#include <cmath>
#include <limits>

namespace lastpass {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kInvSqrtPi = 0.56418958354775628695;

// x*x split into hi + lo exactly.
inline void square_split(double x, double& hi, double& lo) {
  hi = x * x;
  lo = std::fma(x, x, -hi);
}

// Asymptotic series; erfc itself underflows past x ~ 26.
double erfcx_asymptotic(double x) {
  const double v = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n <= 10; ++n) {
    term *= -(2.0 * n - 1.0) * v;
    sum += term;
  }
  return kInvSqrtPi / x * sum;
}

}  // namespace

double gauss_pdf(const GaussParams& g) {
  if (!(g.t > 0.0)) throw DomainError("gauss_pdf: variance must be positive");
  const double d = g.x - g.m;
  return kInvSqrt2Pi / std::sqrt(g.t) * std::exp(-d * d / (2.0 * g.t));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) {
    if (x < -26.7) return std::numeric_limits<double>::infinity();
    double hi, lo;
    square_split(x, hi, lo);
    return 2.0 * std::exp(hi) * std::exp(lo) - erfcx(-x);
  }
  if (x < 25.0) {
    double hi, lo;
    square_split(x, hi, lo);
    return std::exp(hi) * std::exp(lo) * std::erfc(x);
  }
  return erfcx_asymptotic(x);
}

double scaled_gauss_tail(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::quiet_NaN();
  if (b == std::numeric_limits<double>::infinity()) return 0.0;
  if (b <= 0.0) return std::exp(a) * normal_cdf(-b);
  // Phi(-b) = erfcx(b/sqrt2) exp(-b^2/2) / 2; fold exp(-b^2/2) into exp(a).
  double hi, lo;
  square_split(b, hi, lo);
  const double expo = (a - 0.5 * hi) - 0.5 * lo;
  if (expo < -745.2) return 0.0;
  return 0.5 * erfcx(b * kInvSqrt2) * std::exp(expo);
}

}  // namespace lastpass
