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

#include <limits>

#include "lastpass/params.hpp"

namespace lastpass {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

double alpha(const ModelParams& p, double x);
double gamma(const ModelParams& p, double x);

// Density and distribution function of the last passage time.
double sigma_pdf(const ModelParams& p, double r);
double sigma_cdf(const ModelParams& p, double t);
double sigma_cdf_inverse(const ModelParams& p, double u);

// int_s^t p(r - s, z - x, lambda (r - s)) dr; t may be +inf.
double int_p_dr(const ModelParams& p, double s, double t, double x);
// int_s^t (r - s) p(r - s, z - x, lambda (r - s)) dr; t may be +inf.
double int_rp_dr(const ModelParams& p, double s, double t, double x);
// int_0^t Phi(lambda sqrt(u) +/- d / sqrt(u)) du.
double int_phi_plus(const ModelParams& p, double t, double d);
double int_phi_minus(const ModelParams& p, double t, double d);

// An antiderivative of exp(-a^2 r^2 - b^2 / r^2). r = 0 and r = +inf give the
// one-sided limits.
double gaussian_primitive(double a, double b, double r);

// Limit of E_x[exp(-lambda |xi_t - z|)] as x -> z, x != z.
double nonfeller_gap(const ModelParams& p, double t);

}  // namespace lastpass
