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

#include <bit>
#include <cmath>

#include "kernel_constants.hpp"
#include "lastpass/simd.hpp"

namespace lastpass::simd::scalar {

namespace {

using namespace detail;

// Same ordering semantics as the packed min/max instructions.
inline double vmin(double a, double b) { return a < b ? a : b; }
inline double vmax(double a, double b) { return a > b ? a : b; }

inline double horner(const double* c, double r) {
  double acc = c[7];
  for (int k = 6; k >= 0; --k) acc = acc * r + c[k];
  return acc;
}

inline double log_kernel(double x) {
  const std::uint64_t b = std::bit_cast<std::uint64_t>(x);
  double e = static_cast<double>((b >> 52) & 0x7ff) - 1023.0;
  double m = std::bit_cast<double>((b & 0x000fffffffffffffULL) | 0x3ff0000000000000ULL);
  if (m > kSqrt2) {
    m = m * 0.5;
    e = e + 1.0;
  }
  const double f = m - 1.0;
  const double s = f / (2.0 + f);
  const double s2 = s * s;
  double poly = kLogCoef[kLogTerms - 1];
  for (int k = kLogTerms - 2; k >= 0; --k) poly = poly * s2 + kLogCoef[k];
  return e * kLn2Hi + ((2.0 * s) * poly + e * kLn2Lo);
}

inline double quantile(double u) {
  const double q = u - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return (q * horner(kA, r)) / horner(kB, r);
  }
  double r = q < 0.0 ? u : 1.0 - u;
  r = std::sqrt(-log_kernel(r));
  double x;
  if (r <= 5.0) {
    r = r - 1.6;
    x = horner(kC, r) / horner(kD, r);
  } else {
    r = r - 5.0;
    x = horner(kE, r) / horner(kF, r);
  }
  return q < 0.0 ? -x : x;
}

}  // namespace

void normals_from_bits(const std::uint64_t* bits, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(bits[i] >> 12) + 0.5) * kTwoPowM52;
    out[i] = quantile(u);
  }
}

void band_occupation(const double* t, const double* v, std::size_t n, double level,
                     const double eps[3], double occ[3]) {
  if (n < 2) return;
  double acc[3][4] = {};
  double lo[3], hi[3];
  for (int k = 0; k < 3; ++k) {
    lo[k] = level - eps[k];
    hi[k] = level + eps[k];
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t lane = i & 3;
    const double a = v[i], b = v[i + 1];
    const double h = t[i + 1] - t[i];
    const double mn = vmin(a, b), mx = vmax(a, b);
    const double span = mx - mn;
    for (int k = 0; k < 3; ++k) {
      double part;
      if (span > 0.0) {
        const double ov = vmax(vmin(mx, hi[k]) - vmax(mn, lo[k]), 0.0);
        part = (h * ov) / span;
      } else {
        part = (mn > lo[k] && mn < hi[k]) ? h : 0.0;
      }
      acc[k][lane] += part;
    }
  }
  for (int k = 0; k < 3; ++k) occ[k] += (acc[k][0] + acc[k][1]) + (acc[k][2] + acc[k][3]);
}

double sum_sq_increments(const double* v, std::size_t n) {
  double acc[4] = {};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = v[i + 1] - v[i];
    acc[i & 3] += d * d;
  }
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

void stencil5(const double* u, double* out, std::size_t begin, std::size_t end,
              const double c[5]) {
  for (std::size_t i = begin; i < end; ++i) {
    out[i] = u[i] + ((((c[0] * u[i - 2] + c[1] * u[i - 1]) + c[2] * u[i]) + c[3] * u[i + 1]) +
                     c[4] * u[i + 2]);
  }
}

}  // namespace lastpass::simd::scalar
