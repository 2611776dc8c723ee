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

#include "lastpass/analytic.hpp"

#include <algorithm>
#include <cmath>

#include "lastpass/special.hpp"

namespace lastpass {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrtPi = 1.77245385090551602730;

double phi(double x) { return gauss_pdf({1.0, x, 0.0}); }

void check_interval(double s, double t, const char* who) {
  if (!(s >= 0.0) || !(t > s)) throw DomainError(std::string(who) + ": need 0 <= s < t");
}

}  // namespace

double alpha(const ModelParams& p, double x) {
  const double d = p.z - x;
  return std::abs(d) - d;
}

double gamma(const ModelParams& p, double x) {
  const double d = p.z - x;
  return std::abs(d) + d;
}

double sigma_pdf(const ModelParams& p, double r) {
  if (!(r > 0.0)) throw DomainError("sigma_pdf: r must be positive");
  if (r == kInf) return 0.0;
  return p.lambda * gauss_pdf({r, p.z, p.lambda * r});
}

double sigma_cdf(const ModelParams& p, double t) {
  if (!(t > 0.0)) return 0.0;
  if (t == kInf) return 1.0;
  const double st = std::sqrt(t);
  const double a = p.lambda * st;
  const double b = p.z / st;
  const double v = normal_cdf(a - b) - scaled_gauss_tail(2.0 * p.lambda * p.z, a + b);
  return std::clamp(v, 0.0, 1.0);
}

double sigma_cdf_inverse(const ModelParams& p, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("sigma_cdf_inverse: u must lie in (0,1)");
  double lo = 1e-12;
  double hi = 1.0;
  while (sigma_cdf(p, hi) < u) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw DomainError("sigma_cdf_inverse: no bracket");
  }
  while (hi - lo > 1e-3 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (sigma_cdf(p, mid) < u) lo = mid; else hi = mid;
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double g = sigma_cdf(p, t) - u;
    if (g == 0.0) break;
    if (g < 0.0) lo = t; else hi = t;
    const double f = sigma_pdf(p, t);
    double next = (f > 0.0) ? t - g / f : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - t);
    t = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * t) break;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  return t;
}

double int_p_dr(const ModelParams& p, double s, double t, double x) {
  check_interval(s, t, "int_p_dr");
  const double lam = p.lambda;
  const double A = alpha(p, x);
  if (t == kInf) return std::exp(-lam * A) / lam;
  const double G = gamma(p, x);
  const double e = std::abs(p.z - x);
  const double rt = std::sqrt(t - s);
  return (std::exp(-lam * A) * normal_cdf(lam * rt - e / rt) -
          scaled_gauss_tail(lam * G, lam * rt + e / rt)) / lam;
}

double int_rp_dr(const ModelParams& p, double s, double t, double x) {
  check_interval(s, t, "int_rp_dr");
  const double lam = p.lambda;
  const double A = alpha(p, x);
  const double e = std::abs(p.z - x);
  const double l2 = lam * lam;
  if (t == kInf) return std::exp(-lam * A) * (1.0 / (l2 * lam) + e / l2);
  const double G = gamma(p, x);
  const double tau = t - s;
  const double rt = std::sqrt(tau);
  const double plus = std::exp(-lam * A) * normal_cdf(lam * rt - e / rt);
  const double minus = scaled_gauss_tail(lam * G, lam * rt + e / rt);
  const double dens = gauss_pdf({tau, p.z - x, lam * tau});
  return (plus - minus) / (l2 * lam) + e * (plus + minus) / l2 - 2.0 / l2 * tau * dens;
}

double int_phi_plus(const ModelParams& p, double t, double d) {
  if (!(t > 0.0)) throw DomainError("int_phi_plus: t must be positive");
  const double lam = p.lambda;
  const double e = std::abs(d);
  const double A = e - d;
  const double G = e + d;
  const double rt = std::sqrt(t);
  const double c = 1.0 / (2.0 * lam * lam);
  return c * std::exp(-lam * G) * (-lam * A - 1.0) * normal_cdf(lam * rt - e / rt) -
         c * (lam * G - 1.0) * scaled_gauss_tail(lam * A, lam * rt + e / rt) +
         t * normal_cdf(lam * rt + d / rt) + rt / lam * phi(lam * rt + d / rt);
}

double int_phi_minus(const ModelParams& p, double t, double d) {
  if (!(t > 0.0)) throw DomainError("int_phi_minus: t must be positive");
  const double lam = p.lambda;
  const double e = std::abs(d);
  const double A = e - d;
  const double G = e + d;
  const double rt = std::sqrt(t);
  const double c = 1.0 / (2.0 * lam * lam);
  return c * std::exp(-lam * A) * (-lam * G - 1.0) * normal_cdf(lam * rt - e / rt) -
         c * (lam * A - 1.0) * scaled_gauss_tail(lam * G, lam * rt + e / rt) +
         t * normal_cdf(lam * rt - d / rt) + rt / lam * phi(lam * rt - d / rt);
}

double gaussian_primitive(double a, double b, double r) {
  if (a == 0.0) throw DomainError("gaussian_primitive: a must be nonzero");
  const double aa = std::abs(a);
  const double ab = std::abs(b);
  const double k = kSqrtPi / (2.0 * aa);
  if (r == kInf) return k * (std::exp(2.0 * aa * ab) + std::exp(-2.0 * aa * ab));
  if (r == 0.0) {
    return ab == 0.0 ? k : k * std::exp(2.0 * aa * ab);
  }
  const double u = kSqrt2 * aa * r;
  const double v = kSqrt2 * ab / r;
  return k * (scaled_gauss_tail(2.0 * aa * ab, -(u + v)) +
              scaled_gauss_tail(-2.0 * aa * ab, -(u - v)));
}

double nonfeller_gap(const ModelParams& p, double t) {
  if (!(t > 0.0)) throw DomainError("nonfeller_gap: t must be positive");
  const double rt = std::sqrt(t);
  const double lam = p.lambda;
  return std::erf(lam * rt / kSqrt2) +
         2.0 * scaled_gauss_tail(1.5 * lam * lam * t, 2.0 * lam * rt);
}

}  // namespace lastpass
