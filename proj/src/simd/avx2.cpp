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

#include <immintrin.h>

#include <cmath>

#include "kernel_constants.hpp"
#include "lastpass/simd.hpp"

namespace lastpass::simd::avx2 {

namespace {

using namespace detail;

inline __m256d horner(const double* c, __m256d r) {
  __m256d acc = _mm256_set1_pd(c[7]);
  for (int k = 6; k >= 0; --k) acc = _mm256_add_pd(_mm256_mul_pd(acc, r), _mm256_set1_pd(c[k]));
  return acc;
}

inline __m256d log_kernel(__m256d x) {
  const __m256i b = _mm256_castpd_si256(x);
  // Exponent field to double through the 2^52 trick; AVX2 has no i64->f64.
  const __m256i field = _mm256_srli_epi64(b, 52);
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(field, magic)),
                            _mm256_set1_pd(4503599627370496.0));
  e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));
  const __m256i mant = _mm256_or_si256(_mm256_and_si256(b, _mm256_set1_epi64x(0x000fffffffffffffLL)),
                                       _mm256_set1_epi64x(0x3ff0000000000000LL));
  __m256d m = _mm256_castsi256_pd(mant);
  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrt2), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_blendv_pd(e, _mm256_add_pd(e, _mm256_set1_pd(1.0)), big);
  const __m256d f = _mm256_sub_pd(m, _mm256_set1_pd(1.0));
  const __m256d s = _mm256_div_pd(f, _mm256_add_pd(_mm256_set1_pd(2.0), f));
  const __m256d s2 = _mm256_mul_pd(s, s);
  __m256d poly = _mm256_set1_pd(kLogCoef[kLogTerms - 1]);
  for (int k = kLogTerms - 2; k >= 0; --k) {
    poly = _mm256_add_pd(_mm256_mul_pd(poly, s2), _mm256_set1_pd(kLogCoef[k]));
  }
  const __m256d hi = _mm256_mul_pd(e, _mm256_set1_pd(kLn2Hi));
  const __m256d lo = _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(2.0), s), poly),
                                   _mm256_mul_pd(e, _mm256_set1_pd(kLn2Lo)));
  return _mm256_add_pd(hi, lo);
}

inline __m256d quantile(__m256d u) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d q = _mm256_sub_pd(u, _mm256_set1_pd(0.5));
  const __m256d aq = _mm256_andnot_pd(sign, q);
  const __m256d central = _mm256_cmp_pd(aq, _mm256_set1_pd(0.425), _CMP_LE_OQ);
  const __m256d rc = _mm256_sub_pd(_mm256_set1_pd(0.180625), _mm256_mul_pd(q, q));
  __m256d x = _mm256_div_pd(_mm256_mul_pd(q, horner(kA, rc)), horner(kB, rc));
  if (_mm256_movemask_pd(central) == 0xF) return x;

  const __m256d neg = _mm256_cmp_pd(q, _mm256_setzero_pd(), _CMP_LT_OQ);
  __m256d r = _mm256_blendv_pd(_mm256_sub_pd(_mm256_set1_pd(1.0), u), u, neg);
  r = _mm256_sqrt_pd(_mm256_sub_pd(_mm256_setzero_pd(), log_kernel(r)));
  const __m256d mid = _mm256_cmp_pd(r, _mm256_set1_pd(5.0), _CMP_LE_OQ);
  const __m256d r1 = _mm256_sub_pd(r, _mm256_set1_pd(1.6));
  __m256d xt = _mm256_div_pd(horner(kC, r1), horner(kD, r1));
  const __m256d far = _mm256_andnot_pd(central, _mm256_andnot_pd(mid, _mm256_castsi256_pd(_mm256_set1_epi64x(-1))));
  if (_mm256_movemask_pd(far) != 0) {
    const __m256d r2 = _mm256_sub_pd(r, _mm256_set1_pd(5.0));
    xt = _mm256_blendv_pd(_mm256_div_pd(horner(kE, r2), horner(kF, r2)), xt, mid);
  }
  xt = _mm256_xor_pd(xt, _mm256_and_pd(neg, sign));
  return _mm256_blendv_pd(xt, x, central);
}

}  // namespace

void normals_from_bits(const std::uint64_t* bits, double* out, std::size_t n) {
  const __m256d scale = _mm256_set1_pd(kTwoPowM52);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
  const __m256d two52 = _mm256_set1_pd(4503599627370496.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i w = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(bits + i));
    // 52-bit integer to double: split into high 20 and low 32 bits.
    const __m256i top = _mm256_srli_epi64(w, 12);
    const __m256i hi20 = _mm256_srli_epi64(top, 32);
    const __m256i lo32 = _mm256_and_si256(top, _mm256_set1_epi64x(0xffffffffLL));
    const __m256d dhi = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(hi20, magic)), two52);
    const __m256d dlo = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(lo32, magic)), two52);
    const __m256d k = _mm256_add_pd(_mm256_mul_pd(dhi, _mm256_set1_pd(4294967296.0)), dlo);
    const __m256d u = _mm256_mul_pd(_mm256_add_pd(k, half), scale);
    _mm256_storeu_pd(out + i, quantile(u));
  }
  if (i < n) scalar::normals_from_bits(bits + i, out + i, n - i);
}

void band_occupation(const double* t, const double* v, std::size_t n, double level,
                     const double eps[3], double occ[3]) {
  if (n < 2) return;
  const std::size_t segs = n - 1;
  __m256d acc[3] = {_mm256_setzero_pd(), _mm256_setzero_pd(), _mm256_setzero_pd()};
  __m256d lo[3], hi[3];
  for (int k = 0; k < 3; ++k) {
    lo[k] = _mm256_set1_pd(level - eps[k]);
    hi[k] = _mm256_set1_pd(level + eps[k]);
  }
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= segs; i += 4) {
    const __m256d a = _mm256_loadu_pd(v + i);
    const __m256d b = _mm256_loadu_pd(v + i + 1);
    const __m256d h = _mm256_sub_pd(_mm256_loadu_pd(t + i + 1), _mm256_loadu_pd(t + i));
    const __m256d mn = _mm256_min_pd(a, b);
    const __m256d mx = _mm256_max_pd(a, b);
    const __m256d span = _mm256_sub_pd(mx, mn);
    const __m256d moving = _mm256_cmp_pd(span, zero, _CMP_GT_OQ);
    for (int k = 0; k < 3; ++k) {
      const __m256d ov = _mm256_max_pd(_mm256_sub_pd(_mm256_min_pd(mx, hi[k]), _mm256_max_pd(mn, lo[k])), zero);
      const __m256d slope_part = _mm256_div_pd(_mm256_mul_pd(h, ov), span);
      const __m256d inside = _mm256_and_pd(_mm256_cmp_pd(mn, lo[k], _CMP_GT_OQ),
                                           _mm256_cmp_pd(mn, hi[k], _CMP_LT_OQ));
      const __m256d flat_part = _mm256_and_pd(inside, h);
      acc[k] = _mm256_add_pd(acc[k], _mm256_blendv_pd(flat_part, slope_part, moving));
    }
  }
  alignas(32) double lanes[3][4];
  for (int k = 0; k < 3; ++k) _mm256_store_pd(lanes[k], acc[k]);
  for (; i < segs; ++i) {
    const std::size_t lane = i & 3;
    const double a = v[i], b = v[i + 1];
    const double h = t[i + 1] - t[i];
    const double mn = a < b ? a : b, mx = a > b ? a : b;
    const double span = mx - mn;
    for (int k = 0; k < 3; ++k) {
      const double l = level - eps[k], u = level + eps[k];
      double part;
      if (span > 0.0) {
        const double top = mx < u ? mx : u;
        const double bot = mn > l ? mn : l;
        const double d = top - bot;
        part = (h * (d > 0.0 ? d : 0.0)) / span;
      } else {
        part = (mn > l && mn < u) ? h : 0.0;
      }
      lanes[k][lane] += part;
    }
  }
  for (int k = 0; k < 3; ++k) occ[k] += (lanes[k][0] + lanes[k][1]) + (lanes[k][2] + lanes[k][3]);
}

double sum_sq_increments(const double* v, std::size_t n) {
  if (n < 2) return 0.0;
  const std::size_t segs = n - 1;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= segs; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(v + i + 1), _mm256_loadu_pd(v + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (; i < segs; ++i) {
    const double d = v[i + 1] - v[i];
    lanes[i & 3] += d * d;
  }
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

void stencil5(const double* u, double* out, std::size_t begin, std::size_t end,
              const double c[5]) {
  const __m256d c0 = _mm256_set1_pd(c[0]), c1 = _mm256_set1_pd(c[1]), c2 = _mm256_set1_pd(c[2]);
  const __m256d c3 = _mm256_set1_pd(c[3]), c4 = _mm256_set1_pd(c[4]);
  std::size_t i = begin;
  for (; i + 4 <= end; i += 4) {
    __m256d s = _mm256_mul_pd(c0, _mm256_loadu_pd(u + i - 2));
    s = _mm256_add_pd(s, _mm256_mul_pd(c1, _mm256_loadu_pd(u + i - 1)));
    const __m256d ui = _mm256_loadu_pd(u + i);
    s = _mm256_add_pd(s, _mm256_mul_pd(c2, ui));
    s = _mm256_add_pd(s, _mm256_mul_pd(c3, _mm256_loadu_pd(u + i + 1)));
    s = _mm256_add_pd(s, _mm256_mul_pd(c4, _mm256_loadu_pd(u + i + 2)));
    _mm256_storeu_pd(out + i, _mm256_add_pd(ui, s));
  }
  if (i < end) scalar::stencil5(u, out, i, end, c);
}

}  // namespace lastpass::simd::avx2
