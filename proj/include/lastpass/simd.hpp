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

#include <cstddef>
#include <cstdint>

// Data-parallel kernels with a scalar reference and an AVX2 variant picked at
// run time. Reductions keep four partial sums in the AVX2 lane order in both
// variants, so the two produce identical bits.
namespace lastpass::simd {

enum class Isa { Scalar, Avx2 };

bool avx2_available();
// LASTPASS_SIMD=scalar in the environment forces the reference path.
Isa active_isa();
void set_isa(Isa isa);
const char* isa_name(Isa isa);

// Top 52 bits of each word as a uniform on (0,1) (midpoint of its cell, so
// never 0 or 1), then the normal quantile.
void normals_from_bits(const std::uint64_t* bits, double* out, std::size_t n);

// Time the piecewise-linear path (t[i], v[i]), i < n, spends in each band
// (level - eps[k], level + eps[k]), k < 3, added to occ[k].
void band_occupation(const double* t, const double* v, std::size_t n, double level,
                     const double eps[3], double occ[3]);

// Sum of (v[i+1] - v[i])^2 over i + 1 < n.
double sum_sq_increments(const double* v, std::size_t n);

// out[i] = u[i] + c[0] u[i-2] + c[1] u[i-1] + c[2] u[i] + c[3] u[i+1] + c[4] u[i+2]
// for i in [begin, end), summed left to right.
void stencil5(const double* u, double* out, std::size_t begin, std::size_t end,
              const double c[5]);

namespace scalar {
void normals_from_bits(const std::uint64_t* bits, double* out, std::size_t n);
void band_occupation(const double* t, const double* v, std::size_t n, double level,
                     const double eps[3], double occ[3]);
double sum_sq_increments(const double* v, std::size_t n);
void stencil5(const double* u, double* out, std::size_t begin, std::size_t end,
              const double c[5]);
}  // namespace scalar

namespace avx2 {
void normals_from_bits(const std::uint64_t* bits, double* out, std::size_t n);
void band_occupation(const double* t, const double* v, std::size_t n, double level,
                     const double eps[3], double occ[3]);
double sum_sq_increments(const double* v, std::size_t n);
void stencil5(const double* u, double* out, std::size_t begin, std::size_t end,
              const double c[5]);
}  // namespace avx2

}  // namespace lastpass::simd
