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

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "lastpass/simd.hpp"

namespace lastpass::simd {

namespace {

Isa detect() {
  if (const char* env = std::getenv("LASTPASS_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::Scalar;
  }
  return avx2_available() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::Avx2 && !avx2_available()) isa = Isa::Scalar;
  current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void normals_from_bits(const std::uint64_t* bits, double* out, std::size_t n) {
  if (active_isa() == Isa::Avx2) avx2::normals_from_bits(bits, out, n);
  else scalar::normals_from_bits(bits, out, n);
}

void band_occupation(const double* t, const double* v, std::size_t n, double level,
                     const double eps[3], double occ[3]) {
  if (active_isa() == Isa::Avx2) avx2::band_occupation(t, v, n, level, eps, occ);
  else scalar::band_occupation(t, v, n, level, eps, occ);
}

double sum_sq_increments(const double* v, std::size_t n) {
  return active_isa() == Isa::Avx2 ? avx2::sum_sq_increments(v, n)
                                   : scalar::sum_sq_increments(v, n);
}

void stencil5(const double* u, double* out, std::size_t begin, std::size_t end,
              const double c[5]) {
  if (active_isa() == Isa::Avx2) avx2::stencil5(u, out, begin, end, c);
  else scalar::stencil5(u, out, begin, end, c);
}

}  // namespace lastpass::simd
