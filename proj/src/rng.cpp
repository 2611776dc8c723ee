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

#include "lastpass/rng.hpp"

#include <cmath>

#include "lastpass/simd.hpp"

namespace lastpass {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t id, std::uint32_t sub) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32), sub};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t substream)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id, substream)) {}

double RngStream::uniform() {
  return (static_cast<double>(engine_() >> 12) + 0.5) * (1.0 / 4503599627370496.0);
}

double RngStream::normal() {
  double x;
  normals(std::span<double>(&x, 1));
  return x;
}

void RngStream::normals(std::span<double> out) {
  if (scratch_.size() < out.size()) scratch_.resize(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) scratch_[i] = engine_();
  simd::normals_from_bits(scratch_.data(), out.data(), out.size());
}

double RngStream::exponential(double rate) { return -std::log(uniform()) / rate; }

std::uint64_t stream_hash(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace lastpass
