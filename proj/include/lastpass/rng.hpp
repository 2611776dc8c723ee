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

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace lastpass {

// Reproducible stream keyed by (seed, stream_id, substream). Two streams with
// the same key produce the same bits; different keys are seeded through
// std::seed_seq so nearby ids do not give correlated engines.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t substream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t bits() { return engine_(); }
  // Open interval (0, 1), same mapping as the normal kernel.
  double uniform();
  double normal();
  void normals(std::span<double> out);
  double exponential(double rate);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::vector<std::uint64_t> scratch_;
};

// FNV-1a over the bytes of a check name; per-check base stream id.
std::uint64_t stream_hash(std::string_view name);

}  // namespace lastpass
