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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lastpass/params.hpp"
#include "lastpass/rng.hpp"

namespace lastpass {

// A sampled trajectory of xi. Nodes past sigma hold z; sigma itself is a node
// whenever it falls inside the sampled window.
struct PathGrid {
  std::vector<double> times;
  std::vector<double> values;
  double sigma = 0.0;
  std::optional<std::size_t> absorbed_index;  // first node with time >= sigma
  bool truncation_suspect = false;

  std::size_t size() const { return times.size(); }
  // Linear interpolation between nodes, z from sigma on.
  double value_at(double t, double z) const;
  void clear();
};

enum class Method { Exact, BruteForce, BangBang };

Method parse_method(std::string_view name);
const char* to_string(Method m);

struct SamplerConfig {
  double dt = 1e-4;
  double horizon = 0.0;  // 0: derive from tail_delta
  double tail_delta = 1e-4;
  double epsilon_loc = 0.0;  // 0: 2 sqrt(dt)
  bool bridge_refine = false;
  double t_stop = 0.0;  // exact sampler: stop the grid here if > 0

  double epsilon() const;
};

// Smallest horizon with 1 - F_sigma(horizon) <= tail_delta.
double horizon_for(const ModelParams& p, double tail_delta);

double sample_sigma(const ModelParams& p, RngStream& rng);

// Bridge 0 -> z on [0, sigma] through the given nodes (sorted, nonnegative,
// starting at 0). Nodes at or after sigma read z; sigma is inserted as a node
// when it lies inside the node range.
void sample_exact_on(const ModelParams& p, RngStream& rng, double sigma,
                     std::span<const double> times, PathGrid& out);

// Uniform grid of step dt up to the first node at or past sigma (or t_stop).
void sample_exact_path(const ModelParams& p, RngStream& rng, double dt, PathGrid& out,
                       double t_stop = 0.0);
PathGrid sample_exact_path(const ModelParams& p, RngStream& rng, double dt);

// Splits every pre-sigma cell that may meet [level - halfwidth, level + halfwidth]
// into `factor` pieces, filled with Brownian bridges between the cell ends.
// Exact in law for paths from the exact sampler.
void refine_near(RngStream& rng, double level, double halfwidth, int factor, const PathGrid& in,
                 PathGrid& out);

// Supremum of the continuous path given its nodes: per cell the maximum of a
// Brownian bridge between the node values, drawn exactly.
double bridge_supremum(const PathGrid& path, RngStream& rng);

void sample_bruteforce_path(const ModelParams& p, RngStream& rng, const SamplerConfig& cfg,
                            PathGrid& out);
PathGrid sample_bruteforce_path(const ModelParams& p, RngStream& rng, const SamplerConfig& cfg);

void sample_killed_bangbang_path(const ModelParams& p, RngStream& rng, const SamplerConfig& cfg,
                                 PathGrid& out);
PathGrid sample_killed_bangbang_path(const ModelParams& p, RngStream& rng,
                                     const SamplerConfig& cfg);

// Path i of a batch uses RngStream(seed, base_stream + i), whatever the batching.
void sample_path(const ModelParams& p, std::uint64_t seed, std::uint64_t stream_id,
                 const SamplerConfig& cfg, Method m, PathGrid& out);

std::vector<PathGrid> path_batch(const ModelParams& p, std::uint64_t seed,
                                 std::uint64_t base_stream, const SamplerConfig& cfg,
                                 std::size_t n, Method m);

// Streams paths first..first+count-1 through one reused buffer.
void for_each_path(const ModelParams& p, std::uint64_t seed, std::uint64_t base_stream,
                   std::size_t first, std::size_t count, const SamplerConfig& cfg, Method m,
                   const std::function<void(std::size_t, const PathGrid&)>& visit);

struct PathSidecar {
  double lambda, z, dt;
  Method method;
  std::uint64_t seed, stream_id;
};

// CSV `t,value` plus a JSON sidecar next to it (same stem, .json).
void write_path_csv(const std::filesystem::path& csv, const PathGrid& path,
                    const PathSidecar& info);

}  // namespace lastpass
