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

#include "lastpass/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "lastpass/analytic.hpp"

namespace lastpass {

namespace {

// times holds the nodes; values come out as the bridge 0 -> z pinned at sigma.
void fill_bridge(const ModelParams& p, RngStream& rng, double sigma, PathGrid& out) {
  auto& t = out.times;
  auto& v = out.values;
  const std::size_t m = static_cast<std::size_t>(
      std::lower_bound(t.begin(), t.end(), sigma) - t.begin());
  v.assign(m + 1, 0.0);
  rng.normals(std::span<double>(v.data() + 1, m));
  double w = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    w += std::sqrt(t[i] - t[i - 1]) * v[i];
    v[i] = w;
  }
  const double w_sigma = w + std::sqrt(sigma - t[m - 1]) * v[m];
  const double pull = (w_sigma - p.z) / sigma;
  v[0] = 0.0;
  for (std::size_t i = 1; i < m; ++i) v[i] -= t[i] * pull;
  v.resize(m);
  out.sigma = sigma;
  out.absorbed_index.reset();
  if (m < t.size()) {
    if (t[m] != sigma) t.insert(t.begin() + static_cast<std::ptrdiff_t>(m), sigma);
    v.resize(t.size(), p.z);
    out.absorbed_index = m;
  }
}

double band_segment(double a, double b, double h, double lo, double hi) {
  const double mn = std::min(a, b), mx = std::max(a, b);
  const double span = mx - mn;
  if (span > 0.0) return h * std::max(std::min(mx, hi) - std::max(mn, lo), 0.0) / span;
  return (mn > lo && mn < hi) ? h : 0.0;
}

}  // namespace

double PathGrid::value_at(double t, double z) const {
  if (t >= sigma) return z;
  if (!times.empty() && t == times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.end()) throw UsageError("time beyond the sampled grid");
  const std::size_t j = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
  return values[j - 1] + w * (values[j] - values[j - 1]);
}

void PathGrid::clear() {
  times.clear();
  values.clear();
  sigma = 0.0;
  absorbed_index.reset();
  truncation_suspect = false;
}

Method parse_method(std::string_view name) {
  if (name == "exact") return Method::Exact;
  if (name == "bruteforce") return Method::BruteForce;
  if (name == "bangbang") return Method::BangBang;
  throw UsageError("unknown method '" + std::string(name) +
                   "' (valid: exact, bruteforce, bangbang)");
}

const char* to_string(Method m) {
  switch (m) {
    case Method::Exact: return "exact";
    case Method::BruteForce: return "bruteforce";
    case Method::BangBang: return "bangbang";
  }
  return "?";
}

double SamplerConfig::epsilon() const { return epsilon_loc > 0.0 ? epsilon_loc : 2.0 * std::sqrt(dt); }

double horizon_for(const ModelParams& p, double tail_delta) {
  if (!(tail_delta > 0.0 && tail_delta < 1.0)) throw ConfigError("tail_delta must lie in (0,1)");
  return sigma_cdf_inverse(p, 1.0 - tail_delta);
}

double sample_sigma(const ModelParams& p, RngStream& rng) {
  return sigma_cdf_inverse(p, rng.uniform());
}

void sample_exact_on(const ModelParams& p, RngStream& rng, double sigma,
                     std::span<const double> times, PathGrid& out) {
  if (times.empty() || times[0] != 0.0) throw UsageError("grid must start at 0");
  out.clear();
  out.times.assign(times.begin(), times.end());
  fill_bridge(p, rng, sigma, out);
}

void sample_exact_path(const ModelParams& p, RngStream& rng, double dt, PathGrid& out,
                       double t_stop) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const double sigma = sample_sigma(p, rng);
  const double end = t_stop > 0.0 ? std::min(sigma, t_stop) : sigma;
  auto k = static_cast<std::size_t>(std::ceil(end / dt));
  if (static_cast<double>(k) * dt < end) ++k;
  out.clear();
  out.times.resize(k + 1);
  for (std::size_t i = 0; i <= k; ++i) out.times[i] = static_cast<double>(i) * dt;
  fill_bridge(p, rng, sigma, out);
}

PathGrid sample_exact_path(const ModelParams& p, RngStream& rng, double dt) {
  PathGrid g;
  sample_exact_path(p, rng, dt, g);
  return g;
}

void refine_near(RngStream& rng, double level, double halfwidth, int factor, const PathGrid& in,
                 PathGrid& out) {
  out.clear();
  out.sigma = in.sigma;
  out.truncation_suspect = in.truncation_suspect;
  const std::size_t n = in.size();
  double noise[64];
  const int inner = std::min(factor, 65) - 1;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = in.values[i], b = in.values[i + 1];
    const double t0 = in.times[i], t1 = in.times[i + 1];
    out.times.push_back(t0);
    out.values.push_back(a);
    if (inner < 1 || t1 > in.sigma) continue;
    if (std::min(a, b) > level + halfwidth || std::max(a, b) < level - halfwidth) continue;
    rng.normals(std::span<double>(noise, static_cast<std::size_t>(inner)));
    double s = t0, x = a;
    for (int j = 1; j <= inner; ++j) {
      const double sj = t0 + (t1 - t0) * j / (inner + 1);
      const double rest = t1 - s;
      const double mean = x + (sj - s) / rest * (b - x);
      const double var = (sj - s) * (t1 - sj) / rest;
      x = mean + std::sqrt(var) * noise[j - 1];
      s = sj;
      out.times.push_back(s);
      out.values.push_back(x);
    }
  }
  if (n > 0) {
    out.times.push_back(in.times[n - 1]);
    out.values.push_back(in.values[n - 1]);
  }
  if (in.absorbed_index) {
    out.absorbed_index = static_cast<std::size_t>(
        std::lower_bound(out.times.begin(), out.times.end(), in.sigma) - out.times.begin());
  }
}

double bridge_supremum(const PathGrid& path, RngStream& rng) {
  const std::size_t n = path.size();
  double best = path.values.empty() ? 0.0 : path.values[0];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = path.values[i], b = path.values[i + 1];
    const double h = path.times[i + 1] - path.times[i];
    double m = std::max(a, b);
    if (path.times[i + 1] <= path.sigma && h > 0.0) {
      const double d = b - a;
      m = 0.5 * (a + b + std::sqrt(d * d - 2.0 * h * std::log(rng.uniform())));
    }
    best = std::max(best, m);
  }
  return best;
}

void sample_bruteforce_path(const ModelParams& p, RngStream& rng, const SamplerConfig& cfg,
                            PathGrid& out) {
  const double dt = cfg.dt;
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const double horizon = cfg.horizon > 0.0 ? cfg.horizon : horizon_for(p, cfg.tail_delta);
  if (1.0 - sigma_cdf(p, horizon) > cfg.tail_delta * (1.0 + 1e-6)) {
    throw ConfigError("horizon leaves more than tail_delta of the sigma law uncovered");
  }
  const auto k = static_cast<std::size_t>(std::ceil(horizon / dt));
  out.clear();
  auto& v = out.values;
  v.assign(k + 1, 0.0);
  rng.normals(std::span<double>(v.data() + 1, k));
  const double drift = p.lambda * dt, sd = std::sqrt(dt);
  for (std::size_t i = 1; i <= k; ++i) v[i] = v[i - 1] + (drift + sd * v[i]);

  // Last cell whose end values straddle or touch z.
  std::size_t cell = k;
  for (std::size_t i = k; i-- > 0;) {
    if ((v[i] - p.z) * (v[i + 1] - p.z) <= 0.0) {
      cell = i;
      break;
    }
  }
  const double terminal = v[k];
  auto node = [dt](std::size_t i) { return static_cast<double>(i) * dt; };
  double sigma;
  if (cfg.bridge_refine) {
    // A Brownian bridge between two values above z dips to z with probability
    // exp(-2 (a - z)(b - z) / dt); scan back from the horizon.
    const std::size_t stop = cell == k ? 0 : cell + 1;
    for (std::size_t i = k; i-- > stop;) {
      const double pa = v[i] - p.z, pb = v[i + 1] - p.z;
      if (pa > 0.0 && pb > 0.0 && rng.uniform() < std::exp(-2.0 * pa * pb / dt)) {
        cell = i;
        break;
      }
    }
  }
  if (cell == k) {
    sigma = horizon;
    v.resize(k + 1);
    out.times.resize(k + 1);
    for (std::size_t i = 0; i <= k; ++i) out.times[i] = node(i);
    out.truncation_suspect = true;
  } else {
    const double a = v[cell], b = v[cell + 1];
    double w = (a != b) ? (p.z - a) / (b - a) : 0.0;
    if (!(w >= 0.0 && w <= 1.0)) w = 0.5;  // bridge-refined cell above z
    sigma = node(cell) + w * dt;
    out.times.resize(cell + 1);
    for (std::size_t i = 0; i <= cell; ++i) out.times[i] = node(i);
    v.resize(cell + 1);
    std::size_t ai = cell + 1;
    if (sigma > out.times[cell]) {
      out.times.push_back(sigma);
      v.push_back(p.z);
    } else {
      v[cell] = p.z;
      ai = cell;
    }
    out.times.push_back(node(cell + 1));
    v.push_back(p.z);
    out.absorbed_index = ai;
  }
  out.sigma = sigma;
  const double margin = -std::log(cfg.tail_delta) / (2.0 * p.lambda);
  if (terminal < p.z + margin) out.truncation_suspect = true;
}

PathGrid sample_bruteforce_path(const ModelParams& p, RngStream& rng, const SamplerConfig& cfg) {
  PathGrid g;
  sample_bruteforce_path(p, rng, cfg, g);
  return g;
}

void sample_killed_bangbang_path(const ModelParams& p, RngStream& rng, const SamplerConfig& cfg,
                                 PathGrid& out) {
  const double dt = cfg.dt;
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const double eps = cfg.epsilon();
  const double threshold = rng.exponential(p.lambda);
  const double cap = horizon_for(p, 1e-15) * 4.0;
  const double sd = std::sqrt(dt), lo = p.z - eps, hi = p.z + eps;
  out.clear();
  out.times.push_back(0.0);
  out.values.push_back(0.0);
  double noise[4096];
  std::size_t used = 4096;
  double x = 0.0, local = 0.0;
  for (std::size_t i = 0;; ++i) {
    const double t0 = static_cast<double>(i) * dt, t1 = static_cast<double>(i + 1) * dt;
    if (t0 > cap) {
      out.sigma = t0;
      out.truncation_suspect = true;
      return;
    }
    if (used == 4096) {
      rng.normals(noise);
      used = 0;
    }
    const double sgn = x < p.z ? 1.0 : (x > p.z ? -1.0 : 0.0);
    const double y = x + (p.lambda * sgn * dt + sd * noise[used++]);
    const double dl = band_segment(x, y, t1 - t0, lo, hi) / (2.0 * eps);
    if (dl > 0.0 && local + dl >= threshold) {
      const double sigma = t0 + (t1 - t0) * ((threshold - local) / dl);
      std::size_t ai = out.times.size();
      if (sigma > t0) {
        out.times.push_back(sigma);
        out.values.push_back(p.z);
      } else {
        out.values.back() = p.z;
        ai -= 1;
      }
      out.times.push_back(t1);
      out.values.push_back(p.z);
      out.sigma = sigma;
      out.absorbed_index = ai;
      return;
    }
    local += dl;
    x = y;
    out.times.push_back(t1);
    out.values.push_back(x);
  }
}

PathGrid sample_killed_bangbang_path(const ModelParams& p, RngStream& rng,
                                     const SamplerConfig& cfg) {
  PathGrid g;
  sample_killed_bangbang_path(p, rng, cfg, g);
  return g;
}

void sample_path(const ModelParams& p, std::uint64_t seed, std::uint64_t stream_id,
                 const SamplerConfig& cfg, Method m, PathGrid& out) {
  RngStream rng(seed, stream_id);
  switch (m) {
    case Method::Exact: sample_exact_path(p, rng, cfg.dt, out, cfg.t_stop); break;
    case Method::BruteForce: sample_bruteforce_path(p, rng, cfg, out); break;
    case Method::BangBang: sample_killed_bangbang_path(p, rng, cfg, out); break;
  }
}

std::vector<PathGrid> path_batch(const ModelParams& p, std::uint64_t seed,
                                 std::uint64_t base_stream, const SamplerConfig& cfg,
                                 std::size_t n, Method m) {
  if (n < 1) throw UsageError("batch size must be positive");
  std::vector<PathGrid> out(n);
  for (std::size_t i = 0; i < n; ++i) sample_path(p, seed, base_stream + i, cfg, m, out[i]);
  return out;
}

void for_each_path(const ModelParams& p, std::uint64_t seed, std::uint64_t base_stream,
                   std::size_t first, std::size_t count, const SamplerConfig& cfg, Method m,
                   const std::function<void(std::size_t, const PathGrid&)>& visit) {
  PathGrid g;
  for (std::size_t i = first; i < first + count; ++i) {
    sample_path(p, seed, base_stream + i, cfg, m, g);
    visit(i, g);
  }
}

void write_path_csv(const std::filesystem::path& csv, const PathGrid& path,
                    const PathSidecar& info) {
  std::FILE* f = std::fopen(csv.c_str(), "wb");
  if (!f) throw ConfigError("cannot write " + csv.string());
  std::fputs("t,value\n", f);
  for (std::size_t i = 0; i < path.size(); ++i) {
    std::fprintf(f, "%.17g,%.17g\n", path.times[i], path.values[i]);
  }
  const bool ok = std::fclose(f) == 0;
  if (!ok) throw ConfigError("write failed: " + csv.string());

  nlohmann::ordered_json j;
  j["sigma"] = path.sigma;
  j["lambda"] = info.lambda;
  j["z"] = info.z;
  j["dt"] = info.dt;
  j["method"] = to_string(info.method);
  j["seed"] = info.seed;
  j["stream_id"] = info.stream_id;
  auto side = csv;
  side.replace_extension(".json");
  std::ofstream js(side, std::ios::binary);
  js << j.dump(2) << '\n';
  if (!js) throw ConfigError("write failed: " + side.string());
}

}  // namespace lastpass
