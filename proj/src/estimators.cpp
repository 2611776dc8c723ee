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

#include "lastpass/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lastpass/analytic.hpp"
#include "lastpass/kernels.hpp"
#include "lastpass/simd.hpp"
#include "lastpass/special.hpp"

namespace lastpass {

namespace {

struct MeanSe {
  double mean, se;
};

MeanSe batch_means(std::span<const double> y) {
  const std::size_t n = y.size();
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double bm[kBatches];
  for (int b = 0; b < kBatches; ++b) {
    const std::size_t lo = n * b / kBatches, hi = n * (b + 1) / kBatches;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += y[i];
    bm[b] = hi > lo ? s / static_cast<double>(hi - lo) : 0.0;
  }
  const double m = std::accumulate(bm, bm + kBatches, 0.0) / kBatches;
  double ss = 0.0;
  for (double v : bm) ss += (v - m) * (v - m);
  return {mean, std::sqrt(ss / (kBatches - 1) / kBatches)};
}

double z_score(const MeanSe& m) {
  if (m.se > 0.0) return m.mean / m.se;
  return m.mean == 0.0 ? 0.0 : std::copysign(kInf, m.mean);
}

double band_cell(double a, double b, double h, double lo, double hi) {
  const double mn = std::min(a, b), mx = std::max(a, b);
  const double span = mx - mn;
  if (span > 0.0) return h * std::max(std::min(mx, hi) - std::max(mn, lo), 0.0) / span;
  return (mn > lo && mn < hi) ? h : 0.0;
}

// Index of the last node at or before sigma (the sigma node when present).
std::size_t last_live(const PathGrid& g) {
  if (g.absorbed_index) return *g.absorbed_index;
  return g.size() - 1;
}

}  // namespace

Ecdf::Ecdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw UsageError("ecdf of an empty sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double x) const {
  const auto k = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
  return static_cast<double>(k) / static_cast<double>(sorted_.size());
}

Ecdf ecdf(std::vector<double> samples) { return Ecdf(std::move(samples)); }

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    const double c = -M_PI * M_PI / (8.0 * x * x);
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double j = 2.0 * k - 1.0;
      s += std::exp(c * j * j);
    }
    return 1.0 - std::sqrt(2.0 * M_PI) / x * s;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_critical(std::size_t n, double alpha) {
  double lo = 0.2, hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_sf(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) / std::sqrt(static_cast<double>(n));
}

double ks_distance(const Ecdf& e, const std::function<double(double)>& cdf) {
  const auto& x = e.sorted();
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

TestReport ks_test(const Ecdf& e, const std::function<double(double)>& cdf,
                   const std::string& name) {
  TestReport r;
  r.name = name;
  r.n = static_cast<long long>(e.n());
  r.statistic = ks_distance(e, cdf);
  r.p_value_or_error = kolmogorov_sf(std::sqrt(static_cast<double>(e.n())) * r.statistic);
  r.verdict = r.p_value_or_error > kKsAlpha ? Verdict::Pass : Verdict::Fail;
  r.metadata["alpha"] = kKsAlpha;
  r.metadata["critical_D"] = ks_critical(e.n());
  r.metadata["rule"] = "PASS iff asymptotic p > alpha";
  return r;
}

std::array<double, 3> local_time_ladder(const PathGrid& g, double level, double u,
                                        double t_begin, double t_end) {
  std::array<double, 3> occ{0.0, 0.0, 0.0};
  const double eps[3] = {4.0 * u, 2.0 * u, u};
  if (g.size() < 2) return occ;
  const std::size_t live = last_live(g);
  const double hi = std::min({t_end, g.sigma, g.times[live]});
  if (!(hi > t_begin)) return occ;
  const auto& t = g.times;
  const auto& v = g.values;
  auto interp = [&](std::size_t j, double s) {
    return v[j - 1] + (s - t[j - 1]) / (t[j] - t[j - 1]) * (v[j] - v[j - 1]);
  };
  const std::size_t i0 = static_cast<std::size_t>(
      std::lower_bound(t.begin(), t.begin() + live + 1, t_begin) - t.begin());
  const std::size_t i1 = static_cast<std::size_t>(
      std::upper_bound(t.begin(), t.begin() + live + 1, hi) - t.begin()) - 1;
  if (i0 > i1) {
    // Window inside one cell.
    const double tt[2] = {t_begin, hi}, vv[2] = {interp(i0, t_begin), interp(i0, hi)};
    simd::band_occupation(tt, vv, 2, level, eps, occ.data());
  } else {
    if (i0 > 0 && t[i0] > t_begin) {
      const double tt[2] = {t_begin, t[i0]}, vv[2] = {interp(i0, t_begin), v[i0]};
      simd::band_occupation(tt, vv, 2, level, eps, occ.data());
    }
    simd::band_occupation(t.data() + i0, v.data() + i0, i1 - i0 + 1, level, eps, occ.data());
    if (t[i1] < hi) {
      const double tt[2] = {t[i1], hi}, vv[2] = {v[i1], interp(i1 + 1, hi)};
      simd::band_occupation(tt, vv, 2, level, eps, occ.data());
    }
  }
  for (int k = 0; k < 3; ++k) occ[k] /= 2.0 * eps[k];
  return occ;
}

double local_time_estimate(const PathGrid& g, double level, double epsilon, double t_begin,
                           double t_end) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  // Rung 2 of the ladder has width exactly eps_unit.
  return local_time_ladder(g, level, epsilon, t_begin, t_end)[2];
}

double extrapolate_ladder(const std::array<double, 3>& y) { return y[2] + 0.5 * (y[1] - y[0]); }

std::vector<double> extrapolate_quantiles(std::vector<double> wide, std::vector<double> mid,
                                          std::vector<double> narrow) {
  if (wide.size() != mid.size() || mid.size() != narrow.size()) {
    throw UsageError("ladder samples differ in size");
  }
  std::sort(wide.begin(), wide.end());
  std::sort(mid.begin(), mid.end());
  std::sort(narrow.begin(), narrow.end());
  std::vector<double> out(wide.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = extrapolate_ladder({wide[i], mid[i], narrow[i]});
  }
  std::sort(out.begin(), out.end());
  return out;
}

double quad_var_estimate(const PathGrid& g, double t) {
  if (g.size() == 0 || t > g.times.back()) throw UsageError("time beyond the sampled grid");
  const auto j = static_cast<std::size_t>(
      std::upper_bound(g.times.begin(), g.times.end(), t) - g.times.begin());
  double qv = simd::sum_sq_increments(g.values.data(), j);
  if (j < g.size() && g.times[j - 1] < t) {
    const double w = (t - g.times[j - 1]) / (g.times[j] - g.times[j - 1]);
    const double d = w * (g.values[j] - g.values[j - 1]);
    qv += d * d;
  }
  return qv;
}

TestReport martingale_ztest(std::span<const double> x, std::span<const double> w,
                            const std::string& name) {
  if (!w.empty() && w.size() != x.size()) throw UsageError("weights and samples differ in size");
  TestReport r;
  r.name = name;
  r.n = static_cast<long long>(x.size());
  r.metadata["z_cut"] = kZCut;
  r.metadata["batches"] = kBatches;
  r.metadata["rule"] = "PASS iff |z| < z_cut; INCONCLUSIVE if n < 30";
  if (x.size() < 30) {
    r.verdict = Verdict::Inconclusive;
    return r;
  }
  std::vector<double> y(x.begin(), x.end());
  if (!w.empty()) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= w[i];
  }
  const MeanSe m = batch_means(y);
  r.statistic = z_score(m);
  r.p_value_or_error = 2.0 * normal_cdf(-std::abs(r.statistic));
  r.metadata["mean"] = m.mean;
  r.metadata["se"] = m.se;
  r.verdict = std::abs(r.statistic) < kZCut ? Verdict::Pass : Verdict::Fail;
  return r;
}

CompensatorAccumulator::CompensatorAccumulator(const ModelParams& p, std::vector<double> t_grid,
                                               double eps_unit)
    : p_(p), t_grid_(std::move(t_grid)), eps_unit_(eps_unit), samples_(t_grid_.size()) {}

void CompensatorAccumulator::add(const PathGrid& g) {
  for (std::size_t k = 0; k < t_grid_.size(); ++k) {
    const double t = t_grid_[k];
    const double hit = g.sigma <= t ? 1.0 : 0.0;
    const double local = extrapolate_ladder(local_time_ladder(g, p_.z, eps_unit_, 0.0, t));
    samples_[k].push_back(hit - p_.lambda * local);
  }
}

TestReport CompensatorAccumulator::finish() const {
  TestReport r;
  r.name = "compensator";
  r.verdict = Verdict::Pass;
  double worst = 0.0;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < t_grid_.size(); ++k) {
    const TestReport z = martingale_ztest(samples_[k]);
    r.n = z.n;
    worst = std::max(worst, std::abs(z.statistic));
    if (z.verdict == Verdict::Fail) r.verdict = Verdict::Fail;
    if (z.verdict == Verdict::Inconclusive && r.verdict == Verdict::Pass) {
      r.verdict = Verdict::Inconclusive;
    }
    rows.push_back({{"t", t_grid_[k]}, {"mean", z.metadata.value("mean", 0.0)},
                    {"se", z.metadata.value("se", 0.0)}, {"z", z.statistic}});
  }
  r.statistic = worst;
  r.p_value_or_error = 2.0 * normal_cdf(-worst);
  r.metadata["eps_ladder"] = {4.0 * eps_unit_, 2.0 * eps_unit_, eps_unit_};
  r.metadata["z_cut"] = kZCut;
  r.metadata["rule"] = "PASS iff |z| < z_cut at every t";
  r.metadata["per_t"] = rows;
  return r;
}

TestReport compensator_residual(const ModelParams& p, std::span<const PathGrid> paths,
                                const std::vector<double>& t_grid, double eps_unit) {
  CompensatorAccumulator acc(p, t_grid, eps_unit);
  for (const auto& g : paths) acc.add(g);
  return acc.finish();
}

JumpScanAccumulator::JumpScanAccumulator(const ModelParams& p, double fake_jump)
    : p_(p), fake_jump_(fake_jump) {}

void JumpScanAccumulator::add(const PathGrid& g) {
  ++paths_;
  if (g.size() < 2) return;
  const std::size_t live = last_live(g);
  const double dt = g.times[1] - g.times[0];
  static constexpr std::size_t kStride[3] = {4, 2, 1};
  for (int k = 0; k < 3; ++k) {
    const std::size_t s = kStride[k];
    const double eps = 2.0 * std::sqrt(dt * static_cast<double>(s));
    const double lo = p_.z - eps, hi = p_.z + eps;
    double best = 0.0;
    std::size_t i = 0;
    while (i < live) {
      const std::size_t j = std::min(i + s, live);
      double inc = p_.lambda * band_cell(g.values[i], g.values[j], g.times[j] - g.times[i], lo, hi) /
                   (2.0 * eps);
      if (j == live && g.absorbed_index) inc += fake_jump_;
      best = std::max(best, inc);
      i = j;
    }
    max_inc_[k] = std::max(max_inc_[k], best);
  }
  if (!g.absorbed_index) return;
  int drops = 0, rises = 0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const int a = g.times[i - 1] < g.sigma, b = g.times[i] < g.sigma;
    drops += a && !b;
    rises += !a && b;
  }
  bool ok = drops == 1 && rises == 0 && g.times[*g.absorbed_index] == g.sigma;
  for (std::size_t i = *g.absorbed_index; ok && i < g.size(); ++i) ok = g.values[i] == p_.z;
  if (!ok) ++bad_jumps_;
}

TestReport JumpScanAccumulator::finish() const {
  TestReport r;
  r.name = "jump-scan";
  r.n = paths_;
  const double r42 = max_inc_[0] / max_inc_[1], r21 = max_inc_[1] / max_inc_[2];
  r.statistic = std::min(r42, r21);
  r.p_value_or_error = max_inc_[2];
  const bool shrinking = r42 >= 1.2 && r21 >= 1.2;
  r.verdict = shrinking && bad_jumps_ == 0 ? Verdict::Pass : Verdict::Fail;
  r.metadata["max_increment_stride4_2_1"] = {max_inc_[0], max_inc_[1], max_inc_[2]};
  r.metadata["refinement_ratios"] = {r42, r21};
  r.metadata["min_ratio"] = 1.2;
  r.metadata["bad_first_coordinate_paths"] = bad_jumps_;
  r.metadata["rule"] = "PASS iff every refinement ratio >= min_ratio and every path drops once, at sigma";
  return r;
}

TestReport jump_scan(const ModelParams& p, std::span<const PathGrid> paths, double fake_jump) {
  JumpScanAccumulator acc(p, fake_jump);
  for (const auto& g : paths) acc.add(g);
  return acc.finish();
}

TestReport strong_markov_violation_test(const ModelParams& p, std::uint64_t seed,
                                        std::uint64_t base_stream, std::size_t n, double dt) {
  std::vector<double> hits(n, 0.0);
  long long early = 0, absorbed_early = 0;
  double absorbed_sum = 0.0;
  PathGrid g;
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(seed, base_stream + i);
    sample_exact_path(p, rng, dt, g, 1.0);
    std::size_t j = 0;
    while (j < g.size() && g.values[j] < p.z) ++j;
    if (j == g.size()) continue;
    const double a = g.values[j - 1], b = g.values[j];
    const double first = g.times[j - 1] + (g.times[j] - g.times[j - 1]) * (p.z - a) / (b - a);
    if (first > 1.0) continue;
    ++early;
    const bool alive = g.sigma > first + 1.0;
    hits[i] = alive ? 1.0 : 0.0;
    if (!alive) {
      ++absorbed_early;
      absorbed_sum += hits[i];
    }
  }
  const MeanSe m = batch_means(hits);
  const double bound = strong_markov_violation_bound(p);
  TestReport r;
  r.name = "strong-markov";
  r.n = static_cast<long long>(n);
  r.statistic = m.mean;
  r.p_value_or_error = m.se;
  const bool positive = m.mean - kZCut * m.se > 0.0;
  const bool reaches = m.mean + kZCut * m.se >= bound;
  r.verdict = positive && reaches ? Verdict::Pass : Verdict::Fail;
  r.metadata["bound"] = bound;
  r.metadata["dt"] = dt;
  r.metadata["first_passage_by_1"] = early;
  r.metadata["control_absorbed_paths"] = absorbed_early;
  r.metadata["control_mean"] = absorbed_early ? absorbed_sum / absorbed_early : 0.0;
  r.metadata["z_cut"] = kZCut;
  r.metadata["rule"] = "PASS iff p - z_cut*se > 0 and p + z_cut*se >= bound";
  return r;
}

}  // namespace lastpass
