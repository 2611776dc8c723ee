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

#include "lastpass/pde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "lastpass/estimators.hpp"
#include "lastpass/simd.hpp"
#include "lastpass/special.hpp"

namespace lastpass {

namespace {

constexpr int kGhost = 2;

struct Row {
  double c[5];
};

// dt * (b D1 + D2 / 2) as five weights on u[i-2..i+2].
Row row(double lam_signed, double dy, double dt, int order, bool upwind) {
  Row r{{0.0, 0.0, 0.0, 0.0, 0.0}};
  const double d2 = dt / (2.0 * dy * dy);
  r.c[1] += d2;
  r.c[2] -= 2.0 * d2;
  r.c[3] += d2;
  const double a = lam_signed * dt / dy;
  if (!upwind) {
    r.c[1] -= 0.5 * a;
    r.c[3] += 0.5 * a;
  } else if (lam_signed > 0.0) {
    if (order == 2) {
      r.c[2] += -1.5 * a;
      r.c[3] += 2.0 * a;
      r.c[4] += -0.5 * a;
    } else {
      r.c[2] -= a;
      r.c[3] += a;
    }
  } else {
    if (order == 2) {
      r.c[0] += 0.5 * a;
      r.c[1] += -2.0 * a;
      r.c[2] += 1.5 * a;
    } else {
      r.c[1] -= a;
      r.c[2] += a;
    }
  }
  return r;
}

std::string scheme_name(const SchemeConfig& s) {
  std::string n = s.upwind ? "upwind" + std::to_string(s.upwind_order) : "centred";
  n += s.boundary == Boundary::Oracle ? "/oracle-boundary" : "/zero-boundary";
  n += s.interface == Interface::OracleValue ? "/oracle-interface" : "/half-laplacian-interface";
  return n;
}

}  // namespace

Grid1D::Grid1D(const ModelParams& p, double lo, double hi, int n) : y_min(lo), y_max(hi), n_y(n) {
  if (n < 3 || !(lo < p.z && p.z < hi)) throw ConfigError("grid must have n_y >= 3 and y_min < z < y_max");
  dy = (hi - lo) / (n - 1);
  const double k = (p.z - lo) / dy;
  z_index = static_cast<int>(std::lround(k));
  if (std::abs(k - z_index) > 1e-9 || z_index < 1 || z_index > n - 2) {
    throw ConfigError("z is not an interior grid node");
  }
  nodes.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) nodes[static_cast<std::size_t>(i)] = lo + i * dy;
  nodes[static_cast<std::size_t>(z_index)] = p.z;
}

double stability_limit(const ModelParams& p, double dy, const SchemeConfig& s) {
  if (!s.upwind) return p.lambda * dy <= 1.0 ? dy * dy : 0.0;
  if (s.upwind_order == 2) return dy * dy / (1.0 + 2.0 * p.lambda * dy);
  return dy * dy / (1.0 + p.lambda * dy);
}

GridFunction solve_kbe(const ModelParams& p, const TestFunction& h_in, double t_end,
                       const Grid1D& grid, const SchemeConfig& scheme) {
  if (!(t_end >= 0.0)) throw DomainError("t_end must be nonnegative");
  if (scheme.upwind && scheme.upwind_order != 1 && scheme.upwind_order != 2) {
    throw ConfigError("upwind_order must be 1 or 2");
  }
  const TestFunction h = with_fd_derivatives(h_in);
  const double tol = 1e-12;
  if (std::abs(h.h(0, p.z)) > tol || std::abs(h.h(1, p.z)) > tol || std::abs(h.dh(p.z)) > tol) {
    throw DomainError("test function violates h(0,z) = h(1,z) = dh(1,z) = 0");
  }
  const double limit = stability_limit(p, grid.dy, scheme);
  if (!(limit > 0.0)) throw ConfigError("centred scheme needs lambda * dy <= 1");
  double dt = scheme.dt_pde > 0.0 ? scheme.dt_pde : 0.9 * limit;
  if (dt > limit) throw ConfigError("dt_pde exceeds the stability limit");

  const int n = grid.n_y, zi = grid.z_index;
  GridFunction out;
  out.branch0.resize(static_cast<std::size_t>(n));
  out.branch1.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.branch0[static_cast<std::size_t>(i)] = h.h(0, grid.nodes[static_cast<std::size_t>(i)]);
  }
  std::vector<double> u(static_cast<std::size_t>(n + 2 * kGhost), 0.0), next(u.size(), 0.0);
  for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i + kGhost)] = h.h(1, grid.nodes[static_cast<std::size_t>(i)]);

  const long steps = t_end > 0.0 ? static_cast<long>(std::ceil(t_end / dt)) : 0;
  if (steps > 0) dt = t_end / static_cast<double>(steps);
  const int order = scheme.upwind_order;
  const Row below = row(p.lambda, grid.dy, dt, order, scheme.upwind);
  const Row above = row(-p.lambda, grid.dy, dt, order, scheme.upwind);
  const Row below1 = row(p.lambda, grid.dy, dt, 1, scheme.upwind);
  const Row above1 = row(-p.lambda, grid.dy, dt, 1, scheme.upwind);
  const double half_lap = dt / (2.0 * grid.dy * grid.dy);
  auto at = [](int i) { return static_cast<std::size_t>(i + kGhost); };
  auto Q = [&](double t, double y) { return semigroup_Q(p, t, {1, y}, h); };

  for (long s = 1; s <= steps; ++s) {
    const double t = dt * static_cast<double>(s);
    simd::stencil5(u.data(), next.data(), at(1), at(zi - 1), below.c);
    simd::stencil5(u.data(), next.data(), at(zi - 1), at(zi), below1.c);
    simd::stencil5(u.data(), next.data(), at(zi + 1), at(zi + 2), above1.c);
    simd::stencil5(u.data(), next.data(), at(zi + 2), at(n - 1), above.c);
    if (scheme.interface == Interface::OracleValue) {
      next[at(zi)] = Q(t, p.z);
    } else {
      next[at(zi)] = u[at(zi)] + half_lap * ((u[at(zi - 1)] - 2.0 * u[at(zi)]) + u[at(zi + 1)]);
    }
    if (scheme.boundary == Boundary::Oracle) {
      next[at(0)] = Q(t, grid.y_min);
      next[at(n - 1)] = Q(t, grid.y_max);
    } else {
      next[at(0)] = 0.0;
      next[at(n - 1)] = 0.0;
    }
    std::swap(u, next);
  }
  for (int i = 0; i < n; ++i) out.branch1[static_cast<std::size_t>(i)] = u[at(i)];
  out.time = t_end;
  return out;
}

TestReport interior_residual(const ModelParams& p, const TestFunction& h, double t,
                             std::span<const double> probes, bool flip_drift) {
  constexpr double kStepT = 1e-3, kStepY = 1e-3, kTol = 1e-4;
  if (!(t > kStepT)) throw DomainError("t must exceed the time step");
  auto Q = [&](double s, double y) { return semigroup_Q(p, s, {1, y}, h); };
  double worst = 0.0;
  auto rows = nlohmann::ordered_json::array();
  for (double y : probes) {
    if (std::abs(y - p.z) < 2.0 * kStepY) throw UsageError("probe too close to z");
    const double dtq = (Q(t + kStepT, y) - Q(t - kStepT, y)) / (2.0 * kStepT);
    const double q0 = Q(t, y), qp = Q(t, y + kStepY), qm = Q(t, y - kStepY);
    double b = y < p.z ? p.lambda : -p.lambda;
    if (flip_drift) b = -b;
    const double aq = b * (qp - qm) / (2.0 * kStepY) + 0.5 * ((qp - 2.0 * q0) + qm) / (kStepY * kStepY);
    const double res = std::abs(dtq - aq);
    worst = std::max(worst, res);
    rows.push_back({{"y", y}, {"residual", res}});
  }
  TestReport r;
  r.name = "pde-interior";
  r.n = static_cast<long long>(probes.size());
  r.statistic = worst;
  r.p_value_or_error = worst;
  r.verdict = worst <= kTol ? Verdict::Pass : Verdict::Fail;
  r.metadata["tolerance"] = kTol;
  r.metadata["fd_step_t"] = kStepT;
  r.metadata["fd_step_y"] = kStepY;
  r.metadata["probes"] = rows;
  return r;
}

DynkinAccumulator::DynkinAccumulator(const ModelParams& p, TestFunction h,
                                     std::vector<double> t_grid)
    : p_(p), h_(std::move(h)), t_grid_(std::move(t_grid)), samples_(t_grid_.size()) {}

void DynkinAccumulator::add(const PathGrid& g) {
  const double a_sigma = generator_apply(p_, h_, {1, p_.z});
  auto gen = [&](double y) { return generator_apply(p_, h_, {1, y}); };
  const double h_start = h_.h(1, 0.0);
  for (std::size_t k = 0; k < t_grid_.size(); ++k) {
    const double t = t_grid_[k];
    const double hi = std::min(t, g.sigma);
    double integral = 0.0;
    std::size_t i = 1;
    double prev_t = 0.0, prev_a = gen(g.values[0]);
    for (; i < g.size() && g.times[i] <= hi; ++i) {
      const double a = g.times[i] >= g.sigma ? a_sigma : gen(g.values[i]);
      integral += 0.5 * (g.times[i] - prev_t) * (prev_a + a);
      prev_t = g.times[i];
      prev_a = a;
    }
    if (prev_t < hi) {
      if (i >= g.size()) throw UsageError("path grid ends before t");
      const double end = hi >= g.sigma ? a_sigma : gen(g.value_at(hi, p_.z));
      integral += 0.5 * (hi - prev_t) * (prev_a + end);
    }
    const double h_end = t >= g.sigma ? h_.h(0, p_.z) : h_.h(1, g.value_at(t, p_.z));
    samples_[k].push_back(h_end - h_start - integral);
  }
}

TestReport DynkinAccumulator::finish(const std::string& name) const {
  TestReport r;
  r.name = name;
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
  r.metadata["z_cut"] = kZCut;
  r.metadata["rule"] = "PASS iff |z| < z_cut at every t";
  r.metadata["per_t"] = rows;
  return r;
}

TestReport dynkin_check(const ModelParams& p, const TestFunction& h, double t,
                        std::span<const PathGrid> paths) {
  DynkinAccumulator acc(p, h, {t});
  for (const auto& g : paths) acc.add(g);
  return acc.finish("dynkin");
}

void write_grid_csv(const std::filesystem::path& csv, const Grid1D& grid, const GridFunction& u,
                    const GridSidecar& info) {
  std::FILE* f = std::fopen(csv.c_str(), "wb");
  if (!f) throw ConfigError("cannot write " + csv.string());
  std::fputs("y,u0,u1\n", f);
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    std::fprintf(f, "%.17g,%.17g,%.17g\n", grid.nodes[i], u.branch0[i], u.branch1[i]);
  }
  if (std::fclose(f) != 0) throw ConfigError("write failed: " + csv.string());
  nlohmann::ordered_json j;
  j["t_end"] = info.t_end;
  j["lambda"] = info.lambda;
  j["z"] = info.z;
  j["dy"] = info.dy;
  j["dt_pde"] = info.dt_pde;
  j["scheme"] = scheme_name(info.scheme);
  auto side = csv;
  side.replace_extension(".json");
  std::ofstream js(side, std::ios::binary);
  js << j.dump(2) << '\n';
  if (!js) throw ConfigError("write failed: " + side.string());
}

}  // namespace lastpass
