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

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "lastpass/params.hpp"

namespace lastpass {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = true;
};

struct QuadOptions {
  double abs_tol = 1e-10;
  int max_panels = 4000;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double rk = fc * kWgk[7];
  double rg = fc * kWg[3];
  double rabs = std::abs(rk);
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    fv1[j] = f(c - dx);
    fv2[j] = f(c + dx);
    rk += kWgk[j] * (fv1[j] + fv2[j]);
    rabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
    if (j % 2 == 1) rg += kWg[j / 2] * (fv1[j] + fv2[j]);
  }
  const double mean = 0.5 * rk;
  double asc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    asc += kWgk[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));
  }
  double err = std::abs((rk - rg) * h);
  asc *= std::abs(h);
  rabs *= std::abs(h);
  if (asc != 0.0 && err != 0.0) {
    err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  }
  const double floor = 50.0 * std::numeric_limits<double>::epsilon() * rabs;
  if (rabs > std::numeric_limits<double>::min() / (50.0 * std::numeric_limits<double>::epsilon())) {
    err = std::max(err, floor);
  }
  return {a, b, rk * h, err};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod on [a, b]; the panel with the largest
// error estimate is bisected until the summed estimate meets abs_tol.
// Every breakpoint strictly inside (a, b) starts a panel edge.
template <class F>
QuadResult integrate(F&& f, double a, double b, std::span<const double> breaks = {},
                     QuadOptions opt = {}) {
  QuadResult out;
  if (!(a < b)) return out;
  std::vector<double> edges{a};
  for (double x : breaks) {
    if (x > a && x < b) edges.push_back(x);
  }
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::priority_queue<detail::Panel> heap;
  double total_err = 0.0;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    auto p = detail::gk15(f, edges[i], edges[i + 1]);
    out.evaluations += 15;
    total_err += p.error;
    heap.push(p);
  }
  while (total_err > opt.abs_tol && static_cast<int>(heap.size()) < opt.max_panels) {
    auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    heap.pop();
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    out.evaluations += 30;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Sum in left-to-right order so the result does not depend on heap layout.
  std::vector<detail::Panel> panels;
  panels.reserve(heap.size());
  double err = 0.0;
  while (!heap.empty()) {
    panels.push_back(heap.top());
    err += heap.top().error;
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const detail::Panel& l, const detail::Panel& r) { return l.a < r.a; });
  for (const auto& p : panels) out.value += p.value;
  out.error = err;
  out.converged = err <= opt.abs_tol;
  return out;
}

}  // namespace lastpass
