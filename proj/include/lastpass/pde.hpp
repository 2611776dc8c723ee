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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lastpass/kernels.hpp"
#include "lastpass/params.hpp"
#include "lastpass/report.hpp"
#include "lastpass/sampler.hpp"

namespace lastpass {

// Uniform nodes on [y_min, y_max] with z landing exactly on node z_index.
struct Grid1D {
  double y_min = 0.0, y_max = 0.0;
  int n_y = 0;
  double dy = 0.0;
  int z_index = 0;
  std::vector<double> nodes;

  Grid1D() = default;
  Grid1D(const ModelParams& p, double y_min, double y_max, int n_y);
};

struct GridFunction {
  std::vector<double> branch0;
  std::vector<double> branch1;
  double time = 0.0;
};

enum class Boundary { DirichletZero, Oracle };
enum class Interface { OracleValue, HalfLaplacianRow };

struct SchemeConfig {
  double dt_pde = 0.0;  // 0: 0.9 of the stability limit
  bool upwind = true;   // false: centred first derivative
  int upwind_order = 2; // 1 or 2; the two nodes next to z always use order 1
  Boundary boundary = Boundary::Oracle;
  Interface interface = Interface::OracleValue;
};

// Largest stable explicit step for the scheme on this grid.
double stability_limit(const ModelParams& p, double dy, const SchemeConfig& s);

GridFunction solve_kbe(const ModelParams& p, const TestFunction& h, double t_end,
                       const Grid1D& grid, const SchemeConfig& scheme);

// max over probes of |d/dt Q_t h - A Q_t h| at (1, y), central differences of
// the analytic semigroup. flip_drift is the wrong-sign negative control.
TestReport interior_residual(const ModelParams& p, const TestFunction& h, double t,
                             std::span<const double> probes, bool flip_drift = false);

// h(zeta_t) - h(1, 0) - int_0^t A h(zeta_s) ds along each path (trapezoid).
class DynkinAccumulator {
 public:
  DynkinAccumulator(const ModelParams& p, TestFunction h, std::vector<double> t_grid);
  void add(const PathGrid& path);
  TestReport finish(const std::string& name) const;
  const std::vector<std::vector<double>>& samples() const { return samples_; }

 private:
  ModelParams p_;
  TestFunction h_;
  std::vector<double> t_grid_;
  std::vector<std::vector<double>> samples_;
};

TestReport dynkin_check(const ModelParams& p, const TestFunction& h, double t,
                        std::span<const PathGrid> paths);

struct GridSidecar {
  double t_end, lambda, z, dy, dt_pde;
  SchemeConfig scheme;
};

// CSV `y,u0,u1` plus a JSON sidecar (same stem, .json).
void write_grid_csv(const std::filesystem::path& csv, const Grid1D& grid, const GridFunction& u,
                    const GridSidecar& info);

}  // namespace lastpass
