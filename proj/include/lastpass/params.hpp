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

#include <cmath>
#include <stdexcept>
#include <string>

namespace lastpass {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Drift and level. Both strictly positive.
struct ModelParams {
  double lambda;
  double z;

  ModelParams(double lambda_, double z_) : lambda(lambda_), z(z_) {
    if (!(lambda > 0.0) || !(z > 0.0) || !std::isfinite(lambda) ||
        !std::isfinite(z)) {
      throw DomainError("ModelParams: need lambda > 0 and z > 0");
    }
  }
};

// Gaussian with variance t and mean m, evaluated at x.
struct GaussParams {
  double t;
  double x;
  double m;
};

}  // namespace lastpass
