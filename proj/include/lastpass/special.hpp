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

#include "lastpass/params.hpp"

namespace lastpass {

double gauss_pdf(const GaussParams& g);

double normal_cdf(double x);

// exp(x^2) erfc(x), for any real x.
double erfcx(double x);

// exp(a) * Phi(-b) without forming either factor when that would overflow.
double scaled_gauss_tail(double a, double b);

}  // namespace lastpass
