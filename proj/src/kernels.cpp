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

#include "lastpass/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "lastpass/analytic.hpp"
#include "lastpass/quadrature.hpp"
#include "lastpass/special.hpp"

namespace lastpass {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void check_flag(int y1) {
  if (y1 != 0 && y1 != 1) throw DomainError("StatePoint: y1 must be 0 or 1");
}

// Integral of g(y) against the density part of P_t(x, dy). Below z the
// weight is a Gaussian centred at x + lambda t, above z one centred at
// x - lambda t; each is truncated where its log-weight drops below -40.
template <class G>
double continuous_part(const ModelParams& p, double t, double x, G&& g) {
  const double lam = p.lambda;
  const double A = alpha(p, x);
  const double rt = std::sqrt(t);
  const double norm = kInvSqrt2Pi / rt;
  double total = 0.0;
  for (int side = 0; side < 2; ++side) {
    const double logw = side == 0 ? lam * A : lam * (A - 2.0 * (x - p.z));
    const double c = side == 0 ? x + lam * t : x - lam * t;
    const double k = std::sqrt(2.0 * (std::max(logw, 0.0) + 40.0));
    double lo = c - k * rt;
    double hi = c + k * rt;
    if (side == 0) hi = std::min(hi, p.z); else lo = std::max(lo, p.z);
    if (!(lo < hi)) continue;
    auto integrand = [&](double y) {
      const double gy = g(y);
      if (!std::isfinite(gy)) throw EvaluationError("non-finite test function value");
      const double u = y - c;
      return gy * norm * std::exp(logw - u * u / (2.0 * t));
    };
    const double brk[1] = {c};
    total += integrate(integrand, lo, hi, brk).value;
  }
  return total;
}

double formal_generator(const ModelParams& p, const TestFunction& h, StatePoint pt) {
  if (pt.y1 == 0) return 0.0;
  const double d2 = 0.5 * h.d2h(pt.y2);
  if (pt.y2 > p.z) return -p.lambda * h.dh(pt.y2) + d2;
  if (pt.y2 < p.z) return p.lambda * h.dh(pt.y2) + d2;
  return d2;
}

}  // namespace

TestFunction with_fd_derivatives(TestFunction f, double step) {
  auto h = f.h;
  if (!f.dh) {
    f.dh = [h, step](double y) { return (h(1, y + step) - h(1, y - step)) / (2.0 * step); };
  }
  if (!f.d2h) {
    f.d2h = [h, step](double y) {
      return (h(1, y + step) - 2.0 * h(1, y) + h(1, y - step)) / (step * step);
    };
  }
  return f;
}

TestFunction canonical_h(const ModelParams& p) {
  const double z = p.z;
  TestFunction f;
  f.h = [z](int y1, double y) {
    if (y1 == 0) return 0.0;
    const double u = y - z;
    return u * u * std::exp(-u * u);
  };
  f.dh = [z](double y) {
    const double u = y - z;
    return (2.0 * u - 2.0 * u * u * u) * std::exp(-u * u);
  };
  f.d2h = [z](double y) {
    const double u = y - z;
    const double u2 = u * u;
    return (2.0 - 10.0 * u2 + 4.0 * u2 * u2) * std::exp(-u2);
  };
  f.decays = true;
  return f;
}

double atom_weight(const ModelParams& p, double t, double x) {
  if (!(t > 0.0)) throw DomainError("atom_weight: t must be positive");
  const double d = std::abs(p.z - x);
  const double rt = std::sqrt(t);
  const double a = p.lambda * rt;
  const double v = normal_cdf(a - d / rt) - scaled_gauss_tail(2.0 * p.lambda * d, a + d / rt);
  return std::max(v, 0.0);
}

double transition_expectation(const ModelParams& p, double t, double x,
                              const std::function<double(double)>& f) {
  if (!(t > 0.0)) throw DomainError("transition_expectation: t must be positive");
  const double fz = f(p.z);
  if (!std::isfinite(fz)) throw EvaluationError("non-finite test function value");
  if (x == p.z) return fz;
  return atom_weight(p, t, x) * fz + continuous_part(p, t, x, f);
}

double semigroup_Q(const ModelParams& p, double t, StatePoint pt, const TestFunction& h) {
  check_flag(pt.y1);
  if (!(t >= 0.0)) throw DomainError("semigroup_Q: t must be nonnegative");
  if (t == 0.0 || pt.y1 == 0) return h.h(pt.y1, pt.y2);
  const double h0 = h.h(0, p.z);
  const double atom = h0 == 0.0 ? 0.0 : h0 * atom_weight(p, t, pt.y2);
  return atom + continuous_part(p, t, pt.y2, [&](double y) { return h.h(1, y); });
}

double chapman_kolmogorov_residual(const ModelParams& p, double s, double t, StatePoint pt,
                                   const TestFunction& h) {
  check_flag(pt.y1);
  if (!(s > 0.0) || !(t > 0.0)) throw DomainError("chapman_kolmogorov_residual: s, t must be positive");
  if (pt.y1 == 0) return 0.0;
  const double direct = semigroup_Q(p, s + t, pt, h);
  TestFunction inner;
  inner.h = [&](int y1, double y) { return y1 == 0 ? h.h(0, y) : semigroup_Q(p, t, {1, y}, h); };
  return std::abs(direct - semigroup_Q(p, s, pt, inner));
}

ConditionalSigmaLaw cond_sigma_law(const ModelParams& p, double t, double xi_t, bool absorbed,
                                   std::optional<double> sigma) {
  if (!(t >= 0.0)) throw DomainError("cond_sigma_law: t must be nonnegative");
  ConditionalSigmaLaw law;
  law.start = t;
  if (absorbed) {
    if (!sigma) throw UsageError("cond_sigma_law: absorbed state needs the observed sigma");
    law.atom_known = *sigma;
    law.density = [](double) { return 0.0; };
    return law;
  }
  const double lam = p.lambda;
  const double A = alpha(p, xi_t);
  const double d = p.z - xi_t;
  law.normalizer = lam * std::exp(lam * A);
  law.density = [lam, A, d, t](double r) {
    if (!(r > t)) return 0.0;
    const double tau = r - t;
    const double u = d - lam * tau;
    return lam * kInvSqrt2Pi / std::sqrt(tau) * std::exp(lam * A - u * u / (2.0 * tau));
  };
  return law;
}

double cond_exp_sigma(const ModelParams& p, double t, double xi_t, bool absorbed,
                      std::optional<double> sigma_if_absorbed) {
  if (!(t >= 0.0)) throw DomainError("cond_exp_sigma: t must be nonnegative");
  if (absorbed) {
    if (!sigma_if_absorbed) throw UsageError("cond_exp_sigma: absorbed state needs sigma");
    return *sigma_if_absorbed;
  }
  const double lam = p.lambda;
  return 1.0 / (lam * lam) + std::abs(p.z - xi_t) / lam + t;
}

double survival_prob(const ModelParams& p, double s, double xi_s, double t) {
  if (!(s >= 0.0) || !(t >= s)) throw DomainError("survival_prob: need t >= s >= 0");
  if (xi_s == p.z) throw UsageError("survival_prob: xi_s = z is the absorbed case");
  if (t == s) return 1.0;
  const double d = std::abs(p.z - xi_s);
  const double rt = std::sqrt(t - s);
  const double a = p.lambda * rt;
  const double v = normal_cdf(-a + d / rt) + scaled_gauss_tail(2.0 * p.lambda * d, a + d / rt);
  return std::clamp(v, 0.0, 1.0);
}

double cond_mean_xi(const ModelParams& p, double s, double xi_s, double t) {
  if (!(t >= s)) throw DomainError("cond_mean_xi: need t >= s");
  if (t == s) return xi_s;
  if (xi_s == p.z) return p.z;
  const double lam = p.lambda;
  const double tau = t - s;
  const double rt = std::sqrt(tau);
  const double e = std::abs(p.z - xi_s);
  const double sgn = xi_s > p.z ? 1.0 : -1.0;
  return p.z + sgn * ((e - lam * tau) * normal_cdf(-lam * rt + e / rt) +
                      (lam * tau + e) * scaled_gauss_tail(2.0 * lam * e, lam * rt + e / rt));
}

double cond_mean_stopped_B(const ModelParams& p, double s, double xi_s, double t, bool absorbed,
                           std::optional<double> sigma_if_absorbed) {
  if (!(s >= 0.0) || !(t >= s)) throw DomainError("cond_mean_stopped_B: need t >= s >= 0");
  const double lam = p.lambda;
  if (absorbed) {
    if (!sigma_if_absorbed) throw UsageError("cond_mean_stopped_B: absorbed state needs sigma");
    return p.z - lam * *sigma_if_absorbed;
  }
  const double bs = xi_s - lam * s;
  if (t == s || xi_s == p.z) return bs;
  const double tau = t - s;
  const double rt = std::sqrt(tau);
  const double d = p.z - xi_s;
  const double e = std::abs(d);
  const double k = lam * tau - 0.5 / lam + d;
  const double tail = scaled_gauss_tail(2.0 * lam * e, lam * rt + e / rt);
  const double dens = gauss_pdf({tau, e, lam * tau});
  if (xi_s < p.z) {
    return bs - (2.0 * k * tail + normal_cdf(lam * rt - e / rt) / lam - 2.0 * tau * dens);
  }
  return bs + (2.0 * k * normal_cdf(lam * rt + d / rt) - 2.0 * lam * tau + tail / lam +
               2.0 * tau * dens);
}

double sup_cdf(const ModelParams& p, double x) {
  if (x < p.z) return 0.0;
  return -std::expm1(-2.0 * p.lambda * (x - p.z));
}

double localtime_at_sigma_cdf(const ModelParams& p, double y) {
  if (!(y >= 0.0)) throw DomainError("localtime_at_sigma_cdf: y must be nonnegative");
  return -std::expm1(-p.lambda * y);
}

double generator_apply(const ModelParams& p, const TestFunction& h, StatePoint pt) {
  check_flag(pt.y1);
  if (pt.y1 == 0) return 0.0;
  if (!h.dh || !h.d2h) throw UsageError("generator_apply: derivatives of h are required");
  if (pt.y2 == p.z) {
    const double tol = 1e-12;
    if (std::abs(h.h(0, p.z)) > tol || std::abs(h.h(1, p.z)) > tol || std::abs(h.dh(p.z)) > tol) {
      throw DomainError("generator_apply: h is outside the generator domain at z");
    }
  }
  return formal_generator(p, h, pt);
}

TestReport generator_consistency(const ModelParams& p, const TestFunction& h,
                                 const std::vector<StatePoint>& probes,
                                 const std::vector<double>& t_sequence) {
  if (!h.dh || !h.d2h) throw UsageError("generator_consistency: derivatives of h are required");
  TestReport r;
  r.name = "generator";
  r.n = static_cast<long long>(probes.size() * t_sequence.size());
  std::vector<double> errs;
  for (double t : t_sequence) {
    double worst = 0.0;
    for (const auto& pt : probes) {
      check_flag(pt.y1);
      const double ratio = (semigroup_Q(p, t, pt, h) - h.h(pt.y1, pt.y2)) / t;
      worst = std::max(worst, std::abs(ratio - formal_generator(p, h, pt)));
    }
    errs.push_back(worst);
  }
  std::vector<double> lx, ly;
  for (size_t i = 0; i < errs.size(); ++i) {
    if (errs[i] > 0.0) {
      lx.push_back(std::log(t_sequence[i]));
      ly.push_back(std::log(errs[i]));
    }
  }
  double slope = 0.0;
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < lx.size(); ++i) { mx += lx[i]; my += ly[i]; }
    mx /= lx.size();
    my /= lx.size();
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    slope = sxy / sxx;
  }
  const double threshold = 0.8;
  if (lx.empty()) {
    r.verdict = Verdict::Pass;
  } else if (lx.size() < 2) {
    r.verdict = Verdict::Inconclusive;
  } else {
    r.verdict = slope >= threshold ? Verdict::Pass : Verdict::Fail;
  }
  r.statistic = slope;
  r.p_value_or_error = errs.empty() ? 0.0 : errs.back();
  r.metadata["t"] = t_sequence;
  r.metadata["max_error"] = errs;
  r.metadata["slope_threshold"] = threshold;
  return r;
}

double strong_markov_violation_bound(const ModelParams& p) {
  const double r3 = std::sqrt(3.0);
  const double lam = p.lambda;
  return 2.0 * normal_cdf(-p.z) *
         (normal_cdf(-lam * r3 + p.z / r3) + scaled_gauss_tail(2.0 * lam * p.z, lam * r3 + p.z / r3));
}

}  // namespace lastpass
