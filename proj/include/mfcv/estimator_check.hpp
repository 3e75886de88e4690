// Copyright 2026 The mfcv Authors
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

// Self-test of the algebraic estimators against closed-form signals.
//
// Each case samples z^(nu) = F + alpha u with constant F and a smooth input
// u(t) = A sin(w t + phi), integrated analytically. The input is sampled at
// interval midpoints, matching the zero-order hold of a controller, so the
// measured error is pure discretization error and shrinks as fs grows.

#ifndef MFCV_ESTIMATOR_CHECK_HPP_
#define MFCV_ESTIMATOR_CHECK_HPP_

#include "mfcv/ultralocal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace mfcv
{

struct OracleCase
{
  int nu = 1;
  double alpha = 1.0;
  double F = 0.0;
  double estimate = 0.0;
  double error = 0.0;  // |estimate - F| / max(1, |F|)
  bool pass = false;
};

struct OracleReport
{
  double tau = 0.0;
  double fs = 0.0;
  double tolerance = 0.0;
  std::vector<OracleCase> cases;

  double max_error() const
  {
    double m = 0.0;
    for (const auto & c : cases) {
      m = std::max(m, c.error);
    }
    return m;
  }
  /// Largest error among the cases of one estimator order.
  double max_error(int nu) const
  {
    double m = 0.0;
    for (const auto & c : cases) {
      if (c.nu == nu) {
        m = std::max(m, c.error);
      }
    }
    return m;
  }
  bool all_pass() const
  {
    return std::all_of(cases.begin(), cases.end(), [](const OracleCase & c) { return c.pass; });
  }
};

struct OracleSignal
{
  double amplitude = 0.1;
  double omega = 2.0 * std::numbers::pi * 0.2;
  double phase = 0.3;
  double z0 = 0.3;
  double z0_dot = -0.2;
  double t_start = 1.0;  // s, time of the oldest window sample

  double u(double t) const { return amplitude * std::sin(omega * t + phase); }
  /// First and second integrals of u from 0 to t.
  double u_int1(double t) const
  {
    return amplitude / omega * (std::cos(phase) - std::cos(omega * t + phase));
  }
  double u_int2(double t) const
  {
    return amplitude / omega * (t * std::cos(phase) - (std::sin(omega * t + phase) - std::sin(phase)) / omega);
  }
  double z(int nu, double F, double alpha, double t) const
  {
    if (nu == 1) {
      return z0 + F * t + alpha * u_int1(t);
    }
    return z0 + z0_dot * t + 0.5 * F * t * t + alpha * u_int2(t);
  }
};

/// Estimate of F on one full window of the oracle signal.
inline double oracle_estimate(const UltraLocalConfig & cfg, double F, const OracleSignal & sig = {})
{
  UltraLocalEstimator est(cfg);
  const double h = 1.0 / cfg.fs;
  for (std::size_t k = 0; k < cfg.samples(); ++k) {
    const double t = sig.t_start + static_cast<double>(k) * h;
    est.push(sig.z(cfg.nu, F, cfg.alpha, t), sig.u(t - 0.5 * h));
  }
  return est.estimate();
}

/// Constant F in {-5, -2.5, 0, 2.5, 5} for nu = 1 (alpha1) and nu = 2 (alpha2).
inline OracleReport run_estimator_oracles(
  double tau = 0.25, double fs = 200.0, double alpha1 = 1.5, double alpha2 = 1.95, double tolerance = 1e-3)
{
  OracleReport rep;
  rep.tau = tau;
  rep.fs = fs;
  rep.tolerance = tolerance;
  for (int nu : {1, 2}) {
    UltraLocalConfig cfg{nu, nu == 1 ? alpha1 : alpha2, tau, fs};
    cfg.validate();
    for (double F : {-5.0, -2.5, 0.0, 2.5, 5.0}) {
      OracleCase c;
      c.nu = nu;
      c.alpha = cfg.alpha;
      c.F = F;
      c.estimate = oracle_estimate(cfg, F);
      c.error = std::abs(c.estimate - F) / std::max(1.0, std::abs(F));
      c.pass = c.error < tolerance;
      rep.cases.push_back(c);
    }
  }
  return rep;
}

}  // namespace mfcv

#endif  // MFCV_ESTIMATOR_CHECK_HPP_
