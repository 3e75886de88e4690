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

#include "mfcv/estimator_check.hpp"
#include "mfcv/ultralocal.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace mfcv
{
namespace
{

/// Fills a window with samples z(t_k), u(t_k) at t_k = t0 + k / fs.
SignalWindow fill(
  const UltraLocalConfig & cfg, const std::function<double(double)> & z, const std::function<double(double)> & u,
  double t0 = 0.0)
{
  SignalWindow w(cfg.samples());
  for (std::size_t k = 0; k < cfg.samples(); ++k) {
    const double t = t0 + static_cast<double>(k) / cfg.fs;
    w.push(z(t), u(t));
  }
  return w;
}

double estimate(const SignalWindow & w, const UltraLocalConfig & cfg)
{
  return cfg.nu == 1 ? estimate_F_nu1(w, cfg) : estimate_F_nu2(w, cfg);
}

const auto zero = [](double) { return 0.0; };

TEST(UltraLocalConfig, Validation)
{
  EXPECT_NO_THROW((UltraLocalConfig{1, 1.5, 0.25, 200.0}.validate()));
  EXPECT_THROW((UltraLocalConfig{3, 1.5, 0.25, 200.0}.validate()), InvalidParameterError);
  EXPECT_THROW((UltraLocalConfig{1, 0.0, 0.25, 200.0}.validate()), InvalidParameterError);
  EXPECT_THROW((UltraLocalConfig{1, 1.5, 0.25, 0.0}.validate()), InvalidParameterError);
  EXPECT_THROW((UltraLocalConfig{1, 1.5, 0.00025, 200.0}.validate()), InvalidParameterError);
  EXPECT_NO_THROW((UltraLocalConfig{1, 1.5, 0.01, 200.0}.validate()));
}

TEST(UltraLocalConfig, WindowCoversTauWithBothEndpoints)
{
  const UltraLocalConfig cfg{1, 1.5, 0.25, 200.0};
  EXPECT_EQ(cfg.intervals(), 50u);
  EXPECT_EQ(cfg.samples(), 51u);
  EXPECT_DOUBLE_EQ(cfg.effective_tau(), 0.25);
}

TEST(SignalWindow, OldestSampleFirst)
{
  SignalWindow w(3);
  for (int k = 0; k < 5; ++k) {
    w.push(k, 10.0 * k);
  }
  ASSERT_TRUE(w.full());
  EXPECT_EQ(w.z(0), 2.0);
  EXPECT_EQ(w.z(2), 4.0);
  EXPECT_EQ(w.u(1), 30.0);
  w.clear();
  EXPECT_EQ(w.size(), 0u);
}

TEST(EstimatorNu1, ConstantOutputGivesZero)
{
  const UltraLocalConfig cfg{1, 1.5, 0.25, 200.0};
  EXPECT_NEAR(estimate(fill(cfg, [](double) { return 4.2; }, zero), cfg), 0.0, 1e-12);
}

TEST(EstimatorNu1, RecoversConstantF)
{
  const UltraLocalConfig cfg{1, 1.5, 0.25, 200.0};
  EXPECT_NEAR(estimate(fill(cfg, [](double t) { return 3.7 * t; }, zero, 2.0), cfg), 3.7, 1e-11);
}

TEST(EstimatorNu1, InputContributionCancels)
{
  const UltraLocalConfig cfg{1, 1.5, 0.25, 200.0};
  const auto z = [](double t) { return (2.0 + 1.5 * 1.0) * t; };
  EXPECT_NEAR(estimate(fill(cfg, z, [](double) { return 1.0; }), cfg), 2.0, 1e-11);
}

TEST(EstimatorNu2, QuadraticOutputPinsTheSign)
{
  const UltraLocalConfig cfg{2, 1.95, 0.25, 200.0};
  EXPECT_NEAR(estimate(fill(cfg, [](double t) { return 4.0 * t * t / 2.0; }, zero, 1.0), cfg), 4.0, 1e-6);
}

TEST(EstimatorNu2, QuadraticErrorIsSecondOrderInSampleInterval)
{
  const auto z = [](double t) { return 2.0 * t * t; };
  const UltraLocalConfig coarse{2, 1.95, 0.25, 200.0};
  const UltraLocalConfig fine{2, 1.95, 0.25, 400.0};
  const double e1 = std::abs(estimate(fill(coarse, z, zero, 1.0), coarse) - 4.0);
  const double e2 = std::abs(estimate(fill(fine, z, zero, 1.0), fine) - 4.0);
  EXPECT_GT(e1 / e2, 3.5);
}

TEST(EstimatorNu2, LinearOutputGivesZero)
{
  const UltraLocalConfig cfg{2, 1.95, 0.25, 200.0};
  EXPECT_NEAR(estimate(fill(cfg, [](double t) { return 0.5 - 3.0 * t; }, zero, 1.0), cfg), 0.0, 1e-9);
}

TEST(EstimatorNu2, InputContributionCancels)
{
  const UltraLocalConfig cfg{2, 1.95, 0.25, 200.0};
  const auto z = [](double t) { return (1.0 + 1.95 * 2.0) * t * t / 2.0; };
  EXPECT_NEAR(estimate(fill(cfg, z, [](double) { return 2.0; }), cfg), 1.0, 1e-6);
}

TEST(EstimatorKernel, DiscreteMomentConditions)
{
  for (int nu : {1, 2}) {
    const UltraLocalConfig cfg{nu, 1.7, 0.25, 200.0};
    const EstimatorKernel k = EstimatorKernel::build(cfg);
    double m0 = 0.0;
    double m1 = 0.0;
    for (std::size_t i = 0; i < k.wz.size(); ++i) {
      const double s = static_cast<double>(i) / cfg.fs;
      m0 += k.wz[i];
      m1 += k.wz[i] * s;
    }
    EXPECT_NEAR(m0, 0.0, 1e-9) << "nu " << nu;
    if (nu == 1) {
      EXPECT_NEAR(m1, 1.0, 1e-12);
    } else {
      EXPECT_NEAR(m1, 0.0, 1e-9);
    }
  }
}

TEST(Estimators, ConstantFAcrossRangeMeetsTolerance)
{
  const OracleReport rep = run_estimator_oracles(0.25, 200.0);
  ASSERT_EQ(rep.cases.size(), 10u);
  for (const auto & c : rep.cases) {
    EXPECT_LT(c.error, 1e-3) << "nu " << c.nu << " F " << c.F;
  }
}

TEST(Estimators, DoublingSampleRateReducesError)
{
  const OracleReport coarse = run_estimator_oracles(0.25, 200.0);
  const OracleReport fine = run_estimator_oracles(0.25, 400.0);
  for (int nu : {1, 2}) {
    EXPECT_LT(fine.max_error(nu), coarse.max_error(nu)) << "nu " << nu;
  }
}

TEST(Estimators, PiecewiseConstantFConvergesWithinOneWindow)
{
  for (int nu : {1, 2}) {
    const UltraLocalConfig cfg{nu, nu == 1 ? 1.5 : 1.95, 0.25, 200.0};
    const double t0 = 1.0;
    const double f0 = -2.0;
    const double f1 = 3.0;
    // z^(nu) = F(t) with u = 0; z and z' continuous at the jump.
    const auto z = [&](double t) {
      if (nu == 1) {
        return t < t0 ? f0 * t : f0 * t0 + f1 * (t - t0);
      }
      return t < t0 ? 0.5 * f0 * t * t : 0.5 * f0 * t0 * t0 + f0 * t0 * (t - t0) + 0.5 * f1 * (t - t0) * (t - t0);
    };
    UltraLocalEstimator est(cfg);
    const double t_check = t0 + cfg.tau + 2.0 / cfg.fs;
    for (int k = 0;; ++k) {
      const double t = k / cfg.fs;
      est.push(z(t), 0.0);
      if (t >= t_check - 1e-12) {
        EXPECT_NEAR(est.estimate(), f1, 1e-6 * std::abs(f1)) << "nu " << nu;
        break;
      }
    }
  }
}

TEST(Estimators, AreLinearInTheSignals)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int nu : {1, 2}) {
    const UltraLocalConfig cfg{nu, 1.3, 0.1, 200.0};
    SignalWindow a(cfg.samples());
    SignalWindow b(cfg.samples());
    SignalWindow sum(cfg.samples());
    for (std::size_t k = 0; k < cfg.samples(); ++k) {
      const double za = dist(rng);
      const double ua = dist(rng);
      const double zb = dist(rng);
      const double ub = dist(rng);
      a.push(za, ua);
      b.push(zb, ub);
      sum.push(2.0 * za - 3.0 * zb, 2.0 * ua - 3.0 * ub);
    }
    const double lhs = estimate(sum, cfg);
    const double rhs = 2.0 * estimate(a, cfg) - 3.0 * estimate(b, cfg);
    EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, std::abs(rhs))) << "nu " << nu;
  }
}

TEST(Estimators, RejectPartialWindowsAndMismatchedConfigs)
{
  const UltraLocalConfig cfg{1, 1.5, 0.25, 200.0};
  SignalWindow w(cfg.samples());
  w.push(1.0, 0.0);
  EXPECT_THROW(estimate_F_nu1(w, cfg), WindowNotFullError);
  const SignalWindow full = fill(cfg, zero, zero);
  EXPECT_THROW(estimate_F_nu2(full, cfg), InvalidParameterError);
  SignalWindow small(10);
  for (int k = 0; k < 10; ++k) {
    small.push(0.0, 0.0);
  }
  EXPECT_THROW(estimate_F_nu1(small, cfg), InvalidParameterError);
  UltraLocalEstimator est(cfg);
  EXPECT_FALSE(est.ready());
  EXPECT_THROW(est.estimate(), WindowNotFullError);
}

TEST(Estimators, StreamingMatchesBatch)
{
  const UltraLocalConfig cfg{2, 1.95, 0.25, 200.0};
  UltraLocalEstimator est(cfg);
  SignalWindow w(cfg.samples());
  for (int k = 0; k < 120; ++k) {
    const double z = std::sin(0.05 * k) + 0.01 * k;
    const double u = std::cos(0.07 * k);
    est.push(z, u);
    w.push(z, u);
  }
  EXPECT_EQ(est.estimate(), estimate_F_nu2(w, cfg));
}

TEST(DerivativeEstimate, ConstantGivesZero)
{
  const std::vector<double> v(5, 2.5);
  EXPECT_EQ(derivative_estimate(v, 200.0), 0.0);
}

TEST(DerivativeEstimate, ExactOnAffineSignals)
{
  std::vector<double> v;
  for (int k = 0; k < 5; ++k) {
    v.push_back(3.0 * (k / 200.0) + 1.0);
  }
  EXPECT_NEAR(derivative_estimate(v, 200.0), 3.0, 1e-9);
}

TEST(DerivativeEstimate, SineOverTwentyFiveMilliseconds)
{
  const double fs = 200.0;
  const std::size_t n = 6;  // spans 25 ms
  const double peak = 2.0 * std::numbers::pi;
  for (double start = 0.0; start < 1.0; start += 0.01) {
    std::vector<double> v;
    for (std::size_t k = 0; k < n; ++k) {
      v.push_back(std::sin(2.0 * std::numbers::pi * (start + k / fs)));
    }
    const double centre = start + 0.5 * (n - 1) / fs;
    const double exact = peak * std::cos(2.0 * std::numbers::pi * centre);
    EXPECT_LT(std::abs(derivative_estimate(v, fs, n) - exact), 0.02 * peak) << "start " << start;
  }
}

TEST(DerivativeEstimate, NeedsEnoughSamples)
{
  const std::vector<double> v(4, 0.0);
  EXPECT_THROW(derivative_estimate(v, 200.0), InsufficientSamplesError);
  EXPECT_THROW(derivative_estimate(v, 0.0, 2), InvalidParameterError);
  DerivativeWindow w;
  w.push(1.0);
  EXPECT_FALSE(w.ready());
  EXPECT_THROW(w.estimate(200.0), InsufficientSamplesError);
}

}  // namespace
}  // namespace mfcv
