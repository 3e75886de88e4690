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

// Ultra-local model z^(nu) = F + alpha * u and algebraic sliding-window
// estimation of F.
//
// Over the window [t - tau, t] with local time s in [0, tau]:
//
//   nu = 1:  F = -6/tau^3 Int[(tau - 2s) z + alpha s (tau - s) u] ds
//   nu = 2:  F = 60/tau^5 Int (tau^2 + 6s^2 - 6 tau s) z ds
//              - 30 alpha/tau^5 Int (tau - s)^2 s^2 u ds
//
// The integrals are evaluated by product integration: z is interpolated
// linearly between samples, u is zero-order held, and the polynomial kernels
// are integrated exactly on each sample interval. The z kernels therefore
// annihilate constant and affine signals to rounding error.

#ifndef MFCV_ULTRALOCAL_HPP_
#define MFCV_ULTRALOCAL_HPP_

#include "mfcv/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mfcv
{

struct UltraLocalConfig
{
  int nu = 1;
  double alpha = 1.0;
  double tau = 0.25;   // s
  double fs = 200.0;   // Hz

  void validate() const
  {
    if (nu != 1 && nu != 2) {
      throw InvalidParameterError("ultra-local order nu must be 1 or 2");
    }
    if (!std::isfinite(alpha) || alpha == 0.0) {
      throw InvalidParameterError("ultra-local alpha must be finite and non-zero");
    }
    if (!(fs > 0.0) || !std::isfinite(fs)) {
      throw InvalidParameterError("sample frequency fs must be positive");
    }
    if (!(tau * fs >= 2.0 - 1e-9) || !std::isfinite(tau)) {
      throw InvalidParameterError(
        "estimation window tau=" + std::to_string(tau) + " s holds fewer than 2 samples at fs=" +
        std::to_string(fs) + " Hz");
    }
  }

  /// Number of sample intervals spanned by the window.
  std::size_t intervals() const
  {
    return static_cast<std::size_t>(std::ceil(tau * fs - 1e-9));
  }
  std::size_t samples() const { return intervals() + 1; }
  /// Window length actually realized on the sample grid.
  double effective_tau() const { return static_cast<double>(intervals()) / fs; }
};

/// Fixed-capacity ring buffer of (z, u) pairs.
///
/// Sample k pairs the measurement z(t_k) with the input that was held over
/// the preceding interval [t_{k-1}, t_k).
class SignalWindow
{
public:
  explicit SignalWindow(std::size_t capacity)
  : z_(capacity), u_(capacity)
  {
    if (capacity < 2) {
      throw InvalidParameterError("signal window needs at least 2 samples");
    }
  }

  void push(double z, double u)
  {
    z_[head_] = z;
    u_[head_] = u;
    head_ = (head_ + 1) % z_.size();
    if (count_ < z_.size()) {
      ++count_;
    }
  }

  void clear()
  {
    head_ = 0;
    count_ = 0;
  }

  std::size_t capacity() const { return z_.size(); }
  std::size_t size() const { return count_; }
  bool full() const { return count_ == z_.size(); }

  /// i = 0 is the oldest stored sample.
  double z(std::size_t i) const { return z_[index(i)]; }
  double u(std::size_t i) const { return u_[index(i)]; }

private:
  std::size_t index(std::size_t i) const
  {
    const std::size_t oldest = count_ == z_.size() ? head_ : 0;
    return (oldest + i) % z_.size();
  }

  std::vector<double> z_;
  std::vector<double> u_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

/// Discrete weights so that F_est = sum_k wz[k] z_k + wu[k] u_k.
struct EstimatorKernel
{
  std::vector<double> wz;
  std::vector<double> wu;

  static EstimatorKernel build(const UltraLocalConfig & cfg)
  {
    cfg.validate();
    const std::size_t n = cfg.intervals();
    const double h = 1.0 / cfg.fs;
    const double tau = cfg.effective_tau();

    double cz = 0.0;
    double cu = 0.0;
    double (*kz)(double, double) = nullptr;
    double (*ku)(double, double) = nullptr;
    if (cfg.nu == 1) {
      cz = -6.0 / (tau * tau * tau);
      cu = -6.0 * cfg.alpha / (tau * tau * tau);
      kz = [](double s, double t) { return t - 2.0 * s; };
      ku = [](double s, double t) { return s * (t - s); };
    } else {
      const double t5 = std::pow(tau, 5);
      cz = 60.0 / t5;
      cu = -30.0 * cfg.alpha / t5;
      kz = [](double s, double t) { return t * t + 6.0 * s * s - 6.0 * t * s; };
      ku = [](double s, double t) { return (t - s) * (t - s) * s * s; };
    }

    // 3-point Gauss-Legendre on each interval: exact up to degree 5, which
    // covers every kernel times a linear hat function.
    constexpr std::array<double, 3> node = {-0.7745966692414834, 0.0, 0.7745966692414834};
    constexpr std::array<double, 3> weight = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

    EstimatorKernel k;
    k.wz.assign(n + 1, 0.0);
    k.wu.assign(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = static_cast<double>(j) * h;
      for (std::size_t q = 0; q < 3; ++q) {
        const double theta = 0.5 * (node[q] + 1.0);
        const double s = a + theta * h;
        const double w = 0.5 * h * weight[q];
        const double kzs = kz(s, tau);
        k.wz[j] += cz * w * kzs * (1.0 - theta);
        k.wz[j + 1] += cz * w * kzs * theta;
        k.wu[j + 1] += cu * w * ku(s, tau);
      }
    }
    return k;
  }

  double apply(const SignalWindow & window) const
  {
    if (window.size() != wz.size()) {
      throw WindowNotFullError(
        "estimator window holds " + std::to_string(window.size()) + " of " + std::to_string(wz.size()) +
        " samples");
    }
    double f = 0.0;
    for (std::size_t i = 0; i < wz.size(); ++i) {
      f += wz[i] * window.z(i) + wu[i] * window.u(i);
    }
    return f;
  }
};

namespace detail
{

inline double estimate_checked(const SignalWindow & window, const UltraLocalConfig & cfg, int nu)
{
  if (cfg.nu != nu) {
    throw InvalidParameterError("estimator called with a config of order " + std::to_string(cfg.nu));
  }
  if (window.capacity() != cfg.samples()) {
    throw InvalidParameterError("signal window capacity does not match the configured window");
  }
  if (!window.full()) {
    throw WindowNotFullError("estimator window is not full yet");
  }
  return EstimatorKernel::build(cfg).apply(window);
}

}  // namespace detail

inline double estimate_F_nu1(const SignalWindow & window, const UltraLocalConfig & cfg)
{
  return detail::estimate_checked(window, cfg, 1);
}

inline double estimate_F_nu2(const SignalWindow & window, const UltraLocalConfig & cfg)
{
  return detail::estimate_checked(window, cfg, 2);
}

/// Streaming estimator with precomputed weights; one instance per channel.
class UltraLocalEstimator
{
public:
  explicit UltraLocalEstimator(const UltraLocalConfig & cfg)
  : cfg_(cfg), kernel_(EstimatorKernel::build(cfg)), window_(cfg.samples())
  {
  }

  void push(double z, double u) { window_.push(z, u); }
  void reset() { window_.clear(); }
  bool ready() const { return window_.full(); }
  double estimate() const
  {
    if (!window_.full()) {
      throw WindowNotFullError("estimator window is not full yet");
    }
    return kernel_.apply(window_);
  }

  const UltraLocalConfig & config() const { return cfg_; }
  const SignalWindow & window() const { return window_; }

private:
  UltraLocalConfig cfg_;
  EstimatorKernel kernel_;
  SignalWindow window_;
};

inline constexpr std::size_t kDefaultDerivativeSamples = 5;

/// Least-squares slope of a straight-line fit through equally spaced samples.
/// Exact on affine signals; for curved signals it estimates the derivative at
/// the centre of the span.
inline double derivative_estimate(
  std::span<const double> samples, double fs, std::size_t min_samples = kDefaultDerivativeSamples)
{
  if (!(fs > 0.0)) {
    throw InvalidParameterError("sample frequency fs must be positive");
  }
  if (samples.size() < std::max<std::size_t>(min_samples, 2)) {
    throw InsufficientSamplesError(
      "derivative estimate needs " + std::to_string(min_samples) + " samples, got " +
      std::to_string(samples.size()));
  }
  const double n = static_cast<double>(samples.size());
  const double mid = 0.5 * (n - 1.0);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double t = static_cast<double>(i) - mid;
    num += t * samples[i];
    den += t * t;
  }
  return num / den * fs;
}

/// Fixed-length history feeding derivative_estimate.
class DerivativeWindow
{
public:
  explicit DerivativeWindow(std::size_t length = kDefaultDerivativeSamples)
  : length_(length)
  {
    if (length < 2) {
      throw InvalidParameterError("derivative window needs at least 2 samples");
    }
  }

  void push(double v)
  {
    if (values_.size() == length_) {
      values_.erase(values_.begin());
    }
    values_.push_back(v);
  }
  bool ready() const { return values_.size() == length_; }
  void reset() { values_.clear(); }
  double estimate(double fs) const { return derivative_estimate(values_, fs, length_); }

private:
  std::size_t length_;
  std::vector<double> values_;
};

}  // namespace mfcv

#endif  // MFCV_ULTRALOCAL_HPP_
