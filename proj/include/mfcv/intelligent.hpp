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

// Intelligent controllers for the ultra-local model z^(nu) = F + alpha u:
//
//   iP   : u = -(F - zd'  + KP e) / alpha
//   iPI  : u = -(F - zd'  + KP e + KI int e) / alpha
//   iPD  : u = -(F - zd'' + KP e + KD e') / alpha
//   iPID : u = -(F - zd'' + KP e + KI int e + KD e') / alpha
//
// with e = z - zd. All four share one expression so that KI = 0 reduces the
// integral variants to iP / iPD bit for bit.

#ifndef MFCV_INTELLIGENT_HPP_
#define MFCV_INTELLIGENT_HPP_

#include "mfcv/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mfcv
{

struct IntelligentGains
{
  double KP = 0.0;
  double KI = 0.0;
  double KD = 0.0;
  double alpha = 1.0;
  int nu = 1;

  void validate() const
  {
    if (!std::isfinite(KP) || !std::isfinite(KI) || !std::isfinite(KD)) {
      throw InvalidParameterError("intelligent controller gains must be finite");
    }
    if (!std::isfinite(alpha) || alpha == 0.0) {
      throw InvalidParameterError("intelligent controller alpha must be finite and non-zero");
    }
    if (nu != 1 && nu != 2) {
      throw InvalidParameterError("intelligent controller order nu must be 1 or 2");
    }
    if (nu == 1 && !(KP > 0.0)) {
      throw InvalidParameterError("iP loop is not stable unless KP > 0");
    }
    if (nu == 2 && !(KP > 0.0 && KD > 0.0)) {
      throw InvalidParameterError("iPD loop is not Hurwitz unless KP > 0 and KD > 0");
    }
  }
};

/// Desired output and its analytic time derivatives.
struct ReferenceSignal
{
  double value = 0.0;
  double rate = 0.0;
  double accel = 0.0;
};

namespace detail
{

inline double intelligent_law(
  double F, double zd_nu, double p_term, double i_term, double d_term, double alpha)
{
  return -((F - zd_nu + p_term) + i_term + d_term) / alpha;
}

}  // namespace detail

inline double ip_control(double F_est, const ReferenceSignal & ref, double z, const IntelligentGains & g)
{
  const double e = z - ref.value;
  return detail::intelligent_law(F_est, ref.rate, g.KP * e, 0.0, 0.0, g.alpha);
}

inline double ipd_control(
  double F_est, const ReferenceSignal & ref, double z, double z_dot, const IntelligentGains & g)
{
  const double e = z - ref.value;
  const double e_dot = z_dot - ref.rate;
  return detail::intelligent_law(F_est, ref.accel, g.KP * e, 0.0, g.KD * e_dot, g.alpha);
}

/// Stateful iPI (nu = 1) or iPID (nu = 2) with a clamped output.
///
/// Anti-windup: when the output sits at a bound the integral keeps its
/// previous value instead of absorbing the current error.
class IntelligentIntegralController
{
public:
  explicit IntelligentIntegralController(
    const IntelligentGains & gains, double u_min = -std::numeric_limits<double>::infinity(),
    double u_max = std::numeric_limits<double>::infinity())
  : gains_(gains), u_min_(u_min), u_max_(u_max)
  {
    if (!(u_min < u_max)) {
      throw InvalidParameterError("controller output bounds must satisfy u_min < u_max");
    }
  }

  /// `z_dot` is ignored for nu = 1.
  double step(double F_est, const ReferenceSignal & ref, double z, double z_dot, double dt)
  {
    if (!(dt > 0.0)) {
      throw InvalidParameterError("controller step must be positive");
    }
    const double e = z - ref.value;
    const double candidate = integral_ + e * dt;
    double u = evaluate(F_est, ref, e, z_dot, candidate);
    saturated_ = u <= u_min_ || u >= u_max_;
    if (saturated_) {
      u = evaluate(F_est, ref, e, z_dot, integral_);
    } else {
      integral_ = candidate;
    }
    return std::clamp(u, u_min_, u_max_);
  }

  /// Unclamped law for a given integral value; exposed for reduction checks.
  double evaluate(double F_est, const ReferenceSignal & ref, double e, double z_dot, double integral) const
  {
    if (gains_.nu == 1) {
      return detail::intelligent_law(F_est, ref.rate, gains_.KP * e, gains_.KI * integral, 0.0, gains_.alpha);
    }
    const double e_dot = z_dot - ref.rate;
    return detail::intelligent_law(
      F_est, ref.accel, gains_.KP * e, gains_.KI * integral, gains_.KD * e_dot, gains_.alpha);
  }

  void reset() { integral_ = 0.0; saturated_ = false; }
  double integral() const { return integral_; }
  bool saturated() const { return saturated_; }
  const IntelligentGains & gains() const { return gains_; }

private:
  IntelligentGains gains_;
  double u_min_;
  double u_max_;
  double integral_ = 0.0;
  bool saturated_ = false;
};

inline double ipi_control(
  IntelligentIntegralController & c, double F_est, const ReferenceSignal & ref, double z, double dt)
{
  return c.step(F_est, ref, z, 0.0, dt);
}

inline double ipid_control(
  IntelligentIntegralController & c, double F_est, const ReferenceSignal & ref, double z, double z_dot,
  double dt)
{
  return c.step(F_est, ref, z, z_dot, dt);
}

}  // namespace mfcv

#endif  // MFCV_INTELLIGENT_HPP_
