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

#ifndef MFCV_PID_HPP_
#define MFCV_PID_HPP_

#include "mfcv/error.hpp"
#include "mfcv/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mfcv
{

struct PidGains
{
  double Kp = 0.0;
  double Kd = 0.0;
  double Ki = 0.0;
  double filter_tc = 0.02;  // s, first-order filter on the derivative action

  void validate() const
  {
    if (!std::isfinite(Kp) || !std::isfinite(Kd) || !std::isfinite(Ki)) {
      throw InvalidParameterError("PID gains must be finite");
    }
    if (!(filter_tc > 0.0) || !std::isfinite(filter_tc)) {
      throw InvalidParameterError("PID derivative filter time constant must be positive");
    }
  }
};

/// Parallel PID on a tracking error with filtered derivative and
/// conditional-integration anti-windup.
class PidChannel
{
public:
  explicit PidChannel(
    const PidGains & gains, double u_min = -std::numeric_limits<double>::infinity(),
    double u_max = std::numeric_limits<double>::infinity())
  : gains_(gains), u_min_(u_min), u_max_(u_max)
  {
    gains_.validate();
    if (!(u_min < u_max)) {
      throw InvalidParameterError("PID output bounds must satisfy u_min < u_max");
    }
  }

  double step(double e, double dt)
  {
    if (!(dt > 0.0)) {
      throw InvalidParameterError("PID step must be positive");
    }
    if (has_previous_) {
      // Backward-Euler discretization of D(s) = s / (tc s + 1).
      const double raw = (e - previous_) / dt;
      const double a = dt / (gains_.filter_tc + dt);
      derivative_ += a * (raw - derivative_);
    }
    previous_ = e;
    has_previous_ = true;

    const double candidate = integral_ + e * dt;
    double u = gains_.Kp * e + gains_.Kd * derivative_ + gains_.Ki * candidate;
    saturated_ = u <= u_min_ || u >= u_max_;
    if (saturated_) {
      u = gains_.Kp * e + gains_.Kd * derivative_ + gains_.Ki * integral_;
    } else {
      integral_ = candidate;
    }
    return std::clamp(u, u_min_, u_max_);
  }

  void reset()
  {
    integral_ = 0.0;
    derivative_ = 0.0;
    previous_ = 0.0;
    has_previous_ = false;
    saturated_ = false;
  }

  double integral() const { return integral_; }
  double filtered_derivative() const { return derivative_; }
  bool saturated() const { return saturated_; }
  const PidGains & gains() const { return gains_; }

private:
  PidGains gains_;
  double u_min_;
  double u_max_;
  double integral_ = 0.0;
  double derivative_ = 0.0;
  double previous_ = 0.0;
  bool has_previous_ = false;
  bool saturated_ = false;
};

/// Gains act in controller units: errors are divided by `*_error_unit`,
/// torque comes out in `torque_unit` N m and steering as a hand-wheel angle
/// that reaches the road wheel divided by `steer_ratio`.
struct PidVehicleConfig
{
  PidGains speed{1.51, 0.52, 0.75, 0.02};
  PidGains lateral{0.95, 0.36, 46.0, 0.02};
  double speed_error_unit = 1.0;     // m/s per controller unit
  double lateral_error_unit = 0.01;  // m per controller unit
  double torque_unit = 1000.0;       // N m per controller unit
  double steer_ratio = 6.0;          // hand-wheel angle / road-wheel angle
  ActuatorLimits limits{};
  double fs = 200.0;

  void validate() const
  {
    speed.validate();
    lateral.validate();
    if (!(torque_unit > 0.0) || !(steer_ratio > 0.0) || !(fs > 0.0) || !(speed_error_unit > 0.0) ||
        !(lateral_error_unit > 0.0)) {
      throw InvalidParameterError("PID vehicle scaling and rate must be positive");
    }
  }
};

struct PidMeasurement
{
  double Vx = 0.0;
  double y_err = 0.0;  // lateral deviation, positive left
};

struct PidReference
{
  double Vx = 0.0;
  double y = 0.0;
};

struct PidStep
{
  ControlInput u{};
  bool torque_saturated = false;
  bool steer_saturated = false;
};

/// PID on the speed error drives the torque, PID on the lateral error drives
/// the steering. Reads measurements only.
class PidVehicleController
{
public:
  explicit PidVehicleController(const PidVehicleConfig & cfg)
  : cfg_(cfg),
    speed_(cfg.speed, -cfg.limits.max_torque / cfg.torque_unit, cfg.limits.max_torque / cfg.torque_unit),
    lateral_(cfg.lateral, -cfg.limits.max_steer * cfg.steer_ratio, cfg.limits.max_steer * cfg.steer_ratio)
  {
    cfg_.validate();
  }

  PidStep step(const PidMeasurement & meas, const PidReference & ref)
  {
    const double dt = 1.0 / cfg_.fs;
    const double u1 = speed_.step((ref.Vx - meas.Vx) / cfg_.speed_error_unit, dt);
    const double u2 = lateral_.step((ref.y - meas.y_err) / cfg_.lateral_error_unit, dt);
    PidStep out;
    out.u = cfg_.limits.clamp({u1 * cfg_.torque_unit, u2 / cfg_.steer_ratio});
    out.torque_saturated = speed_.saturated();
    out.steer_saturated = lateral_.saturated();
    return out;
  }

  void reset()
  {
    speed_.reset();
    lateral_.reset();
  }

  const PidChannel & speed_channel() const { return speed_; }
  const PidChannel & lateral_channel() const { return lateral_; }

private:
  PidVehicleConfig cfg_;
  PidChannel speed_;
  PidChannel lateral_;
};

}  // namespace mfcv

#endif  // MFCV_PID_HPP_
