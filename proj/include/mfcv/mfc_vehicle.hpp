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

// Two-channel model-free vehicle controller.
//
//   longitudinal: Vx'  = F1 + alpha1 u1, closed by an iP
//   lateral:      y''  = F2 + alpha2 u2, closed by an iPD
//
// u1 is expressed in units of `torque_unit` N m and u2 as a hand-wheel angle,
// so that the road-wheel angle is u2 / steer_ratio. The controller sees
// measurements only: speed, lateral deviation and its own past inputs.

#ifndef MFCV_MFC_VEHICLE_HPP_
#define MFCV_MFC_VEHICLE_HPP_

#include "mfcv/error.hpp"
#include "mfcv/intelligent.hpp"
#include "mfcv/plant.hpp"
#include "mfcv/ultralocal.hpp"

#include <algorithm>
#include <cstddef>

namespace mfcv
{

struct MfcChannelConfig
{
  UltraLocalConfig estimator{};
  IntelligentGains gains{};
};

struct MfcConfig
{
  MfcChannelConfig longitudinal{{1, 1.5, 0.25, 200.0}, {2.0, 0.0, 0.0, 1.5, 1}};
  MfcChannelConfig lateral{{2, 1.95, 0.25, 200.0}, {1.9, 0.0, 0.5, 1.95, 2}};
  double torque_unit = 1000.0;  // N m per controller unit
  double steer_ratio = 6.0;     // hand-wheel angle / road-wheel angle
  std::size_t derivative_samples = kDefaultDerivativeSamples;
  ActuatorLimits limits{};

  void validate() const
  {
    longitudinal.estimator.validate();
    lateral.estimator.validate();
    longitudinal.gains.validate();
    lateral.gains.validate();
    if (longitudinal.estimator.nu != 1 || longitudinal.gains.nu != 1) {
      throw InvalidParameterError("longitudinal model-free channel must have nu = 1");
    }
    if (lateral.estimator.nu != 2 || lateral.gains.nu != 2) {
      throw InvalidParameterError("lateral model-free channel must have nu = 2");
    }
    if (longitudinal.estimator.alpha != longitudinal.gains.alpha ||
        lateral.estimator.alpha != lateral.gains.alpha) {
      throw InvalidParameterError("estimator and controller alpha must agree per channel");
    }
    if (longitudinal.estimator.fs != lateral.estimator.fs) {
      throw InvalidParameterError("both model-free channels must run at the same rate");
    }
    if (!(torque_unit > 0.0) || !(steer_ratio > 0.0)) {
      throw InvalidParameterError("actuator scaling must be positive");
    }
    if (derivative_samples < 2) {
      throw InvalidParameterError("derivative window needs at least 2 samples");
    }
  }

  double fs() const { return longitudinal.estimator.fs; }
  /// Time before both estimators produce output.
  double bootstrap_time() const
  {
    return std::max(longitudinal.estimator.effective_tau(), lateral.estimator.effective_tau());
  }
};

struct MfcMeasurement
{
  double Vx = 0.0;
  double y_err = 0.0;  // lateral deviation, positive left
};

struct MfcStep
{
  ControlInput u{};
  double F1 = 0.0;
  double F2 = 0.0;
  double e_y_dot = 0.0;
  bool ready = false;
  bool torque_saturated = false;
  bool steer_saturated = false;
};

class MfcVehicleController
{
public:
  explicit MfcVehicleController(const MfcConfig & cfg)
  : cfg_((cfg.validate(), cfg)),
    longitudinal_(cfg.longitudinal.estimator),
    lateral_(cfg.lateral.estimator),
    e_y_history_(cfg.derivative_samples)
  {
  }

  /// One control period. `speed` uses value and rate; `lateral` uses value,
  /// rate and accel of the desired deviation (normally all zero).
  MfcStep step(const MfcMeasurement & meas, const ReferenceSignal & speed, const ReferenceSignal & lateral)
  {
    // Each sample is paired with the input held since the previous one.
    longitudinal_.push(meas.Vx, held_u1_);
    lateral_.push(meas.y_err, held_u2_);
    e_y_history_.push(meas.y_err - lateral.value);

    MfcStep out;
    if (!longitudinal_.ready() || !lateral_.ready() || !e_y_history_.ready()) {
      held_u1_ = 0.0;
      held_u2_ = 0.0;
      return out;
    }
    out.ready = true;
    out.F1 = longitudinal_.estimate();
    out.F2 = lateral_.estimate();
    out.e_y_dot = e_y_history_.estimate(cfg_.fs());

    const double u1 = ip_control(out.F1, speed, meas.Vx, cfg_.longitudinal.gains);
    const double u2 = ipd_control(out.F2, lateral, meas.y_err, out.e_y_dot + lateral.rate, cfg_.lateral.gains);

    const ControlInput raw{u1 * cfg_.torque_unit, u2 / cfg_.steer_ratio};
    out.torque_saturated = cfg_.limits.torque_saturated(raw.torque);
    out.steer_saturated = cfg_.limits.steer_saturated(raw.steer);
    out.u = cfg_.limits.clamp(raw);
    held_u1_ = out.u.torque / cfg_.torque_unit;
    held_u2_ = out.u.steer * cfg_.steer_ratio;
    return out;
  }

  void reset()
  {
    longitudinal_.reset();
    lateral_.reset();
    e_y_history_.reset();
    held_u1_ = 0.0;
    held_u2_ = 0.0;
  }

  const MfcConfig & config() const { return cfg_; }

private:
  MfcConfig cfg_;
  UltraLocalEstimator longitudinal_;
  UltraLocalEstimator lateral_;
  DerivativeWindow e_y_history_;
  double held_u1_ = 0.0;
  double held_u2_ = 0.0;
};

}  // namespace mfcv

#endif  // MFCV_MFC_VEHICLE_HPP_
