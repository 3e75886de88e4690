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


#include "mfcv/mfc_vehicle.hpp"
#include "mfcv/plant.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace mfcv
{
namespace
{

struct StraightRun
{
  double final_speed_error = 0.0;
  double max_late_lateral_error = 0.0;  // after `settle` seconds past the step
};

/// Truth plant on a straight road along X; the lateral reference steps to
/// `offset` at `t_step`.
StraightRun drive_straight(
  double v, double offset, double t_step, double settle, double horizon, const MfcConfig & cfg = {})
{
  MfcVehicleController c(cfg);
  const VehicleParams vp;
  const TireModel tire = TireModel::saturating();
  PlantState s = PlantState::rolling(v, vp.R);
  const double dt = 1.0 / cfg.fs();
  StraightRun out;
  for (int k = 0; k * dt < horizon; ++k) {
    const double t = k * dt;
    const double target = t >= t_step ? offset : 0.0;
    const MfcStep r = c.step({s.Vx, s.Y}, {v, 0.0, 0.0}, {target, 0.0, 0.0});
    if (t >= t_step + settle) {
      out.max_late_lateral_error = std::max(out.max_late_lateral_error, std::abs(s.Y - target));
    }
    s = step_truth_plant(s, r.u, vp, tire, dt);
  }
  out.final_speed_error = std::abs(s.Vx - v);
  return out;
}

TEST(MfcVehicleController, LaneOffsetStepStaysInsideIdealErrorEnvelope)
{
  // With exact F the error obeys e'' + KD e' + KP e = 0, whose envelope
  // decays as exp(-KD t / 2).
  const MfcConfig cfg;
  const double KP = cfg.lateral.gains.KP;
  const double KD = cfg.lateral.gains.KD;
  const double zeta = KD / (2.0 * std::sqrt(KP));
  const double envelope = 0.5 * std::exp(-0.5 * KD * 5.0) / std::sqrt(1.0 - zeta * zeta);
  const StraightRun r = drive_straight(15.0, 0.5, 1.0, 5.0, 12.0, cfg);
  EXPECT_LT(r.max_late_lateral_error, envelope);
  EXPECT_LT(r.final_speed_error, 0.05);
}

TEST(MfcVehicleController, LaneOffsetStepHasNoSteadyStateOffset)
{
  EXPECT_LT(drive_straight(15.0, 0.5, 1.0, 12.0, 20.0).max_late_lateral_error, 0.02);
}

TEST(MfcVehicleController, CriticallyDampedLaneOffsetSettlesWithinFiveSeconds)
{
  MfcConfig cfg;
  cfg.lateral.gains.KD = 2.0 * std::sqrt(cfg.lateral.gains.KP);
  EXPECT_LT(drive_straight(15.0, 0.5, 1.0, 5.0, 12.0, cfg).max_late_lateral_error, 0.02);
}

TEST(MfcVehicleController, OutputsZeroUntilWindowsFill)
{
  const MfcConfig cfg;
  MfcVehicleController c(cfg);
  const std::size_t fill = cfg.longitudinal.estimator.samples();
  for (std::size_t k = 0; k + 1 < fill; ++k) {
    const MfcStep r = c.step({10.0, 0.3}, {12.0, 0.0, 0.0}, {});
    EXPECT_FALSE(r.ready);
    EXPECT_EQ(r.u.torque, 0.0);
    EXPECT_EQ(r.u.steer, 0.0);
  }
  const MfcStep r = c.step({10.0, 0.3}, {12.0, 0.0, 0.0}, {});
  EXPECT_TRUE(r.ready);
  EXPECT_GT(r.u.torque, 0.0);
  EXPECT_LT(r.u.steer, 0.0);
  c.reset();
  EXPECT_FALSE(c.step({10.0, 0.0}, {10.0, 0.0, 0.0}, {}).ready);
  EXPECT_NEAR(cfg.bootstrap_time(), 0.25, 1e-12);
}

TEST(MfcVehicleController, SpeedChannelOnExactLocalModel)
{
  // Vx' = F + alpha u1 with F = -0.4 and the controller's own alpha.
  const MfcConfig cfg;
  MfcVehicleController c(cfg);
  const double dt = 1.0 / cfg.fs();
  const double alpha = cfg.longitudinal.gains.alpha;
  double vx = 10.0;
  double u1 = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const MfcStep r = c.step({vx, 0.0}, {12.0, 0.0, 0.0}, {});
    if (r.ready) {
      EXPECT_NEAR(r.F1, -0.4, 1e-6);
    }
    u1 = r.u.torque / cfg.torque_unit;
    vx += dt * (-0.4 + alpha * u1);
  }
  EXPECT_NEAR(vx, 12.0, 1e-4);
}

TEST(MfcConfig, Validation)
{
  EXPECT_NO_THROW(MfcConfig{}.validate());
  MfcConfig c;
  c.longitudinal.estimator.nu = 2;
  EXPECT_THROW(c.validate(), InvalidParameterError);
  c = MfcConfig{};
  c.lateral.gains.alpha = 1.0;
  EXPECT_THROW(c.validate(), InvalidParameterError);
  c = MfcConfig{};
  c.lateral.estimator.fs = 100.0;
  EXPECT_THROW(c.validate(), InvalidParameterError);
  c = MfcConfig{};
  c.steer_ratio = -1.0;
  EXPECT_THROW(c.validate(), InvalidParameterError);
  c = MfcConfig{};
  c.derivative_samples = 1;
  EXPECT_THROW(MfcVehicleController{c}, InvalidParameterError);
}

}  // namespace
}  // namespace mfcv
