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

// Flatness-based controller for the linear-tire bicycle model.
//
// Flat outputs: z1 = Vx, z2 = Lf m Vy - Iz psi_dot. The input enters
// through [z1'; z2''] = Phi(x) + Delta(x) [T; delta], where z2' does not
// depend on the steering angle (relative degree two). The controller inverts
// this relation around a stabilizing outer loop on the flat-output errors.

#ifndef MFCV_FLATNESS_HPP_
#define MFCV_FLATNESS_HPP_

#include "mfcv/error.hpp"
#include "mfcv/plant.hpp"
#include "mfcv/ultralocal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mfcv
{

struct FlatOutputs
{
  double z1 = 0.0;
  double z2 = 0.0;
};

inline FlatOutputs flat_outputs(const PlantState & s, const ControlModelParams & p)
{
  return {s.Vx, p.Lf * p.m * s.Vy - p.Iz * s.psi_dot};
}

/// Time derivative of z2 under the control model; independent of steering.
inline double flat_output_rate(const PlantState & s, const ControlModelParams & p)
{
  const LateralForces fy = lateral_forces(s, 0.0, p);
  return p.wheelbase() * fy.rear - p.Lf * p.m * s.psi_dot * s.Vx;
}

struct BodyVelocities
{
  double Vx = 0.0;
  double Vy = 0.0;
  double psi_dot = 0.0;
};

/// Denominator of the state recovery; vanishes at one forward speed when
/// Iz < Lr Lf m.
inline double recovery_denominator(double z1, const ControlModelParams & p)
{
  const double a = p.Lf * p.m;
  return p.cr() * p.wheelbase() * (p.Iz - p.Lr * a) + (a * z1) * (a * z1);
}

/// Body velocities from (z1, z2, z2'):
///   psi_dot = -(Lf m z1 z2' + Cr L z2) / D,
///   Vy      = z2 / (Lf m) + Iz psi_dot / (Lf m),
///   D       = Cr L (Iz - Lr Lf m) + (Lf m z1)^2.
inline BodyVelocities recover_state(double z1, double z2, double z2_dot, const ControlModelParams & p)
{
  const double a = p.Lf * p.m;
  const double L = p.wheelbase();
  const double den = recovery_denominator(z1, p);
  const double scale = p.cr() * L * std::abs(p.Iz - p.Lr * a) + (a * z1) * (a * z1);
  if (!(std::abs(den) > 1e-9 * scale)) {
    throw SingularityError("flat-output state recovery is singular at z1=" + std::to_string(z1));
  }
  const double num = a * z1 * z2_dot + p.cr() * L * z2;
  BodyVelocities out;
  out.Vx = z1;
  out.psi_dot = -num / den;
  out.Vy = z2 / a - (p.Iz / a) * (num / den);
  return out;
}

/// Speeds at which recover_state is singular (empty when Iz >= Lr Lf m).
inline std::vector<double> singular_speeds(const ControlModelParams & p)
{
  const double a = p.Lf * p.m;
  const double c = -p.cr() * p.wheelbase() * (p.Iz - p.Lr * a);
  if (c <= 0.0) {
    return {};
  }
  return {std::sqrt(c) / a};
}

/// [z1'; z2''] = phi + delta * [T; steer].
struct FlatDynamics
{
  std::array<std::array<double, 2>, 2> delta{};
  std::array<double, 2> phi{};
};

inline FlatDynamics flat_dynamics(const PlantState & s, const ControlModelParams & p)
{
  if (!(s.Vx >= kMinSpeed)) {
    throw SingularityError("flat dynamics undefined below the minimum speed");
  }
  const double vx = s.Vx;
  const double vy = s.Vy;
  const double r = s.psi_dot;
  const double cf = p.cf();
  const double cr = p.cr();
  const double a = p.Lf * p.m;
  const double L = p.wheelbase();
  const double b = 1.0 / (p.R * p.m);

  const double fyf0 = -cf * (vy + r * p.Lf) / vx;
  const double fyr = -cr * (vy - r * p.Lr) / vx;
  const double vy_dot0 = -r * vx + (fyf0 + fyr) / p.m;
  const double r_dot0 = (p.Lf * fyf0 - p.Lr * fyr) / p.Iz;
  const double vx_dot0 = r * vy;

  FlatDynamics d;
  d.phi[0] = vx_dot0;
  d.phi[1] = -L * cr / vx * (vy_dot0 - p.Lr * r_dot0) + L * cr * (vy - r * p.Lr) * vx_dot0 / (vx * vx) -
             a * vx * r_dot0 - a * r * vx_dot0;
  d.delta[0][0] = b;
  d.delta[0][1] = 0.0;
  d.delta[1][0] = b * (L * cr * (vy - r * p.Lr) / (vx * vx) - a * r);
  d.delta[1][1] = -(L * cr / vx) * cf * (1.0 / p.m - p.Lr * p.Lf / p.Iz) - a * vx * p.Lf * cf / p.Iz;
  return d;
}

/// 2-norm condition number after scaling every column to unit max-norm, so
/// that the very different units of torque and steering do not dominate.
inline double equilibrated_condition(const std::array<std::array<double, 2>, 2> & m)
{
  std::array<std::array<double, 2>, 2> a = m;
  for (int j = 0; j < 2; ++j) {
    const double c = std::max(std::abs(a[0][j]), std::abs(a[1][j]));
    if (c == 0.0) {
      return std::numeric_limits<double>::infinity();
    }
    a[0][j] /= c;
    a[1][j] /= c;
  }
  const double p = a[0][0] * a[0][0] + a[0][1] * a[0][1] + a[1][0] * a[1][0] + a[1][1] * a[1][1];
  const double det = std::abs(a[0][0] * a[1][1] - a[0][1] * a[1][0]);
  if (det == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  const double disc = std::sqrt(std::max(p * p - 4.0 * det * det, 0.0));
  const double s_max = std::sqrt(0.5 * (p + disc));
  const double s_min = det / s_max;
  return s_max / s_min;
}

/// Flat-output loop gains. Defaults place the longitudinal poles at -2
/// (double) and the lateral poles at -3 (triple).
///
/// Tracking z2 leaves heading and lateral position free, so a slow path loop
/// shifts the yaw-rate reference by
///   -(k_lat * y_err / Vx + k_head * psi_err),
/// giving lateral-error poles at the roots of s^2 + k_head s + k_lat.
/// Zero path gains leave the bare flat-output law.
struct FlatGains
{
  double K11 = 4.0;
  double K12 = 4.0;
  double K21 = 9.0;
  double K22 = 27.0;
  double K23 = 27.0;
  double k_lat = 1.0;   // 1/s^2
  double k_head = 2.0;  // 1/s
  double max_condition = 1e8;

  void validate() const
  {
    for (double k : {K11, K12, K21, K22, K23, k_lat, k_head}) {
      if (!std::isfinite(k) || k < 0.0) {
        throw InvalidParameterError("flatness gains must be finite and non-negative");
      }
    }
    if (!(K11 > 0.0) || !(K21 > 0.0 && K22 > 0.0 && K21 * K22 > K23)) {
      throw InvalidParameterError("flatness gains do not give a Hurwitz error polynomial");
    }
    if (!(max_condition > 1.0)) {
      throw InvalidParameterError("flatness condition-number threshold must exceed 1");
    }
  }
};

struct FlatReference
{
  double z1 = 0.0;
  double z1_dot = 0.0;
  double z2 = 0.0;
  double z2_dot = 0.0;
  double z2_ddot = 0.0;
};

/// Measured path-frame errors feeding the path loop.
struct PathErrors
{
  double y_err = 0.0;    // m, positive left
  double psi_err = 0.0;  // rad, psi - psi_ref
};

struct FlatStep
{
  ControlInput u{};
  double e_z1 = 0.0;
  double e_z2 = 0.0;
  double z2_dot = 0.0;
  bool torque_saturated = false;
  bool steer_saturated = false;
};

/// Stateful controller: holds the error integrals and the z2 history used to
/// estimate z2'. It sees the plant state and the control-model parameters
/// only.
class FlatController
{
public:
  FlatController(
    const ControlModelParams & model, const FlatGains & gains, const ActuatorLimits & limits, double fs,
    std::size_t derivative_samples = kDefaultDerivativeSamples)
  : model_(model), gains_(gains), limits_(limits), fs_(fs), z2_history_(derivative_samples)
  {
    gains_.validate();
    if (!(fs > 0.0)) {
      throw InvalidParameterError("flat controller sample rate must be positive");
    }
  }

  FlatStep step(const PlantState & s, const FlatReference & ref, const PathErrors & path = {})
  {
    const double dt = 1.0 / fs_;
    const FlatOutputs z = flat_outputs(s, model_);
    const double yaw_shift = -(gains_.k_lat * path.y_err / std::max(s.Vx, kMinSpeed) + gains_.k_head * path.psi_err);
    const double z2_ref = ref.z2 - model_.Iz * yaw_shift;
    z2_history_.push(z.z2);
    FlatStep out;
    out.z2_dot = z2_history_.ready() ? z2_history_.estimate(fs_) : flat_output_rate(s, model_);

    out.e_z1 = ref.z1 - z.z1;
    out.e_z2 = z2_ref - z.z2;
    const double e_z2_dot = ref.z2_dot - out.z2_dot;
    const double i1 = int_z1_ + out.e_z1 * dt;
    const double i2 = int_z2_ + out.e_z2 * dt;

    const double v1 = ref.z1_dot + gains_.K11 * out.e_z1 + gains_.K12 * i1;
    const double v2 = ref.z2_ddot + gains_.K21 * e_z2_dot + gains_.K22 * out.e_z2 + gains_.K23 * i2;

    const FlatDynamics d = flat_dynamics(s, model_);
    if (equilibrated_condition(d.delta) > gains_.max_condition) {
      throw SingularityError("decoupling matrix is near singular");
    }
    const double torque = (v1 - d.phi[0]) / d.delta[0][0];
    const double steer = (v2 - d.phi[1] - d.delta[1][0] * torque) / d.delta[1][1];

    out.torque_saturated = limits_.torque_saturated(torque);
    out.steer_saturated = limits_.steer_saturated(steer);
    if (!out.torque_saturated) {
      int_z1_ = i1;
    }
    if (!out.steer_saturated) {
      int_z2_ = i2;
    }
    out.u = limits_.clamp({torque, steer});
    return out;
  }

  void reset()
  {
    int_z1_ = 0.0;
    int_z2_ = 0.0;
    z2_history_.reset();
  }

  const ControlModelParams & model() const { return model_; }

private:
  ControlModelParams model_;
  FlatGains gains_;
  ActuatorLimits limits_;
  double fs_;
  DerivativeWindow z2_history_;
  double int_z1_ = 0.0;
  double int_z2_ = 0.0;
};

}  // namespace mfcv

#endif  // MFCV_FLATNESS_HPP_
