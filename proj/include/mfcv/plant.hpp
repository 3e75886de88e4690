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

// Two-wheel (bicycle) vehicle plant.
//
// Two flavours share one state layout:
//  - the control-design model: rigid-body longitudinal/lateral/yaw balance,
//    linear lateral tires, wheel inertia neglected, no aerodynamic drag;
//  - the "truth" plant used for closed-loop validation: saturating tires with
//    a friction-ellipse derating, aerodynamic drag, rolling wheel inertia and
//    road adhesion applied to every tire force.
//
// Sign conventions: x forward, y left, yaw counter-clockwise. A positive
// steering angle turns left; a positive torque accelerates.

#ifndef MFCV_PLANT_HPP_
#define MFCV_PLANT_HPP_

#include "mfcv/error.hpp"
#include "mfcv/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <utility>

namespace mfcv
{

/// Slip angles divide by Vx; below this speed the plant refuses to evaluate.
inline constexpr double kMinSpeed = 0.5;

struct VehicleParams
{
  double m = 1600.0;        // kg
  double Iz = 2600.0;       // kg m^2
  double Lf = 1.2;          // m, CoG to front axle
  double Lr = 1.4;          // m, CoG to rear axle
  double Cf = 57000.0;      // N/rad, front axle cornering stiffness
  double Cr = 47000.0;      // N/rad, rear axle cornering stiffness
  double R = 0.3;           // m, wheel radius
  double Ir = 1.2;          // kg m^2, wheel spin inertia (per axle)
  double mu = 1.0;          // road adhesion, (0, 1]
  double rho_x = 0.35;      // N s^2/m^2, aerodynamic drag
  double g = 9.81;          // m/s^2
  double brake_front_share = 0.6;  // fraction of braking torque on the front axle

  double wheelbase() const { return Lf + Lr; }
  double front_load() const { return m * g * Lr / wheelbase(); }
  double rear_load() const { return m * g * Lf / wheelbase(); }

  void validate() const
  {
    const std::pair<const char *, double> positive[] = {
      {"m", m}, {"Iz", Iz}, {"Lf", Lf}, {"Lr", Lr}, {"Cf", Cf},   {"Cr", Cr},
      {"R", R}, {"Ir", Ir}, {"mu", mu}, {"g", g},   {"rho_x", rho_x}};
    for (const auto & [name, value] : positive) {
      // Ir and rho_x may be switched off to reduce the truth plant to the
      // control model.
      const bool may_be_zero = std::string(name) == "Ir" || std::string(name) == "rho_x";
      if (!std::isfinite(value) || value < 0.0 || (value == 0.0 && !may_be_zero)) {
        throw InvalidParameterError(std::string("vehicle parameter ") + name + " must be positive");
      }
    }
    if (mu > 1.0) {
      throw InvalidParameterError("vehicle parameter mu must lie in (0, 1]");
    }
    if (!(brake_front_share >= 0.0 && brake_front_share <= 1.0)) {
      throw InvalidParameterError("brake_front_share must lie in [0, 1]");
    }
  }
};

/// The subset of VehicleParams a model-based controller is allowed to see.
/// Wheel inertia, drag and tire saturation are deliberately absent.
struct ControlModelParams
{
  double m = 1600.0;
  double Iz = 2600.0;
  double Lf = 1.2;
  double Lr = 1.4;
  double Cf = 57000.0;
  double Cr = 47000.0;
  double R = 0.3;
  double mu = 1.0;

  double wheelbase() const { return Lf + Lr; }
  double cf() const { return mu * Cf; }
  double cr() const { return mu * Cr; }
};

inline ControlModelParams control_model(const VehicleParams & p)
{
  return {p.m, p.Iz, p.Lf, p.Lr, p.Cf, p.Cr, p.R, p.mu};
}

struct PlantState
{
  double Vx = 0.0;       // m/s
  double Vy = 0.0;       // m/s
  double psi = 0.0;      // rad
  double psi_dot = 0.0;  // rad/s
  double X = 0.0;        // m
  double Y = 0.0;        // m
  double omega_f = 0.0;  // rad/s
  double omega_r = 0.0;  // rad/s

  Vec<8> to_vec() const { return {Vx, Vy, psi, psi_dot, X, Y, omega_f, omega_r}; }
  static PlantState from_vec(const Vec<8> & v)
  {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
  }
  bool finite() const
  {
    const auto v = to_vec();
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  }
  /// Straight-line rolling at speed `vx` with wheels matching the ground.
  static PlantState rolling(double vx, double radius, double x = 0.0, double y = 0.0, double psi = 0.0)
  {
    return {vx, 0.0, psi, 0.0, x, y, vx / radius, vx / radius};
  }
};

struct ControlInput
{
  double torque = 0.0;  // N m, signed: drive > 0, brake < 0
  double steer = 0.0;   // rad, front wheel angle
};

struct ActuatorLimits
{
  double max_steer = 0.5;      // rad
  double max_torque = 2000.0;  // N m

  ControlInput clamp(const ControlInput & u) const
  {
    return {std::clamp(u.torque, -max_torque, max_torque), std::clamp(u.steer, -max_steer, max_steer)};
  }
  bool torque_saturated(double torque) const { return std::abs(torque) >= max_torque; }
  bool steer_saturated(double steer) const { return std::abs(steer) >= max_steer; }
};

enum class TireKind { Linear, Saturating };

/// Lateral tire characteristic per axle.
///
/// The saturating kind is a simplified Pacejka curve
///   F = mu D sin(C atan(B a - E (B a - atan(B a))))
/// with peak D = peak_scale * axle load and B = C_alpha / (C D), so the slope
/// at zero slip equals mu * C_alpha and the force never exceeds mu * D.
struct TireModel
{
  TireKind kind = TireKind::Saturating;
  double shape = 1.3;       // C
  double curvature = 0.0;   // E, must stay below 1
  double peak_scale = 1.0;  // peak force as a multiple of the static axle load

  static TireModel linear() { return {TireKind::Linear, 1.3, 0.0, 1.0}; }
  static TireModel saturating(double shape = 1.3, double curvature = 0.0, double peak_scale = 1.0)
  {
    return {TireKind::Saturating, shape, curvature, peak_scale};
  }

  void validate() const
  {
    if (kind == TireKind::Saturating) {
      if (!(shape > 0.0 && shape < 2.0)) {
        throw InvalidParameterError("tire shape factor must lie in (0, 2)");
      }
      if (!(curvature < 1.0)) {
        throw InvalidParameterError("tire curvature factor must be below 1");
      }
      if (!(peak_scale > 0.0)) {
        throw InvalidParameterError("tire peak_scale must be positive");
      }
    }
  }

  /// Force for slip `alpha` given the adhesion-scaled stiffness `stiffness`
  /// (N/rad) and adhesion-scaled peak `peak` (N).
  double force(double alpha, double stiffness, double peak) const
  {
    if (kind == TireKind::Linear) {
      return stiffness * alpha;
    }
    const double b = stiffness / (shape * peak);
    const double ba = b * alpha;
    return peak * std::sin(shape * std::atan(ba - curvature * (ba - std::atan(ba))));
  }
};

struct SlipAngles
{
  double front = 0.0;
  double rear = 0.0;
};

inline SlipAngles slip_angles(const PlantState & s, double steer, double Lf, double Lr)
{
  if (!(s.Vx >= kMinSpeed)) {
    throw SingularityError("slip angles undefined: Vx below the minimum speed");
  }
  return {steer - (s.Vy + s.psi_dot * Lf) / s.Vx, -(s.Vy - s.psi_dot * Lr) / s.Vx};
}

struct LateralForces
{
  double front = 0.0;  // N
  double rear = 0.0;   // N
};

/// Lateral axle forces. Adhesion scales both stiffness and peak.
inline LateralForces lateral_forces(
  const PlantState & s, double steer, const VehicleParams & p, const TireModel & tire)
{
  const SlipAngles a = slip_angles(s, steer, p.Lf, p.Lr);
  return {
    tire.force(a.front, p.mu * p.Cf, p.mu * tire.peak_scale * p.front_load()),
    tire.force(a.rear, p.mu * p.Cr, p.mu * tire.peak_scale * p.rear_load())};
}

inline LateralForces lateral_forces(const PlantState & s, double steer, const ControlModelParams & p)
{
  const SlipAngles a = slip_angles(s, steer, p.Lf, p.Lr);
  return {p.cf() * a.front, p.cr() * a.rear};
}

namespace detail
{

inline Vec<8> rigid_body(
  const PlantState & s, double fx_total, double effective_mass, const LateralForces & fy,
  const ControlModelParams & p, double radius)
{
  const double vx_dot = (p.m * s.psi_dot * s.Vy + fx_total) / effective_mass;
  const double vy_dot = -s.psi_dot * s.Vx + (fy.front + fy.rear) / p.m;
  const double r_dot = (p.Lf * fy.front - p.Lr * fy.rear) / p.Iz;
  const double c = std::cos(s.psi);
  const double sn = std::sin(s.psi);
  return {vx_dot,
          vy_dot,
          s.psi_dot,
          r_dot,
          s.Vx * c - s.Vy * sn,
          s.Vx * sn + s.Vy * c,
          vx_dot / radius,
          vx_dot / radius};
}

inline void require_finite(const PlantState & s)
{
  if (!s.finite()) {
    throw NonFiniteStateError("plant state became non-finite");
  }
}

}  // namespace detail

/// Time derivative of the control-design model. The torque acts through the
/// axles without wheel inertia, so the front/rear split does not matter.
inline Vec<8> control_model_derivative(const PlantState & s, const ControlInput & u, const ControlModelParams & p)
{
  const LateralForces fy = lateral_forces(s, u.steer, p);
  return detail::rigid_body(s, u.torque / p.R, p.m, fy, p, p.R);
}

/// Time derivative of the truth plant.
///
/// Wheels roll without longitudinal slip (omega = Vx / R), so wheel inertia
/// appears as I_r * omega_dot / R on each axle. Axle forces are capped at the
/// adhesion limit and the remaining friction budget derates lateral grip.
inline Vec<8> truth_plant_derivative(
  const PlantState & s, const ControlInput & u, const VehicleParams & p, const TireModel & tire)
{
  const double front_torque = u.torque >= 0.0 ? u.torque : p.brake_front_share * u.torque;
  const double rear_torque = u.torque >= 0.0 ? 0.0 : (1.0 - p.brake_front_share) * u.torque;
  double fx_front = front_torque / p.R;
  double fx_rear = rear_torque / p.R;

  const SlipAngles a = slip_angles(s, u.steer, p.Lf, p.Lr);
  LateralForces fy{};
  if (tire.kind == TireKind::Linear) {
    fy = {p.mu * p.Cf * a.front, p.mu * p.Cr * a.rear};
  } else {
    const double peak_f = p.mu * tire.peak_scale * p.front_load();
    const double peak_r = p.mu * tire.peak_scale * p.rear_load();
    fx_front = std::clamp(fx_front, -peak_f, peak_f);
    fx_rear = std::clamp(fx_rear, -peak_r, peak_r);
    const auto lateral_peak = [](double peak, double fx) {
      return std::sqrt(std::max(peak * peak - fx * fx, 0.01 * peak * peak));
    };
    fy = {tire.force(a.front, p.mu * p.Cf, lateral_peak(peak_f, fx_front)),
          tire.force(a.rear, p.mu * p.Cr, lateral_peak(peak_r, fx_rear))};
  }
  const double drag = p.rho_x * s.Vx * std::abs(s.Vx);
  const double effective_mass = p.m + 2.0 * p.Ir / (p.R * p.R);
  return detail::rigid_body(s, fx_front + fx_rear - drag, effective_mass, fy, control_model(p), p.R);
}

inline PlantState step_control_model(
  const PlantState & s, const ControlInput & u, const ControlModelParams & p, double dt)
{
  if (!(dt > 0.0)) {
    throw InvalidParameterError("integration step must be positive");
  }
  detail::require_finite(s);
  const auto next = rk4_step<8>(s.to_vec(), dt, [&](const Vec<8> & x) {
    return control_model_derivative(PlantState::from_vec(x), u, p);
  });
  const PlantState out = PlantState::from_vec(next);
  detail::require_finite(out);
  return out;
}

inline PlantState step_control_model(
  const PlantState & s, const ControlInput & u, const VehicleParams & p, double dt)
{
  return step_control_model(s, u, control_model(p), dt);
}

inline PlantState step_truth_plant(
  const PlantState & s, const ControlInput & u, const VehicleParams & p, const TireModel & tire, double dt)
{
  if (!(dt > 0.0)) {
    throw InvalidParameterError("integration step must be positive");
  }
  detail::require_finite(s);
  const auto next = rk4_step<8>(s.to_vec(), dt, [&](const Vec<8> & x) {
    return truth_plant_derivative(PlantState::from_vec(x), u, p, tire);
  });
  const PlantState out = PlantState::from_vec(next);
  detail::require_finite(out);
  return out;
}

/// State matrix of the linear lateral subsystem (Vy, psi_dot) at constant Vx.
inline std::array<std::array<double, 2>, 2> lateral_state_matrix(const ControlModelParams & p, double vx)
{
  const double cf = p.cf();
  const double cr = p.cr();
  return {{{-(cf + cr) / (p.m * vx), -vx - (cf * p.Lf - cr * p.Lr) / (p.m * vx)},
           {-(p.Lf * cf - p.Lr * cr) / (p.Iz * vx), -(p.Lf * p.Lf * cf + p.Lr * p.Lr * cr) / (p.Iz * vx)}}};
}

inline std::array<std::complex<double>, 2> lateral_eigenvalues(const ControlModelParams & p, double vx)
{
  const auto a = lateral_state_matrix(p, vx);
  const double tr = a[0][0] + a[1][1];
  const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4.0 - det, 0.0));
  return {tr / 2.0 + disc, tr / 2.0 - disc};
}

/// Understeer gradient (s^2/m when multiplied by speed squared gives the
/// extra steer per unit curvature); negative means oversteer.
inline double understeer_gradient(const ControlModelParams & p)
{
  return p.m * (p.Lr * p.cr() - p.Lf * p.cf()) / (p.wheelbase() * p.cf() * p.cr());
}

/// Linear-model steady-state yaw rate for a constant steer at speed `vx`.
inline double steady_state_yaw_rate(const ControlModelParams & p, double vx, double steer)
{
  return vx * steer / (p.wheelbase() + understeer_gradient(p) * vx * vx);
}

}  // namespace mfcv

#endif  // MFCV_PLANT_HPP_
