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

// Reference maneuver: the motion of the bicycle model when its centre of
// gravity follows the path exactly at the profiled speed.
//
// With sideslip beta = Vy / Vx and w = d beta / dt, exact path following
// forces psi_dot = rho V - w, and the yaw balance leaves the internal
// dynamics
//
//   Iz w' = L Fyr - Lf m (rho V^2 + V' beta) + Iz (rho' V + rho V'),
//   Fyr   = Fr(alpha_r),  alpha_r = -(beta - (rho - w / V) Lr),
//
// where Fr is the rear axle characteristic. For linear tires these dynamics
// are stable at every speed. Integrating them along the path yields the
// reference yaw angle, yaw rate, lateral speed, the second flat output
// z2 = Lf m Vy - Iz psi_dot with its first two time derivatives, and the
// feed-forward steering and torque.

#ifndef MFCV_MANEUVER_HPP_
#define MFCV_MANEUVER_HPP_

#include "mfcv/error.hpp"
#include "mfcv/integrator.hpp"
#include "mfcv/plant.hpp"
#include "mfcv/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace mfcv
{

/// Reference quantities at one arc length. Time derivatives assume travel at
/// the profiled speed.
struct ManeuverPoint
{
  double s = 0.0;
  double v = 0.0;          // m/s, reference Vx
  double v_dot = 0.0;      // m/s^2
  double psi = 0.0;        // rad, reference yaw
  double psi_dot = 0.0;    // rad/s
  double vy = 0.0;         // m/s
  double beta = 0.0;       // rad
  double z2 = 0.0;         // kg m^2/s
  double z2_dot = 0.0;
  double z2_ddot = 0.0;
  double steer = 0.0;      // rad, feed-forward front wheel angle
  double torque = 0.0;     // N m, feed-forward wheel torque
};

/// One axle's lateral characteristic with adhesion already applied.
struct AxleCharacteristic
{
  TireModel tire = TireModel::linear();
  double stiffness = 0.0;  // N/rad
  double peak = 0.0;       // N

  double force(double alpha) const { return tire.force(alpha, stiffness, peak); }
  double slope(double alpha) const
  {
    if (tire.kind == TireKind::Linear) {
      return stiffness;
    }
    const double h = 1e-6;
    return (force(alpha + h) - force(alpha - h)) / (2.0 * h);
  }
  /// Slip angle producing `f`; forces beyond the peak map to the peak slip.
  double inverse(double f) const
  {
    if (tire.kind == TireKind::Linear) {
      return f / stiffness;
    }
    double lo = 0.0;
    double hi = 1.0;
    while (hi < 1.5 && force(hi) < std::abs(f) && slope(hi) > 0.0) {
      hi *= 1.2;
    }
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (force(mid) < std::abs(f) && slope(mid) > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return std::copysign(0.5 * (lo + hi), f);
  }
};

/// Parameters the maneuver needs: rigid body plus both axle curves.
struct ManeuverModel
{
  ControlModelParams body{};
  AxleCharacteristic front{};
  AxleCharacteristic rear{};

  /// Linear tires with adhesion-scaled stiffness.
  static ManeuverModel linear(const ControlModelParams & p)
  {
    ManeuverModel m;
    m.body = p;
    m.front = {TireModel::linear(), p.cf(), 0.0};
    m.rear = {TireModel::linear(), p.cr(), 0.0};
    return m;
  }
  /// The vehicle's own tire curves, as used by the truth plant.
  static ManeuverModel of(const VehicleParams & v, const TireModel & tire)
  {
    ManeuverModel m;
    m.body = control_model(v);
    m.front = {tire, v.mu * v.Cf, v.mu * tire.peak_scale * v.front_load()};
    m.rear = {tire, v.mu * v.Cr, v.mu * tire.peak_scale * v.rear_load()};
    return m;
  }
};

class ReferenceManeuver
{
public:
  ReferenceManeuver() = default;

  ReferenceManeuver(const ReferencePath & path, const ControlModelParams & p, int substeps = 4)
  : ReferenceManeuver(path, ManeuverModel::linear(p), substeps)
  {
  }

  /// `substeps` RK4 steps per path interval.
  ReferenceManeuver(const ReferencePath & path, const ManeuverModel & p, int substeps = 4)
  : path_(&path)
  {
    if (substeps < 1) {
      throw InvalidParameterError("maneuver integration needs at least one substep");
    }
    const std::size_t n = path.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!(path.v()[i] >= kMinSpeed)) {
        throw SingularityError("reference maneuver needs a speed profile above the minimum speed");
      }
    }
    points_.resize(n);
    Vec<3> x{0.0, 0.0, path.s()[0]};
    points_[0] = evaluate(path, p, path.s()[0], x);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double h = (path.s()[i + 1] - path.s()[i]) / substeps;
      // Slopes are piecewise constant; take them from inside the interval.
      const double mid = path.s()[i] + 0.5 * (path.s()[i + 1] - path.s()[i]);
      x[2] = path.s()[i];
      for (int k = 0; k < substeps; ++k) {
        x = rk4_step<3>(x, h, [&](const Vec<3> & st) { return derivative(path, p, mid, st); });
      }
      points_[i + 1] = evaluate(path, p, path.s()[i + 1], x);
    }
  }

  std::size_t size() const { return points_.size(); }
  const std::vector<ManeuverPoint> & points() const { return points_; }

  /// Linear interpolation between samples.
  ManeuverPoint at(double s) const
  {
    const ReferencePath & path = *path_;
    s = std::clamp(s, path.s_begin(), path.s_end());
    const std::size_t i = path.segment(s);
    const double w = (s - path.s()[i]) / (path.s()[i + 1] - path.s()[i]);
    const ManeuverPoint & a = points_[i];
    const ManeuverPoint & b = points_[i + 1];
    const auto lerp = [w](double u, double v) { return (1.0 - w) * u + w * v; };
    ManeuverPoint m;
    m.s = s;
    m.v = lerp(a.v, b.v);
    m.v_dot = lerp(a.v_dot, b.v_dot);
    m.psi = lerp(a.psi, b.psi);
    m.psi_dot = lerp(a.psi_dot, b.psi_dot);
    m.vy = lerp(a.vy, b.vy);
    m.beta = lerp(a.beta, b.beta);
    m.z2 = lerp(a.z2, b.z2);
    m.z2_dot = lerp(a.z2_dot, b.z2_dot);
    m.z2_ddot = lerp(a.z2_ddot, b.z2_ddot);
    m.steer = lerp(a.steer, b.steer);
    m.torque = lerp(a.torque, b.torque);
    return m;
  }

private:
  struct Local
  {
    double v, dv_ds, rho, drho_ds;
  };

  static Local local(const ReferencePath & path, double s, double slope_at)
  {
    const PathPoint q = path.at(s);
    const PathPoint d = path.at(slope_at);
    return {q.v, d.dv_ds, q.rho, d.drho_ds};
  }

  struct Rates
  {
    double w_dot, fyr, psi_dot;
  };

  static Rates rates(const ManeuverModel & model, const Local & l, double beta, double w)
  {
    const ControlModelParams & p = model.body;
    const double v = l.v;
    const double v_dot = l.dv_ds * v;
    const double rho_dot = l.drho_ds * v;
    const double a = p.Lf * p.m;
    const double fyr = model.rear.force(-(beta - (l.rho - w / v) * p.Lr));
    const double w_dot =
      (p.wheelbase() * fyr - a * (l.rho * v * v + v_dot * beta) + p.Iz * (rho_dot * v + l.rho * v_dot)) / p.Iz;
    return {w_dot, fyr, l.rho * v - w};
  }

  /// State (beta, w, s) differentiated with respect to arc length.
  static Vec<3> derivative(
    const ReferencePath & path, const ManeuverModel & p, double slope_at, const Vec<3> & st)
  {
    const Local l = local(path, st[2], slope_at);
    const Rates r = rates(p, l, st[0], st[1]);
    return {st[1] / l.v, r.w_dot / l.v, 1.0};
  }

  static ManeuverPoint evaluate(const ReferencePath & path, const ManeuverModel & model, double s, const Vec<3> & st)
  {
    const ControlModelParams & p = model.body;
    // Slopes are taken from the segment that ends at s unless s is the start.
    const double slope_at = s > path.s_begin() ? s - 1e-9 : s;
    const Local l = local(path, s, slope_at);
    const double beta = st[0];
    const double w = st[1];
    const Rates r = rates(model, l, beta, w);
    const double v = l.v;
    const double v_dot = l.dv_ds * v;
    const double rho_dot = l.drho_ds * v;
    const double a = p.Lf * p.m;
    const double L = p.wheelbase();

    ManeuverPoint m;
    m.s = s;
    m.v = v;
    m.v_dot = v_dot;
    m.beta = beta;
    m.vy = v * beta;
    m.psi_dot = r.psi_dot;
    m.psi = path.at(s).psi - beta;
    m.z2 = a * m.vy - p.Iz * m.psi_dot;
    m.z2_dot = L * r.fyr - a * m.psi_dot * v;

    const double psi_ddot = rho_dot * v + l.rho * v_dot - r.w_dot;
    const double alpha_r = -(beta - (l.rho - w / v) * p.Lr);
    const double fyr_dot =
      -model.rear.slope(alpha_r) * (w - rho_dot * p.Lr + r.w_dot * p.Lr / v - w * p.Lr * v_dot / (v * v));
    m.z2_ddot = L * fyr_dot - a * (psi_ddot * v + m.psi_dot * v_dot);

    const double fyf = p.m * (v_dot * beta + l.rho * v * v) - r.fyr;
    m.steer = model.front.inverse(fyf) + (m.vy + m.psi_dot * p.Lf) / v;
    m.torque = p.R * p.m * (v_dot - m.psi_dot * m.vy);
    return m;
  }

  const ReferencePath * path_ = nullptr;
  std::vector<ManeuverPoint> points_;
};

}  // namespace mfcv

#endif  // MFCV_MANEUVER_HPP_
