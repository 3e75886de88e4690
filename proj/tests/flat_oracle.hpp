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


// Independent checks of the flat-output algebra. The round trip samples random
// body velocities; the dynamics check differentiates the control-model vector
// field numerically along its own flow and in the inputs.

#ifndef MFCV_TESTS_FLAT_ORACLE_HPP_
#define MFCV_TESTS_FLAT_ORACLE_HPP_

#include "mfcv/flatness.hpp"
#include "mfcv/plant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace mfcv::testing
{

struct StateSampler
{
  std::mt19937_64 rng;
  explicit StateSampler(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

  /// Forward speeds well clear of the recovery singularity.
  PlantState state()
  {
    PlantState s;
    s.Vx = uniform(3.0, 40.0);
    s.Vy = uniform(-2.0, 2.0);
    s.psi_dot = uniform(-1.0, 1.0);
    s.psi = uniform(-3.0, 3.0);
    return s;
  }
  ControlInput input() { return {uniform(-1500.0, 1500.0), uniform(-0.2, 0.2)}; }
};

/// Largest relative error of recover_state(flat_outputs(x)) over n states.
inline double flat_round_trip_error(const ControlModelParams & p, int n, std::uint64_t seed)
{
  StateSampler gen(seed);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const PlantState s = gen.state();
    const FlatOutputs z = flat_outputs(s, p);
    const BodyVelocities b = recover_state(z.z1, z.z2, flat_output_rate(s, p), p);
    worst = std::max({worst, std::abs(b.Vx - s.Vx) / std::max(1.0, std::abs(s.Vx)),
                      std::abs(b.Vy - s.Vy) / std::max(1.0, std::abs(s.Vy)),
                      std::abs(b.psi_dot - s.psi_dot) / std::max(1.0, std::abs(s.psi_dot))});
  }
  return worst;
}

/// z2' from the vector field: Lf m Vy' - Iz psi''.
inline double z2_rate_from_field(const PlantState & s, const ControlInput & u, const ControlModelParams & p)
{
  const Vec<8> f = control_model_derivative(s, u, p);
  return p.Lf * p.m * f[1] - p.Iz * f[3];
}

/// [z1', z2''] by central differences of the vector field along its flow.
inline std::array<double, 2> flat_accel_fd(const PlantState & s, const ControlInput & u, const ControlModelParams & p)
{
  const Vec<8> f = control_model_derivative(s, u, p);
  const double h = 1e-5;
  Vec<8> xp = s.to_vec();
  Vec<8> xm = s.to_vec();
  for (std::size_t i = 0; i < 8; ++i) {
    xp[i] += h * f[i];
    xm[i] -= h * f[i];
  }
  const double z2_dd =
    (z2_rate_from_field(PlantState::from_vec(xp), u, p) - z2_rate_from_field(PlantState::from_vec(xm), u, p)) / (2.0 * h);
  return {f[0], z2_dd};
}

struct FlatDynamicsCheck
{
  double phi_error = 0.0;    // relative, worst over points
  double delta_error = 0.0;  // relative, worst over points and entries
};

/// Compares Phi + Delta u and the columns of Delta with finite differences.
inline FlatDynamicsCheck flat_dynamics_error(const ControlModelParams & p, int n, std::uint64_t seed)
{
  StateSampler gen(seed);
  FlatDynamicsCheck out;
  const auto rel = [](double a, double b, double scale) { return std::abs(a - b) / std::max(std::abs(b), scale); };
  for (int i = 0; i < n; ++i) {
    const PlantState s = gen.state();
    const ControlInput u = gen.input();
    const FlatDynamics d = flat_dynamics(s, p);
    const auto fd = flat_accel_fd(s, u, p);
    for (int r = 0; r < 2; ++r) {
      const double model = d.phi[r] + d.delta[r][0] * u.torque + d.delta[r][1] * u.steer;
      const double scale = std::abs(d.phi[r]) + std::abs(d.delta[r][0] * u.torque) + std::abs(d.delta[r][1] * u.steer);
      out.phi_error = std::max(out.phi_error, rel(model, fd[r], 1e-6 * scale + 1e-12));
    }
    const double hu[2] = {10.0, 1e-4};
    for (int c = 0; c < 2; ++c) {
      ControlInput up = u;
      ControlInput um = u;
      (c == 0 ? up.torque : up.steer) += hu[c];
      (c == 0 ? um.torque : um.steer) -= hu[c];
      const auto a = flat_accel_fd(s, up, p);
      const auto b = flat_accel_fd(s, um, p);
      for (int r = 0; r < 2; ++r) {
        const double col = (a[r] - b[r]) / (2.0 * hu[c]);
        const double scale = std::max(std::abs(d.delta[r][0]) * 1500.0, std::abs(d.delta[r][1]) * 0.2) / hu[c];
        if (d.delta[r][c] == 0.0) {
          out.delta_error = std::max(out.delta_error, std::abs(col) * hu[c] / std::max(scale * hu[c], 1e-12));
        } else {
          out.delta_error = std::max(out.delta_error, rel(col, d.delta[r][c], 1e-9 * scale));
        }
      }
    }
  }
  return out;
}

}  // namespace mfcv::testing

#endif  // MFCV_TESTS_FLAT_ORACLE_HPP_
