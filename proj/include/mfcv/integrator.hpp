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

#ifndef MFCV_INTEGRATOR_HPP_
#define MFCV_INTEGRATOR_HPP_

#include <array>
#include <cstddef>
#include <type_traits>

namespace mfcv
{

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
constexpr Vec<N> axpy(const Vec<N> & x, double a, const Vec<N> & y)
{
  Vec<N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = x[i] + a * y[i];
  }
  return out;
}

/// One classical fourth-order Runge-Kutta step of x' = f(x).
/// The input is held constant over the step (zero-order hold), so callers
/// capture it in `f`.
template <std::size_t N, class Derivative>
  requires std::is_invocable_r_v<Vec<N>, Derivative, const Vec<N> &>
Vec<N> rk4_step(const Vec<N> & x, double dt, Derivative && f)
{
  const Vec<N> k1 = f(x);
  const Vec<N> k2 = f(axpy(x, 0.5 * dt, k1));
  const Vec<N> k3 = f(axpy(x, 0.5 * dt, k2));
  const Vec<N> k4 = f(axpy(x, dt, k3));
  Vec<N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

}  // namespace mfcv

#endif  // MFCV_INTEGRATOR_HPP_
