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

#ifndef MFCV_METRICS_HPP_
#define MFCV_METRICS_HPP_

#include "mfcv/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>

namespace mfcv
{

/// Maximum normalized error in percent:
///   max_i 100 |z_s(i) - z_act(i)| / max_j |z_act(j)|.
inline double normalized_error(std::span<const double> z_s, std::span<const double> z_act)
{
  if (z_s.size() != z_act.size()) {
    throw InvalidParameterError("normalized error needs series of equal length");
  }
  double scale = 0.0;
  for (double v : z_act) {
    scale = std::max(scale, std::abs(v));
  }
  if (!(scale > 0.0)) {
    throw ZeroReferenceError("normalized error is undefined when the reference is identically zero");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < z_s.size(); ++i) {
    worst = std::max(worst, 100.0 * std::abs(z_s[i] - z_act[i]) / scale);
  }
  return worst;
}

struct ChannelError
{
  double normalized_pct = 0.0;  // max normalized error, percent; NaN for a zero reference
  double linf = 0.0;            // max absolute raw error
  double rms = 0.0;             // root mean square raw error
};

/// Raw and normalized errors of one channel. A reference that is
/// identically zero leaves the normalized error undefined (NaN).
inline ChannelError channel_error(std::span<const double> z_s, std::span<const double> z_act)
{
  ChannelError c;
  try {
    c.normalized_pct = normalized_error(z_s, z_act);
  } catch (const ZeroReferenceError &) {
    c.normalized_pct = std::numeric_limits<double>::quiet_NaN();
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < z_s.size(); ++i) {
    const double e = z_s[i] - z_act[i];
    c.linf = std::max(c.linf, std::abs(e));
    sq += e * e;
  }
  c.rms = z_s.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(z_s.size()));
  return c;
}

/// Per-channel errors of one run; samples before `excluded_before` seconds
/// are left out.
struct ErrorReport
{
  std::map<std::string, ChannelError> channels;
  double excluded_before = 0.0;  // s
  std::size_t samples = 0;

  const ChannelError & at(const std::string & name) const
  {
    const auto it = channels.find(name);
    if (it == channels.end()) {
      throw InvalidParameterError("error report has no channel '" + name + "'");
    }
    return it->second;
  }
};

}  // namespace mfcv

#endif  // MFCV_METRICS_HPP_
