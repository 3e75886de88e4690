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

// Named built-in scenarios: every synthetic track with every controller,
// named <track>_<controller> (for example circle_mfc, tracklike_pid).

#ifndef MFCV_CATALOG_HPP_
#define MFCV_CATALOG_HPP_

#include "mfcv/error.hpp"
#include "mfcv/scenario.hpp"

#include <string>
#include <utility>
#include <vector>

namespace mfcv
{

struct CatalogEntry
{
  std::string name;
  std::string description;
  Scenario scenario;
};

inline std::vector<CatalogEntry> scenario_catalog()
{
  const std::pair<TrackKind, std::pair<const char *, const char *>> tracks[] = {
    {TrackKind::TrackLike, {"tracklike", "closed-course-like sequence of curves and straights"}},
    {TrackKind::Circle, {"circle", "one lap of a 50 m radius circle"}},
    {TrackKind::SCurve, {"s_curve", "left then right 50 m radius arcs"}},
    {TrackKind::StraightLaneChange, {"lane_change", "double lane change on a straight road"}},
  };
  std::vector<CatalogEntry> out;
  for (const auto & [kind, text] : tracks) {
    for (ControllerKind c : {ControllerKind::Mfc, ControllerKind::Flat, ControllerKind::Pid}) {
      CatalogEntry e;
      e.name = std::string(text.first) + "_" + to_string(c);
      e.description = std::string(text.second) + ", " + to_string(c) + " controller";
      e.scenario.name = e.name;
      e.scenario.track = kind;
      e.scenario.controller = c;
      out.push_back(std::move(e));
    }
  }
  return out;
}

inline Scenario catalog_scenario(const std::string & name)
{
  for (const auto & e : scenario_catalog()) {
    if (e.name == name) {
      return e.scenario;
    }
  }
  std::string known;
  for (const auto & e : scenario_catalog()) {
    known += (known.empty() ? "" : ", ") + e.name;
  }
  throw ConfigError("unknown scenario '" + name + "' (available: " + known + ")");
}

}  // namespace mfcv

#endif  // MFCV_CATALOG_HPP_
