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

// Reference paths parameterized by arc length.
//
// A path is a curvature profile rho(s) integrated into heading and position:
//   psi_d(s) = psi_0 + int rho ds,  x_d = x_0 + int cos psi_d ds,
//   y_d = y_0 + int sin psi_d ds.
// Between two samples the path is treated as a circular arc whose curvature
// matches the heading increment, which makes projection exact on straight
// lines and circles.

#ifndef MFCV_TRAJECTORY_HPP_
#define MFCV_TRAJECTORY_HPP_

#include "mfcv/error.hpp"
#include "mfcv/numfmt.hpp"
#include "mfcv/plant.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace mfcv
{

inline double wrap_angle(double a)
{
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

/// Curvature of a turn driven at lateral acceleration `ay` and speed `vx`.
inline double curvature_from_dynamics(double ay, double vx)
{
  if (!(vx >= kMinSpeed)) {
    throw SingularityError("curvature undefined below the minimum speed");
  }
  return ay / (vx * vx);
}

/// Interpolated view of a path at one arc length.
struct PathPoint
{
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double rho = 0.0;
  double v = 0.0;
  double drho_ds = 0.0;
  double dv_ds = 0.0;
};

class ReferencePath
{
public:
  ReferencePath() = default;

  /// Builds a path from explicit samples. `v` may be empty (no speed profile).
  ReferencePath(
    std::vector<double> s, std::vector<double> x, std::vector<double> y, std::vector<double> psi,
    std::vector<double> rho, std::vector<double> v = {})
  : s_(std::move(s)), x_(std::move(x)), y_(std::move(y)), psi_(std::move(psi)), rho_(std::move(rho)),
    v_(std::move(v))
  {
    const std::size_t n = s_.size();
    if (n < 2) {
      throw InvalidParameterError("a reference path needs at least 2 samples");
    }
    if (x_.size() != n || y_.size() != n || psi_.size() != n || rho_.size() != n) {
      throw InvalidParameterError("reference path arrays differ in length");
    }
    for (std::size_t i = 1; i < n; ++i) {
      if (!(s_[i] > s_[i - 1])) {
        throw InvalidParameterError("reference path arc length must be strictly increasing");
      }
    }
    if (v_.empty()) {
      v_.assign(n, 0.0);
    } else if (v_.size() != n) {
      throw InvalidParameterError("speed profile length differs from the path");
    }
  }

  std::size_t size() const { return s_.size(); }
  double length() const { return s_.back() - s_.front(); }
  double s_begin() const { return s_.front(); }
  double s_end() const { return s_.back(); }

  const std::vector<double> & s() const { return s_; }
  const std::vector<double> & x() const { return x_; }
  const std::vector<double> & y() const { return y_; }
  const std::vector<double> & psi() const { return psi_; }
  const std::vector<double> & rho() const { return rho_; }
  const std::vector<double> & v() const { return v_; }

  void set_speed_profile(std::vector<double> v)
  {
    if (v.size() != s_.size()) {
      throw InvalidParameterError("speed profile length differs from the path");
    }
    v_ = std::move(v);
  }

  /// Segment index i with s_i <= s < s_{i+1}, clamped to the valid range.
  std::size_t segment(double s) const
  {
    if (s <= s_.front()) {
      return 0;
    }
    if (s >= s_.back()) {
      return s_.size() - 2;
    }
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    return static_cast<std::size_t>(it - s_.begin()) - 1;
  }

  /// Heading change per unit length over segment i.
  double segment_curvature(std::size_t i) const
  {
    return (psi_[i + 1] - psi_[i]) / (s_[i + 1] - s_[i]);
  }

  PathPoint at(double s) const
  {
    s = std::clamp(s, s_.front(), s_.back());
    const std::size_t i = segment(s);
    const double h = s_[i + 1] - s_[i];
    const double sigma = s - s_[i];
    const double w = sigma / h;
    const double k = segment_curvature(i);
    PathPoint p;
    p.s = s;
    p.psi = psi_[i] + k * sigma;
    if (std::abs(k) < 1e-12) {
      p.x = x_[i] + sigma * std::cos(psi_[i]);
      p.y = y_[i] + sigma * std::sin(psi_[i]);
    } else {
      p.x = x_[i] + (std::sin(p.psi) - std::sin(psi_[i])) / k;
      p.y = y_[i] - (std::cos(p.psi) - std::cos(psi_[i])) / k;
    }
    p.rho = (1.0 - w) * rho_[i] + w * rho_[i + 1];
    p.v = (1.0 - w) * v_[i] + w * v_[i + 1];
    p.drho_ds = (rho_[i + 1] - rho_[i]) / h;
    p.dv_ds = (v_[i + 1] - v_[i]) / h;
    return p;
  }

private:
  std::vector<double> s_;
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> psi_;
  std::vector<double> rho_;
  std::vector<double> v_;
};

struct PathOrigin
{
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
};

/// Cumulative trapezoidal integration of a curvature profile.
inline ReferencePath reconstruct_path(
  const std::vector<double> & s, const std::vector<double> & rho, const PathOrigin & origin = {})
{
  const std::size_t n = s.size();
  if (n < 2 || rho.size() != n) {
    throw InvalidParameterError("curvature samples and arc-length grid must match and hold 2+ points");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(s[i] > s[i - 1])) {
      throw InvalidParameterError("arc-length grid is not strictly increasing at index " + std::to_string(i));
    }
  }
  std::vector<double> psi(n), x(n), y(n);
  psi[0] = origin.psi;
  x[0] = origin.x;
  y[0] = origin.y;
  for (std::size_t i = 1; i < n; ++i) {
    const double h = s[i] - s[i - 1];
    psi[i] = psi[i - 1] + 0.5 * h * (rho[i - 1] + rho[i]);
    x[i] = x[i - 1] + 0.5 * h * (std::cos(psi[i - 1]) + std::cos(psi[i]));
    y[i] = y[i - 1] + 0.5 * h * (std::sin(psi[i - 1]) + std::sin(psi[i]));
  }
  return ReferencePath(s, std::move(x), std::move(y), std::move(psi), rho);
}

struct SpeedProfileParams
{
  double v_max = 20.0;             // m/s
  double ay_max = 4.0;             // m/s^2
  double a_long = 1.0;             // m/s^2, acceleration and deceleration limit
  double smoothing_length = 20.0;  // m, moving-average width
  // Scale v_max and ay_max by min(1, mu / friction_reference) so that the
  // profile stays drivable on slippery roads.
  bool friction_adapted = true;
  double friction_reference = 0.7;

  void validate() const
  {
    if (!(v_max >= kMinSpeed) || !(ay_max > 0.0) || !(a_long > 0.0) || !(smoothing_length >= 0.0) ||
        !(friction_reference > 0.0)) {
      throw InvalidParameterError("speed profile parameters must be positive");
    }
  }
};

/// Curvature-scheduled speed V = min(v_max, sqrt(ay_max / |rho|)), limited to
/// +/- a_long in both directions of travel, then smoothed.
inline std::vector<double> speed_profile(
  const std::vector<double> & s, const std::vector<double> & rho, const SpeedProfileParams & params,
  double mu = 1.0)
{
  params.validate();
  const double scale = params.friction_adapted ? std::min(1.0, mu / params.friction_reference) : 1.0;
  const double v_max = params.v_max * scale;
  const double ay_max = params.ay_max * scale;
  const std::size_t n = s.size();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = std::abs(rho[i]);
    v[i] = k > 0.0 ? std::min(v_max, std::sqrt(ay_max / k)) : v_max;
  }
  for (std::size_t i = 1; i < n; ++i) {
    v[i] = std::min(v[i], std::sqrt(v[i - 1] * v[i - 1] + 2.0 * params.a_long * (s[i] - s[i - 1])));
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    v[i] = std::min(v[i], std::sqrt(v[i + 1] * v[i + 1] + 2.0 * params.a_long * (s[i + 1] - s[i])));
  }
  const double h = (s.back() - s.front()) / static_cast<double>(n - 1);
  const std::size_t width = static_cast<std::size_t>(std::lround(params.smoothing_length / h));
  if (width < 2) {
    return v;
  }
  const std::size_t left = width / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i + j) - static_cast<std::ptrdiff_t>(left);
      acc += v[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(n - 1)))];
    }
    out[i] = acc / static_cast<double>(width);
  }
  return out;
}

enum class TrackKind { StraightLaneChange, Circle, SCurve, TrackLike };

inline std::string to_string(TrackKind k)
{
  switch (k) {
    case TrackKind::StraightLaneChange: return "straight_lane_change";
    case TrackKind::Circle: return "circle";
    case TrackKind::SCurve: return "s_curve";
    case TrackKind::TrackLike: return "track_like";
  }
  return "unknown";
}

inline TrackKind track_kind_from_string(const std::string & name)
{
  for (TrackKind k : {TrackKind::StraightLaneChange, TrackKind::Circle, TrackKind::SCurve, TrackKind::TrackLike}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  throw InvalidParameterError(
    "unknown track kind '" + name + "' (expected straight_lane_change, circle, s_curve or track_like)");
}

struct TrackParams
{
  double spacing = 0.5;           // m
  double lead_in = 60.0;          // m, straight before the first feature
  double run_out = 100.0;         // m, straight after the last feature
  double transition = 40.0;       // m, clothoid length between curvature levels
  double radius = 50.0;           // m, Circle and SCurve
  double laps = 1.0;              // Circle only
  double lane_width = 3.5;        // m, StraightLaneChange
  double lane_change_length = 60.0;  // m
  double lane_hold = 40.0;        // m, straight between the two lane changes
  PathOrigin origin{};

  void validate() const
  {
    if (!(spacing > 0.0) || !(lead_in >= 0.0) || !(run_out >= 0.0) || !(transition >= 0.0) ||
        !(radius > 0.0) || !(laps > 0.0) || !(lane_change_length > 0.0) || !(lane_hold >= 0.0) ||
        !std::isfinite(lane_width)) {
      throw InvalidParameterError("track parameters out of range");
    }
  }
};

namespace detail
{

/// Appends curvature samples following a piecewise description.
class CurvatureBuilder
{
public:
  explicit CurvatureBuilder(double h) : h_(h) { rho_.push_back(0.0); }

  template <class Fn>
  void segment(double length, Fn && rho_of_local_s)
  {
    const auto n = static_cast<std::size_t>(std::lround(length / h_));
    for (std::size_t i = 1; i <= n; ++i) {
      rho_.push_back(rho_of_local_s(static_cast<double>(i) * h_));
    }
  }
  void straight(double length)
  {
    segment(length, [](double) { return 0.0; });
  }
  void arc(double length, double k)
  {
    segment(length, [k](double) { return k; });
  }
  void ramp_to(double length, double k)
  {
    const double k0 = rho_.back();
    if (length <= 0.0 || k0 == k) {
      return;
    }
    segment(length, [=](double ls) { return k0 + (k - k0) * std::min(1.0, ls / length); });
  }

  ReferencePath finish(const PathOrigin & origin) const
  {
    std::vector<double> s(rho_.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = static_cast<double>(i) * h_;
    }
    return reconstruct_path(s, rho_, origin);
  }

private:
  double h_;
  std::vector<double> rho_;
};

}  // namespace detail

/// Synthetic reference geometry; the speed profile is left at zero.
inline ReferencePath synthetic_track(TrackKind kind, const TrackParams & p = {})
{
  p.validate();
  detail::CurvatureBuilder b(p.spacing);
  b.straight(p.lead_in);
  switch (kind) {
    case TrackKind::StraightLaneChange: {
      // Sine curvature bump: heading returns to zero, lateral shift = width.
      const double lc = p.lane_change_length;
      const double amp = 2.0 * std::numbers::pi * p.lane_width / (lc * lc);
      const auto bump = [lc](double a) {
        return [lc, a](double ls) { return a * std::sin(2.0 * std::numbers::pi * ls / lc); };
      };
      b.segment(lc, bump(amp));
      b.straight(p.lane_hold);
      b.segment(lc, bump(-amp));
      break;
    }
    case TrackKind::Circle:
      b.ramp_to(p.transition, 1.0 / p.radius);
      b.arc(2.0 * std::numbers::pi * p.radius * p.laps, 1.0 / p.radius);
      b.ramp_to(p.transition, 0.0);
      break;
    case TrackKind::SCurve: {
      const double quarter = 0.5 * std::numbers::pi * p.radius;
      b.ramp_to(p.transition, 1.0 / p.radius);
      b.arc(quarter, 1.0 / p.radius);
      b.ramp_to(p.transition, -1.0 / p.radius);
      b.arc(quarter, -1.0 / p.radius);
      b.ramp_to(p.transition, 0.0);
      break;
    }
    case TrackKind::TrackLike: {
      // Straights and bends of 30 to 200 m radius joined by clothoids.
      const std::pair<double, double> segments[] = {
        {150.0, 1.0 / 200.0}, {80.0, 0.0},  {90.0, -1.0 / 60.0}, {60.0, 0.0},          {70.0, 1.0 / 30.0},
        {100.0, 0.0},         {120.0, -1.0 / 100.0}, {50.0, 1.0 / 45.0}, {150.0, 0.0}};
      for (const auto & [length, k] : segments) {
        b.ramp_to(p.transition, k);
        b.arc(length, k);
      }
      b.ramp_to(p.transition, 0.0);
      break;
    }
  }
  b.straight(p.run_out);
  return b.finish(p.origin);
}

/// Result of projecting a pose onto a path.
struct Projection
{
  double y_err = 0.0;    // m, positive left of the path tangent
  double s_proj = 0.0;   // m
  double psi_err = 0.0;  // rad, wrapped to (-pi, pi]
  double psi_path = 0.0; // rad, path heading at s_proj
};

struct Pose
{
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
};

namespace detail
{

struct SegmentHit
{
  double sigma = 0.0;
  double lat = 0.0;
  double dist = std::numeric_limits<double>::infinity();
  bool inside = false;
};

/// Projection of (px, py) onto the arc starting at sample i.
inline SegmentHit project_segment(const ReferencePath & path, std::size_t i, double px, double py)
{
  const double h = path.s()[i + 1] - path.s()[i];
  const double k = path.segment_curvature(i);
  const double ps = path.psi()[i];
  const double tx = std::cos(ps);
  const double ty = std::sin(ps);
  const double nx = -ty;
  const double ny = tx;
  const double dx = px - path.x()[i];
  const double dy = py - path.y()[i];
  SegmentHit hit;
  if (std::abs(k) < 1e-12) {
    hit.sigma = dx * tx + dy * ty;
    hit.lat = dx * nx + dy * ny;
  } else {
    const double cx = dx - nx / k;
    const double cy = dy - ny / k;
    const double dt = cx * tx + cy * ty;
    const double dn = cx * nx + cy * ny;
    const double theta = k > 0.0 ? std::atan2(dt, -dn) : std::atan2(-dt, dn);
    hit.sigma = theta / k;
    hit.lat = 1.0 / k - std::copysign(1.0, k) * std::hypot(dt, dn);
  }
  hit.inside = hit.sigma >= 0.0 && hit.sigma <= h;
  if (hit.inside) {
    hit.dist = std::abs(hit.lat);
  } else {
    const double sc = std::clamp(hit.sigma, 0.0, h);
    const PathPoint q = path.at(path.s()[i] + sc);
    hit.dist = std::hypot(px - q.x, py - q.y);
    hit.lat = -(px - q.x) * std::sin(q.psi) + (py - q.y) * std::cos(q.psi);
    hit.sigma = sc;
  }
  return hit;
}

inline Projection search(
  const ReferencePath & path, const Pose & pose, std::size_t first, std::size_t last, bool & found)
{
  SegmentHit best;
  std::size_t best_i = first;
  for (std::size_t i = first; i <= last; ++i) {
    const SegmentHit hit = project_segment(path, i, pose.x, pose.y);
    if (hit.dist < best.dist) {
      best = hit;
      best_i = i;
    }
  }
  found = std::isfinite(best.dist);
  Projection out;
  out.s_proj = path.s()[best_i] + best.sigma;
  out.y_err = best.lat;
  out.psi_path = path.psi()[best_i] + path.segment_curvature(best_i) * best.sigma;
  out.psi_err = wrap_angle(pose.psi - out.psi_path);
  return out;
}

}  // namespace detail

inline constexpr double kDefaultCorridor = 20.0;

/// Global nearest-point projection onto the whole path.
inline Projection lateral_deviation(const Pose & pose, const ReferencePath & path, double corridor = kDefaultCorridor)
{
  bool found = false;
  const Projection p = detail::search(path, pose, 0, path.size() - 2, found);
  if (!found || std::abs(p.y_err) > corridor) {
    throw OffCorridorError("pose is " + std::to_string(std::abs(p.y_err)) + " m from the path (corridor " +
                           std::to_string(corridor) + " m)");
  }
  return p;
}

/// Stateful projection for closed-loop runs: searches a window ahead of the
/// previous arc length and never moves backwards.
class PathProjector
{
public:
  explicit PathProjector(
    const ReferencePath & path, double corridor = kDefaultCorridor, double look_back = 1.0,
    double look_ahead = 30.0)
  : path_(&path), corridor_(corridor), look_back_(look_back), look_ahead_(look_ahead)
  {
    if (!(corridor > 0.0) || !(look_back >= 0.0) || !(look_ahead > 0.0)) {
      throw InvalidParameterError("projector corridor and search window must be positive");
    }
  }

  Projection project(const Pose & pose)
  {
    const ReferencePath & path = *path_;
    const std::size_t first = path.segment(s_ - look_back_);
    const std::size_t last = path.segment(s_ + look_ahead_);
    bool found = false;
    Projection p = detail::search(path, pose, first, last, found);
    if (!found || std::abs(p.y_err) > corridor_) {
      throw OffCorridorError("vehicle left the " + std::to_string(corridor_) + " m corridor at s=" +
                             std::to_string(s_) + " m");
    }
    if (p.s_proj < s_) {
      const PathPoint q = path.at(s_);
      p.s_proj = s_;
      p.psi_path = q.psi;
      p.psi_err = wrap_angle(pose.psi - q.psi);
      p.y_err = -(pose.x - q.x) * std::sin(q.psi) + (pose.y - q.y) * std::cos(q.psi);
    }
    s_ = p.s_proj;
    return p;
  }

  double s() const { return s_; }
  void reset(double s = 0.0) { s_ = s; }

private:
  const ReferencePath * path_;
  double corridor_;
  double look_back_;
  double look_ahead_;
  double s_ = 0.0;
};

/// CSV with header `s,x_d,y_d,psi_d,rho_d,Vx_d`, one row per sample.
inline std::string path_to_csv(const ReferencePath & path)
{
  std::ostringstream os;
  os << "s,x_d,y_d,psi_d,rho_d,Vx_d\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    os << exact(path.s()[i]) << ',' << exact(path.x()[i]) << ',' << exact(path.y()[i]) << ',' << exact(path.psi()[i])
       << ',' << exact(path.rho()[i]) << ',' << exact(path.v()[i]) << '\n';
  }
  return os.str();
}

inline ReferencePath path_from_csv(std::istream & in)
{
  std::string line;
  if (!std::getline(in, line) || line != "s,x_d,y_d,psi_d,rho_d,Vx_d") {
    throw InvalidParameterError("path CSV must start with the header s,x_d,y_d,psi_d,rho_d,Vx_d");
  }
  std::vector<double> cols[6];
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) {
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    for (int c = 0; c < 6; ++c) {
      if (!std::getline(ls, cell, ',')) {
        throw InvalidParameterError("path CSV row " + std::to_string(row) + " has fewer than 6 columns");
      }
      try {
        cols[c].push_back(std::stod(cell));
      } catch (const std::exception &) {
        throw InvalidParameterError("path CSV row " + std::to_string(row) + " holds a non-numeric cell");
      }
    }
  }
  return ReferencePath(cols[0], cols[1], cols[2], cols[3], cols[4], cols[5]);
}

}  // namespace mfcv

#endif  // MFCV_TRAJECTORY_HPP_
