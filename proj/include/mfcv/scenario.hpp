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

// Closed-loop scenario harness: truth plant, one controller and a reference
// track stepped at a single fixed rate, plus the comparison grid over road
// adhesion and controllers.

#ifndef MFCV_SCENARIO_HPP_
#define MFCV_SCENARIO_HPP_

#include "mfcv/error.hpp"
#include "mfcv/flatness.hpp"
#include "mfcv/maneuver.hpp"
#include "mfcv/metrics.hpp"
#include "mfcv/mfc_vehicle.hpp"
#include "mfcv/numfmt.hpp"
#include "mfcv/pid.hpp"
#include "mfcv/plant.hpp"
#include "mfcv/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace mfcv
{

enum class ControllerKind { Mfc, Flat, Pid };

inline std::string to_string(ControllerKind k)
{
  switch (k) {
    case ControllerKind::Mfc: return "mfc";
    case ControllerKind::Flat: return "flat";
    case ControllerKind::Pid: return "pid";
  }
  return "unknown";
}

inline ControllerKind controller_kind_from_string(const std::string & name)
{
  for (ControllerKind k : {ControllerKind::Mfc, ControllerKind::Flat, ControllerKind::Pid}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  throw InvalidParameterError("unknown controller '" + name + "' (expected mfc, flat or pid)");
}

/// Additive white measurement noise (standard deviations). Zero disables it.
struct NoiseSpec
{
  double vx = 0.0;       // m/s
  double y = 0.0;        // m
  double psi = 0.0;      // rad
  double vy = 0.0;       // m/s
  double psi_dot = 0.0;  // rad/s

  bool enabled() const { return vx > 0.0 || y > 0.0 || psi > 0.0 || vy > 0.0 || psi_dot > 0.0; }
  void validate() const
  {
    for (double s : {vx, y, psi, vy, psi_dot}) {
      if (!(s >= 0.0) || !std::isfinite(s)) {
        throw InvalidParameterError("noise standard deviations must be finite and non-negative");
      }
    }
  }
};

struct Scenario
{
  std::string name = "scenario";
  TrackKind track = TrackKind::TrackLike;
  TrackParams track_params{};
  SpeedProfileParams speed{};
  ControllerKind controller = ControllerKind::Mfc;
  VehicleParams vehicle{};
  TireModel tire = TireModel::saturating();
  double fs = 200.0;                // Hz, control and plant step rate
  std::optional<double> duration;   // s; unset runs to the end of the track
  std::uint64_t seed = 1;
  NoiseSpec noise{};
  double corridor = kDefaultCorridor;  // m
  double end_margin = 60.0;            // m before the path end where the run stops
  double max_time = 600.0;             // s, safety stop
  double bootstrap_margin = 0.1;       // s added to the estimator window for metrics

  MfcConfig mfc{};
  FlatGains flat{};
  double flat_model_mu = 1.0;  // adhesion assumed by the flatness model
  PidVehicleConfig pid{};
  ActuatorLimits limits{};

  void validate() const
  {
    vehicle.validate();
    tire.validate();
    track_params.validate();
    speed.validate();
    noise.validate();
    flat.validate();
    if (!(fs > 0.0) || !std::isfinite(fs)) {
      throw InvalidParameterError("scenario rate fs must be positive");
    }
    if (duration && !(*duration >= 0.0)) {
      throw InvalidParameterError("scenario duration must be non-negative");
    }
    if (!(corridor > 0.0) || !(end_margin >= 0.0) || !(max_time > 0.0) || !(bootstrap_margin >= 0.0)) {
      throw InvalidParameterError("scenario corridor, end margin and time limits must be positive");
    }
    if (!(flat_model_mu > 0.0 && flat_model_mu <= 1.0)) {
      throw InvalidParameterError("flat_model_mu must lie in (0, 1]");
    }
    if (!(limits.max_steer > 0.0) || !(limits.max_torque > 0.0)) {
      throw InvalidParameterError("actuator limits must be positive");
    }
    MfcConfig m = mfc_config();
    m.validate();
    pid_config().validate();
  }

  /// Controller configs with the scenario rate and limits applied.
  MfcConfig mfc_config() const
  {
    MfcConfig m = mfc;
    m.longitudinal.estimator.fs = fs;
    m.lateral.estimator.fs = fs;
    m.limits = limits;
    return m;
  }
  PidVehicleConfig pid_config() const
  {
    PidVehicleConfig p = pid;
    p.fs = fs;
    p.limits = limits;
    return p;
  }
  ControlModelParams flat_model() const
  {
    ControlModelParams p = control_model(vehicle);
    p.mu = flat_model_mu;
    return p;
  }
  /// Samples before this time are excluded from every metric.
  double bootstrap_exclusion() const { return mfc_config().bootstrap_time() + bootstrap_margin; }
};

/// Reference track with speed profile and the matching reference maneuver.
struct PreparedTrack
{
  ReferencePath path;
  ReferenceManeuver maneuver;
};

inline std::shared_ptr<const PreparedTrack> prepare_track(const Scenario & scn)
{
  auto prepared = std::make_shared<PreparedTrack>();
  prepared->path = synthetic_track(scn.track, scn.track_params);
  prepared->path.set_speed_profile(
    speed_profile(prepared->path.s(), prepared->path.rho(), scn.speed, scn.vehicle.mu));
  prepared->maneuver = ReferenceManeuver(prepared->path, ManeuverModel::of(scn.vehicle, scn.tire));
  return prepared;
}

enum class Verdict { Completed, OffCorridor, NonFinite, Singular, Timeout };

inline std::string to_string(Verdict v)
{
  switch (v) {
    case Verdict::Completed: return "completed";
    case Verdict::OffCorridor: return "off_corridor";
    case Verdict::NonFinite: return "non_finite";
    case Verdict::Singular: return "singular";
    case Verdict::Timeout: return "timeout";
  }
  return "unknown";
}

struct TraceSample
{
  double t = 0.0;
  PlantState state{};
  double s_proj = 0.0;
  double y_err = 0.0;       // measured lateral deviation (noise included)
  double vx_ref = 0.0;
  double psi_ref = 0.0;     // reference yaw (unwrapped)
  double y_path = 0.0;      // global Y of the path at s_proj
  double z2 = 0.0;
  double z2_ref = 0.0;
  double e_vx = 0.0;        // Vx - Vx_ref
  double e_psi = 0.0;       // wrapped psi - psi_ref
  double e_y = 0.0;         // true lateral deviation
  double e_z2 = 0.0;        // z2 - z2_ref
  double torque = 0.0;
  double steer = 0.0;
  double F1 = 0.0;
  double F2 = 0.0;
  bool torque_saturated = false;
  bool steer_saturated = false;
  bool controller_ready = true;
};

struct RunTrace
{
  std::string scenario;
  std::string controller;
  double mu = 1.0;
  double fs = 200.0;
  double bootstrap_exclusion = 0.0;
  Verdict verdict = Verdict::Completed;
  std::string message;
  std::vector<TraceSample> samples;

  bool completed() const { return verdict == Verdict::Completed; }
};

namespace detail
{

/// Controller wrapper selected at run time.
class AnyController
{
public:
  AnyController(const Scenario & scn)
  : kind_(scn.controller)
  {
    switch (kind_) {
      case ControllerKind::Mfc: mfc_ = std::make_unique<MfcVehicleController>(scn.mfc_config()); break;
      case ControllerKind::Flat:
        flat_ = std::make_unique<FlatController>(scn.flat_model(), scn.flat, scn.limits, scn.fs);
        break;
      case ControllerKind::Pid: pid_ = std::make_unique<PidVehicleController>(scn.pid_config()); break;
    }
  }

  /// `measured` holds the (possibly noisy) plant state; `y_err` the measured
  /// lateral deviation.
  void step(const PlantState & measured, double y_err, const ManeuverPoint & ref, TraceSample & out)
  {
    switch (kind_) {
      case ControllerKind::Mfc: {
        const MfcStep r = mfc_->step({measured.Vx, y_err}, {ref.v, ref.v_dot, 0.0}, {0.0, 0.0, 0.0});
        out.torque = r.u.torque;
        out.steer = r.u.steer;
        out.F1 = r.F1;
        out.F2 = r.F2;
        out.torque_saturated = r.torque_saturated;
        out.steer_saturated = r.steer_saturated;
        out.controller_ready = r.ready;
        break;
      }
      case ControllerKind::Flat: {
        const FlatStep r = flat_->step(
          measured, {ref.v, ref.v_dot, ref.z2, ref.z2_dot, ref.z2_ddot}, {y_err, wrap_angle(measured.psi - ref.psi)});
        out.torque = r.u.torque;
        out.steer = r.u.steer;
        out.torque_saturated = r.torque_saturated;
        out.steer_saturated = r.steer_saturated;
        break;
      }
      case ControllerKind::Pid: {
        const PidStep r = pid_->step({measured.Vx, y_err}, {ref.v, 0.0});
        out.torque = r.u.torque;
        out.steer = r.u.steer;
        out.torque_saturated = r.torque_saturated;
        out.steer_saturated = r.steer_saturated;
        break;
      }
    }
  }

private:
  ControllerKind kind_;
  std::unique_ptr<MfcVehicleController> mfc_;
  std::unique_ptr<FlatController> flat_;
  std::unique_ptr<PidVehicleController> pid_;
};

}  // namespace detail

/// Runs one closed-loop scenario. Failures end the run and are reported in
/// the verdict; the samples collected so far are kept.
inline RunTrace run_scenario(const Scenario & scn, std::shared_ptr<const PreparedTrack> track = nullptr)
{
  scn.validate();
  if (!track) {
    track = prepare_track(scn);
  }
  const ReferencePath & path = track->path;
  const ReferenceManeuver & maneuver = track->maneuver;
  const ControlModelParams model = control_model(scn.vehicle);

  RunTrace trace;
  trace.scenario = scn.name;
  trace.controller = to_string(scn.controller);
  trace.mu = scn.vehicle.mu;
  trace.fs = scn.fs;
  trace.bootstrap_exclusion = scn.bootstrap_exclusion();

  const double dt = 1.0 / scn.fs;
  const PathPoint start = path.at(path.s_begin());
  PlantState state = PlantState::rolling(start.v, scn.vehicle.R, start.x, start.y, start.psi);
  PathProjector projector(path, scn.corridor);
  projector.reset(path.s_begin());
  detail::AnyController controller(scn);
  std::mt19937_64 rng(scn.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto noisy = [&](double value, double sd) { return sd > 0.0 ? value + sd * normal(rng) : value; };

  const double stop_s = path.s_end() - scn.end_margin;
  const double t_end = scn.duration.value_or(scn.max_time);
  try {
    for (std::size_t k = 0;; ++k) {
      const double t = static_cast<double>(k) * dt;
      if (t >= t_end - 1e-12) {
        if (!scn.duration) {
          trace.verdict = Verdict::Timeout;
          trace.message = "track end not reached within " + std::to_string(scn.max_time) + " s";
        }
        break;
      }
      const Projection proj = projector.project({state.X, state.Y, state.psi});
      if (proj.s_proj >= stop_s && !scn.duration) {
        break;
      }
      const ManeuverPoint ref = maneuver.at(proj.s_proj);

      TraceSample smp;
      smp.t = t;
      smp.state = state;
      smp.s_proj = proj.s_proj;
      smp.vx_ref = ref.v;
      smp.psi_ref = ref.psi;
      smp.y_path = path.at(proj.s_proj).y;
      smp.e_vx = state.Vx - ref.v;
      smp.e_psi = wrap_angle(state.psi - ref.psi);
      smp.e_y = proj.y_err;
      smp.z2 = flat_outputs(state, model).z2;
      smp.z2_ref = ref.z2;
      smp.e_z2 = smp.z2 - smp.z2_ref;

      PlantState measured = state;
      measured.Vx = noisy(state.Vx, scn.noise.vx);
      measured.Vy = noisy(state.Vy, scn.noise.vy);
      measured.psi = noisy(state.psi, scn.noise.psi);
      measured.psi_dot = noisy(state.psi_dot, scn.noise.psi_dot);
      smp.y_err = noisy(proj.y_err, scn.noise.y);

      controller.step(measured, smp.y_err, ref, smp);
      trace.samples.push_back(smp);
      state = step_truth_plant(state, {smp.torque, smp.steer}, scn.vehicle, scn.tire, dt);
    }
  } catch (const OffCorridorError & e) {
    trace.verdict = Verdict::OffCorridor;
    trace.message = e.what();
  } catch (const NonFiniteStateError & e) {
    trace.verdict = Verdict::NonFinite;
    trace.message = e.what();
  } catch (const SingularityError & e) {
    trace.verdict = Verdict::Singular;
    trace.message = e.what();
  }
  return trace;
}

/// Error channels of a trace: Vx, psi, y for every controller, plus z2.
inline ErrorReport error_report(const RunTrace & trace)
{
  ErrorReport rep;
  rep.excluded_before = trace.bootstrap_exclusion;
  std::vector<double> vx_s, vx_a, psi_s, psi_a, y_s, y_a, z2_s, z2_a;
  for (const TraceSample & s : trace.samples) {
    if (s.t < trace.bootstrap_exclusion) {
      continue;
    }
    vx_s.push_back(s.state.Vx);
    vx_a.push_back(s.vx_ref);
    psi_a.push_back(s.psi_ref);
    psi_s.push_back(s.psi_ref + s.e_psi);
    y_a.push_back(s.y_path);
    y_s.push_back(s.y_path + s.e_y);
    z2_a.push_back(s.z2_ref);
    z2_s.push_back(s.z2);
  }
  rep.samples = vx_s.size();
  if (rep.samples == 0) {
    return rep;
  }
  rep.channels["Vx"] = channel_error(vx_s, vx_a);
  rep.channels["psi"] = channel_error(psi_s, psi_a);
  rep.channels["y"] = channel_error(y_s, y_a);
  rep.channels["z2"] = channel_error(z2_s, z2_a);
  return rep;
}

struct ComparisonEntry
{
  double mu = 1.0;
  ControllerKind controller = ControllerKind::Mfc;
  Verdict verdict = Verdict::Completed;
  std::string message;
  ErrorReport report;
};

struct ComparisonTable
{
  std::vector<ComparisonEntry> entries;  // mu-major, controllers in request order

  const ComparisonEntry & find(double mu, ControllerKind c) const
  {
    for (const auto & e : entries) {
      if (e.mu == mu && e.controller == c) {
        return e;
      }
    }
    throw InvalidParameterError("no comparison entry for mu=" + std::to_string(mu) + " controller=" + to_string(c));
  }
};

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn && fn)
{
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        fn(i);
      }
    });
  }
  for (auto & th : pool) {
    th.join();
  }
}

/// Runs every (mu, controller) pair on the same track and seed. Results are
/// stored by grid position, so thread scheduling cannot reorder them.
inline ComparisonTable compare_controllers(
  const Scenario & base, const std::vector<double> & mus, const std::vector<ControllerKind> & controllers,
  unsigned jobs = 1, std::vector<RunTrace> * traces = nullptr)
{
  ComparisonTable table;
  table.entries.resize(mus.size() * controllers.size());
  std::vector<RunTrace> runs(table.entries.size());
  parallel_for(table.entries.size(), jobs, [&](std::size_t i) {
    Scenario scn = base;
    scn.vehicle.mu = mus[i / controllers.size()];
    scn.controller = controllers[i % controllers.size()];
    runs[i] = run_scenario(scn);
    ComparisonEntry & e = table.entries[i];
    e.mu = scn.vehicle.mu;
    e.controller = scn.controller;
    e.verdict = runs[i].verdict;
    e.message = runs[i].message;
    e.report = error_report(runs[i]);
  });
  if (traces) {
    *traces = std::move(runs);
  }
  return table;
}

/// Maximum normalized errors reported for the original full-vehicle study,
/// kept for context next to our own numbers.
struct StudyReference
{
  double mu;
  const char * controller;
  double vx, psi, y;
};

inline constexpr StudyReference kStudyReference[] = {
  {1.0, "pid", 0.93, 1.76, 2.8},    {1.0, "flat", 0.45, 1.21, 1.4},  {1.0, "mfc", 0.186, 0.45, 0.35},
  {0.7, "pid", 5.54, 13.54, 16.64}, {0.7, "flat", 4.23, 7.67, 9.37}, {0.7, "mfc", 2.31, 2.7, 3.49}};

inline std::string format_table(const ComparisonTable & table)
{
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "Maximum normalized errors (%)\n";
  os << std::left << std::setw(6) << "mu" << std::setw(8) << "ctrl" << std::right << std::setw(10) << "e_Vx"
     << std::setw(10) << "e_psi" << std::setw(10) << "e_y" << std::setw(10) << "e_z2" << "   verdict\n";
  for (const auto & e : table.entries) {
    os << std::left << std::setw(6) << std::setprecision(2) << e.mu << std::setw(8) << to_string(e.controller)
       << std::right << std::setprecision(3);
    if (e.verdict == Verdict::Completed && e.report.samples > 0) {
      os << std::setw(10) << e.report.at("Vx").normalized_pct << std::setw(10) << e.report.at("psi").normalized_pct
         << std::setw(10) << e.report.at("y").normalized_pct << std::setw(10) << e.report.at("z2").normalized_pct;
    } else {
      os << std::setw(10) << "FAIL" << std::setw(10) << "FAIL" << std::setw(10) << "FAIL" << std::setw(10) << "FAIL";
    }
    os << "   " << to_string(e.verdict) << '\n';
  }
  os << "\nReference values of the original full-vehicle study (context only)\n";
  for (const auto & r : kStudyReference) {
    os << std::left << std::setw(6) << std::setprecision(2) << r.mu << std::setw(8) << r.controller << std::right
       << std::setprecision(3) << std::setw(10) << r.vx << std::setw(10) << r.psi << std::setw(10) << r.y << '\n';
  }
  return os.str();
}

inline std::string table_to_csv(const ComparisonTable & table)
{
  std::ostringstream os;
  os << "mu,controller,verdict,e_Vx_pct,e_psi_pct,e_y_pct,e_z2_pct,linf_Vx,linf_psi,linf_y,rms_Vx,rms_psi,rms_y\n";
  for (const auto & e : table.entries) {
    os << exact(e.mu) << ',' << to_string(e.controller) << ',' << to_string(e.verdict);
    if (e.verdict == Verdict::Completed && e.report.samples > 0) {
      const auto & r = e.report;
      for (const char * c : {"Vx", "psi", "y", "z2"}) {
        os << ',' << exact(r.at(c).normalized_pct);
      }
      for (const char * c : {"Vx", "psi", "y"}) {
        os << ',' << exact(r.at(c).linf);
      }
      for (const char * c : {"Vx", "psi", "y"}) {
        os << ',' << exact(r.at(c).rms);
      }
    } else {
      os << ",,,,,,,,,,";
    }
    os << '\n';
  }
  return os.str();
}

/// Trace columns, in CSV order.
inline const std::vector<std::string> & trace_columns()
{
  static const std::vector<std::string> cols = {
    "t",      "Vx",      "Vy",    "psi",   "psi_dot", "X",     "Y",      "omega_f", "omega_r", "s_proj",
    "y_meas", "Vx_ref",  "psi_ref", "y_path", "z2",   "z2_ref", "e_Vx",  "e_psi",   "e_y",     "e_z2",
    "torque", "steer",   "F1",    "F2",    "torque_sat", "steer_sat", "ready"};
  return cols;
}

inline std::vector<double> trace_row(const TraceSample & s)
{
  return {s.t,
          s.state.Vx,
          s.state.Vy,
          s.state.psi,
          s.state.psi_dot,
          s.state.X,
          s.state.Y,
          s.state.omega_f,
          s.state.omega_r,
          s.s_proj,
          s.y_err,
          s.vx_ref,
          s.psi_ref,
          s.y_path,
          s.z2,
          s.z2_ref,
          s.e_vx,
          s.e_psi,
          s.e_y,
          s.e_z2,
          s.torque,
          s.steer,
          s.F1,
          s.F2,
          s.torque_saturated ? 1.0 : 0.0,
          s.steer_saturated ? 1.0 : 0.0,
          s.controller_ready ? 1.0 : 0.0};
}

/// Comma-separated trace with a header row; values printed round-trip exact.
inline std::string trace_to_csv(const RunTrace & trace)
{
  std::ostringstream os;
  const auto & cols = trace_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    os << (i ? "," : "") << cols[i];
  }
  os << '\n';
  for (const auto & s : trace.samples) {
    const auto row = trace_row(s);
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << exact(row[i]);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace mfcv

#endif  // MFCV_SCENARIO_HPP_
