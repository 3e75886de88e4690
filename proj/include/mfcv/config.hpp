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

// JSON experiment configuration.
//
// Every key carries its unit in the name (tau_s, fs_hz, ...). A user document
// is merged over the complete default document, so unknown keys and type
// mismatches are reported with their dotted path, and the merged document is
// the fully resolved configuration echoed into every report.
//
// Experiment layout:
//
//   {
//     "output_dir": "results",
//     "jobs": 1,
//     "emit": {"trace": true, "report": true, "plotdata": false},
//     "sweep": {"mu": [1.0, 0.7], "controllers": ["mfc", "flat", "pid"]},
//     "scenarios": [ { "name": "dry", ...scenario keys... } ]
//   }
//
// An empty sweep list keeps the scenario's own value.

#ifndef MFCV_CONFIG_HPP_
#define MFCV_CONFIG_HPP_

#include "mfcv/error.hpp"
#include "mfcv/scenario.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace mfcv
{

using Json = nlohmann::ordered_json;

namespace detail
{

inline Json channel_json(const MfcChannelConfig & c)
{
  return {{"alpha", c.gains.alpha}, {"KP", c.gains.KP}, {"KI", c.gains.KI}, {"KD", c.gains.KD},
          {"tau_s", c.estimator.tau}};
}

inline Json pid_gains_json(const PidGains & g)
{
  return {{"Kp", g.Kp}, {"Kd", g.Kd}, {"Ki", g.Ki}, {"filter_tc_s", g.filter_tc}};
}

inline std::string tire_kind_name(TireKind k) { return k == TireKind::Linear ? "linear" : "saturating"; }

inline TireKind tire_kind_from_string(const std::string & name)
{
  if (name == "linear") {
    return TireKind::Linear;
  }
  if (name == "saturating") {
    return TireKind::Saturating;
  }
  throw ConfigError("tire.kind: unknown tire kind '" + name + "' (expected linear or saturating)");
}

inline std::string join_path(const std::string & prefix, const std::string & key)
{
  return prefix.empty() ? key : prefix + "." + key;
}

inline const char * type_label(const Json & j)
{
  if (j.is_null()) {
    return "null";
  }
  if (j.is_boolean()) {
    return "boolean";
  }
  if (j.is_number()) {
    return "number";
  }
  if (j.is_string()) {
    return "string";
  }
  if (j.is_array()) {
    return "array";
  }
  return "object";
}

inline bool compatible(const Json & def, const Json & val)
{
  if (def.is_null()) {
    return val.is_null() || val.is_number();
  }
  if (def.is_number()) {
    return val.is_number();
  }
  if (def.is_boolean()) {
    return val.is_boolean();
  }
  if (def.is_string()) {
    return val.is_string();
  }
  if (def.is_array()) {
    return val.is_array();
  }
  return val.is_object();
}

/// Merges `user` into `base`, which must already hold every accepted key.
inline void merge_checked(Json & base, const Json & user, const std::string & path)
{
  if (!user.is_object()) {
    throw ConfigError((path.empty() ? std::string("configuration") : path) + ": expected an object");
  }
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = join_path(path, it.key());
    if (!base.contains(it.key())) {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
    Json & slot = base[it.key()];
    if (!compatible(slot, it.value())) {
      throw ConfigError(
        "configuration key '" + key + "' expects " + type_label(slot) + ", got " + type_label(it.value()));
    }
    if (slot.is_object()) {
      merge_checked(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

template <class T>
T get_as(const Json & j, const char * key, const std::string & path)
{
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception &) {
    throw ConfigError("configuration key '" + join_path(path, key) + "' has an invalid value");
  }
}

}  // namespace detail

/// Complete scenario document with every key and its current value.
inline Json scenario_to_json(const Scenario & s)
{
  const auto & v = s.vehicle;
  const auto & tp = s.track_params;
  const auto & sp = s.speed;
  const auto & n = s.noise;
  Json j;
  j["name"] = s.name;
  j["track"] = to_string(s.track);
  j["controller"] = to_string(s.controller);
  j["fs_hz"] = s.fs;
  j["duration_s"] = s.duration ? Json(*s.duration) : Json(nullptr);
  j["seed"] = s.seed;
  j["corridor_m"] = s.corridor;
  j["end_margin_m"] = s.end_margin;
  j["max_time_s"] = s.max_time;
  j["bootstrap_margin_s"] = s.bootstrap_margin;
  j["vehicle"] = {{"m_kg", v.m},
                  {"Iz_kgm2", v.Iz},
                  {"Lf_m", v.Lf},
                  {"Lr_m", v.Lr},
                  {"Cf_N_per_rad", v.Cf},
                  {"Cr_N_per_rad", v.Cr},
                  {"R_m", v.R},
                  {"Ir_kgm2", v.Ir},
                  {"mu", v.mu},
                  {"rho_x_Ns2_per_m2", v.rho_x},
                  {"g_mps2", v.g},
                  {"brake_front_share", v.brake_front_share}};
  j["tire"] = {{"kind", detail::tire_kind_name(s.tire.kind)},
               {"shape", s.tire.shape},
               {"curvature", s.tire.curvature},
               {"peak_scale", s.tire.peak_scale}};
  j["track_params"] = {{"spacing_m", tp.spacing},
                       {"lead_in_m", tp.lead_in},
                       {"run_out_m", tp.run_out},
                       {"transition_m", tp.transition},
                       {"radius_m", tp.radius},
                       {"laps", tp.laps},
                       {"lane_width_m", tp.lane_width},
                       {"lane_change_length_m", tp.lane_change_length},
                       {"lane_hold_m", tp.lane_hold},
                       {"origin_x_m", tp.origin.x},
                       {"origin_y_m", tp.origin.y},
                       {"origin_psi_rad", tp.origin.psi}};
  j["speed_profile"] = {{"v_max_mps", sp.v_max},
                        {"ay_max_mps2", sp.ay_max},
                        {"a_long_mps2", sp.a_long},
                        {"smoothing_length_m", sp.smoothing_length},
                        {"friction_adapted", sp.friction_adapted},
                        {"friction_reference", sp.friction_reference}};
  j["noise"] = {{"vx_mps", n.vx}, {"y_m", n.y}, {"psi_rad", n.psi}, {"vy_mps", n.vy}, {"psi_dot_radps", n.psi_dot}};
  j["mfc"] = {{"longitudinal", detail::channel_json(s.mfc.longitudinal)},
              {"lateral", detail::channel_json(s.mfc.lateral)},
              {"torque_unit_Nm", s.mfc.torque_unit},
              {"steer_ratio", s.mfc.steer_ratio},
              {"derivative_samples", s.mfc.derivative_samples}};
  j["flat"] = {{"K11", s.flat.K11},
               {"K12", s.flat.K12},
               {"K21", s.flat.K21},
               {"K22", s.flat.K22},
               {"K23", s.flat.K23},
               {"k_lat_per_s2", s.flat.k_lat},
               {"k_head_per_s", s.flat.k_head},
               {"max_condition", s.flat.max_condition},
               {"model_mu", s.flat_model_mu}};
  j["pid"] = {{"speed", detail::pid_gains_json(s.pid.speed)},
              {"lateral", detail::pid_gains_json(s.pid.lateral)},
              {"speed_error_unit_mps", s.pid.speed_error_unit},
              {"lateral_error_unit_m", s.pid.lateral_error_unit},
              {"torque_unit_Nm", s.pid.torque_unit},
              {"steer_ratio", s.pid.steer_ratio}};
  j["limits"] = {{"max_steer_rad", s.limits.max_steer}, {"max_torque_Nm", s.limits.max_torque}};
  return j;
}

/// Reads a complete scenario document (as produced by scenario_to_json).
inline Scenario scenario_from_json(const Json & j)
{
  using detail::get_as;
  Scenario s;
  s.name = get_as<std::string>(j, "name", "");
  try {
    s.track = track_kind_from_string(get_as<std::string>(j, "track", ""));
    s.controller = controller_kind_from_string(get_as<std::string>(j, "controller", ""));
  } catch (const InvalidParameterError & e) {
    throw ConfigError(e.what());
  }
  s.fs = get_as<double>(j, "fs_hz", "");
  if (!j.at("duration_s").is_null()) {
    s.duration = get_as<double>(j, "duration_s", "");
  }
  s.seed = get_as<std::uint64_t>(j, "seed", "");
  s.corridor = get_as<double>(j, "corridor_m", "");
  s.end_margin = get_as<double>(j, "end_margin_m", "");
  s.max_time = get_as<double>(j, "max_time_s", "");
  s.bootstrap_margin = get_as<double>(j, "bootstrap_margin_s", "");

  const Json & v = j.at("vehicle");
  s.vehicle.m = get_as<double>(v, "m_kg", "vehicle");
  s.vehicle.Iz = get_as<double>(v, "Iz_kgm2", "vehicle");
  s.vehicle.Lf = get_as<double>(v, "Lf_m", "vehicle");
  s.vehicle.Lr = get_as<double>(v, "Lr_m", "vehicle");
  s.vehicle.Cf = get_as<double>(v, "Cf_N_per_rad", "vehicle");
  s.vehicle.Cr = get_as<double>(v, "Cr_N_per_rad", "vehicle");
  s.vehicle.R = get_as<double>(v, "R_m", "vehicle");
  s.vehicle.Ir = get_as<double>(v, "Ir_kgm2", "vehicle");
  s.vehicle.mu = get_as<double>(v, "mu", "vehicle");
  s.vehicle.rho_x = get_as<double>(v, "rho_x_Ns2_per_m2", "vehicle");
  s.vehicle.g = get_as<double>(v, "g_mps2", "vehicle");
  s.vehicle.brake_front_share = get_as<double>(v, "brake_front_share", "vehicle");

  const Json & t = j.at("tire");
  s.tire.kind = detail::tire_kind_from_string(get_as<std::string>(t, "kind", "tire"));
  s.tire.shape = get_as<double>(t, "shape", "tire");
  s.tire.curvature = get_as<double>(t, "curvature", "tire");
  s.tire.peak_scale = get_as<double>(t, "peak_scale", "tire");

  const Json & tp = j.at("track_params");
  s.track_params.spacing = get_as<double>(tp, "spacing_m", "track_params");
  s.track_params.lead_in = get_as<double>(tp, "lead_in_m", "track_params");
  s.track_params.run_out = get_as<double>(tp, "run_out_m", "track_params");
  s.track_params.transition = get_as<double>(tp, "transition_m", "track_params");
  s.track_params.radius = get_as<double>(tp, "radius_m", "track_params");
  s.track_params.laps = get_as<double>(tp, "laps", "track_params");
  s.track_params.lane_width = get_as<double>(tp, "lane_width_m", "track_params");
  s.track_params.lane_change_length = get_as<double>(tp, "lane_change_length_m", "track_params");
  s.track_params.lane_hold = get_as<double>(tp, "lane_hold_m", "track_params");
  s.track_params.origin.x = get_as<double>(tp, "origin_x_m", "track_params");
  s.track_params.origin.y = get_as<double>(tp, "origin_y_m", "track_params");
  s.track_params.origin.psi = get_as<double>(tp, "origin_psi_rad", "track_params");

  const Json & sp = j.at("speed_profile");
  s.speed.v_max = get_as<double>(sp, "v_max_mps", "speed_profile");
  s.speed.ay_max = get_as<double>(sp, "ay_max_mps2", "speed_profile");
  s.speed.a_long = get_as<double>(sp, "a_long_mps2", "speed_profile");
  s.speed.smoothing_length = get_as<double>(sp, "smoothing_length_m", "speed_profile");
  s.speed.friction_adapted = get_as<bool>(sp, "friction_adapted", "speed_profile");
  s.speed.friction_reference = get_as<double>(sp, "friction_reference", "speed_profile");

  const Json & n = j.at("noise");
  s.noise.vx = get_as<double>(n, "vx_mps", "noise");
  s.noise.y = get_as<double>(n, "y_m", "noise");
  s.noise.psi = get_as<double>(n, "psi_rad", "noise");
  s.noise.vy = get_as<double>(n, "vy_mps", "noise");
  s.noise.psi_dot = get_as<double>(n, "psi_dot_radps", "noise");

  const Json & m = j.at("mfc");
  const auto channel = [&](MfcChannelConfig & c, const char * name) {
    const std::string path = std::string("mfc.") + name;
    const Json & cj = m.at(name);
    c.gains.alpha = get_as<double>(cj, "alpha", path);
    c.estimator.alpha = c.gains.alpha;
    c.gains.KP = get_as<double>(cj, "KP", path);
    c.gains.KI = get_as<double>(cj, "KI", path);
    c.gains.KD = get_as<double>(cj, "KD", path);
    c.estimator.tau = get_as<double>(cj, "tau_s", path);
  };
  channel(s.mfc.longitudinal, "longitudinal");
  channel(s.mfc.lateral, "lateral");
  s.mfc.torque_unit = get_as<double>(m, "torque_unit_Nm", "mfc");
  s.mfc.steer_ratio = get_as<double>(m, "steer_ratio", "mfc");
  s.mfc.derivative_samples = get_as<std::size_t>(m, "derivative_samples", "mfc");

  const Json & f = j.at("flat");
  s.flat.K11 = get_as<double>(f, "K11", "flat");
  s.flat.K12 = get_as<double>(f, "K12", "flat");
  s.flat.K21 = get_as<double>(f, "K21", "flat");
  s.flat.K22 = get_as<double>(f, "K22", "flat");
  s.flat.K23 = get_as<double>(f, "K23", "flat");
  s.flat.k_lat = get_as<double>(f, "k_lat_per_s2", "flat");
  s.flat.k_head = get_as<double>(f, "k_head_per_s", "flat");
  s.flat.max_condition = get_as<double>(f, "max_condition", "flat");
  s.flat_model_mu = get_as<double>(f, "model_mu", "flat");

  const Json & p = j.at("pid");
  const auto pid_gains = [&](PidGains & g, const char * name) {
    const std::string path = std::string("pid.") + name;
    const Json & gj = p.at(name);
    g.Kp = get_as<double>(gj, "Kp", path);
    g.Kd = get_as<double>(gj, "Kd", path);
    g.Ki = get_as<double>(gj, "Ki", path);
    g.filter_tc = get_as<double>(gj, "filter_tc_s", path);
  };
  pid_gains(s.pid.speed, "speed");
  pid_gains(s.pid.lateral, "lateral");
  s.pid.speed_error_unit = get_as<double>(p, "speed_error_unit_mps", "pid");
  s.pid.lateral_error_unit = get_as<double>(p, "lateral_error_unit_m", "pid");
  s.pid.torque_unit = get_as<double>(p, "torque_unit_Nm", "pid");
  s.pid.steer_ratio = get_as<double>(p, "steer_ratio", "pid");

  const Json & l = j.at("limits");
  s.limits.max_steer = get_as<double>(l, "max_steer_rad", "limits");
  s.limits.max_torque = get_as<double>(l, "max_torque_Nm", "limits");
  return s;
}

/// Short override names accepted next to full dotted paths.
inline const std::map<std::string, std::string> & override_aliases()
{
  static const std::map<std::string, std::string> aliases = {
    {"mu", "vehicle.mu"}, {"tire", "tire.kind"}};
  return aliases;
}

/// Applies `key=value` to a resolved scenario document. The value is read as
/// JSON when it parses and as a plain string otherwise.
inline void apply_override(Json & doc, const std::string & assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  if (const auto it = override_aliases().find(key); it != override_aliases().end()) {
    key = it->second;
  }
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) {
    value = text;
  }
  Json nested = value;
  std::string rest = key;
  std::vector<std::string> parts;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1)) {
    parts.push_back(rest.substr(0, pos));
  }
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (it->empty()) {
      throw ConfigError("override key '" + key + "' has an empty path component");
    }
    nested = Json{{*it, nested}};
  }
  detail::merge_checked(doc, nested, "");
}

/// Scenario from a partial document merged over the defaults, then overrides.
inline Scenario resolve_scenario(
  const Json & user, const std::vector<std::string> & overrides = {}, Json * resolved = nullptr,
  const Scenario & defaults = Scenario{})
{
  Json doc = scenario_to_json(defaults);
  detail::merge_checked(doc, user, "");
  for (const auto & o : overrides) {
    apply_override(doc, o);
  }
  Scenario s = scenario_from_json(doc);
  try {
    s.validate();
  } catch (const InvalidParameterError & e) {
    throw ConfigError(std::string("invalid scenario '") + s.name + "': " + e.what());
  }
  if (resolved) {
    *resolved = doc;
  }
  return s;
}

struct EmitFlags
{
  bool trace = true;
  bool report = true;
  bool plotdata = false;
};

/// One resolved run of an experiment.
struct ExperimentRun
{
  Scenario scenario;
  Json resolved;
};

struct ExperimentConfig
{
  std::string output_dir = "results";
  unsigned jobs = 1;
  EmitFlags emit{};
  std::vector<double> sweep_mu;
  std::vector<ControllerKind> sweep_controllers;
  std::vector<ExperimentRun> scenarios;  // before the sweep is applied
  Json resolved;                         // full config echo

  /// Scenario list after the sweep, named <scenario>_<controller>_mu<mu>
  /// whenever a sweep applies.
  std::vector<ExperimentRun> expanded() const
  {
    std::vector<ExperimentRun> runs;
    for (const auto & base : scenarios) {
      const std::vector<double> mus = sweep_mu.empty() ? std::vector<double>{base.scenario.vehicle.mu} : sweep_mu;
      const std::vector<ControllerKind> ctrls =
        sweep_controllers.empty() ? std::vector<ControllerKind>{base.scenario.controller} : sweep_controllers;
      const bool renamed = !sweep_mu.empty() || !sweep_controllers.empty();
      for (double mu : mus) {
        for (ControllerKind c : ctrls) {
          ExperimentRun r = base;
          r.scenario.vehicle.mu = mu;
          r.scenario.controller = c;
          if (renamed) {
            std::ostringstream name;
            name << base.scenario.name << '_' << to_string(c) << "_mu" << mu;
            r.scenario.name = name.str();
          }
          try {
            r.scenario.validate();
          } catch (const InvalidParameterError & e) {
            throw ConfigError("sweep produces an invalid scenario '" + r.scenario.name + "': " + e.what());
          }
          r.resolved = scenario_to_json(r.scenario);
          runs.push_back(std::move(r));
        }
      }
    }
    return runs;
  }
};

inline Json experiment_defaults()
{
  return {{"output_dir", "results"},
          {"jobs", 1},
          {"emit", {{"trace", true}, {"report", true}, {"plotdata", false}}},
          {"sweep", {{"mu", Json::array()}, {"controllers", Json::array()}}},
          {"scenarios", Json::array()}};
}

inline ExperimentConfig parse_experiment(const Json & user, const std::vector<std::string> & overrides = {})
{
  Json doc = experiment_defaults();
  detail::merge_checked(doc, user, "");
  ExperimentConfig cfg;
  cfg.output_dir = detail::get_as<std::string>(doc, "output_dir", "");
  const auto jobs = detail::get_as<long long>(doc, "jobs", "");
  if (jobs < 1) {
    throw ConfigError("configuration key 'jobs' must be at least 1");
  }
  cfg.jobs = static_cast<unsigned>(jobs);
  cfg.emit.trace = detail::get_as<bool>(doc["emit"], "trace", "emit");
  cfg.emit.report = detail::get_as<bool>(doc["emit"], "report", "emit");
  cfg.emit.plotdata = detail::get_as<bool>(doc["emit"], "plotdata", "emit");
  for (const auto & m : doc["sweep"]["mu"]) {
    if (!m.is_number()) {
      throw ConfigError("configuration key 'sweep.mu' must hold numbers");
    }
    cfg.sweep_mu.push_back(m.get<double>());
  }
  for (const auto & c : doc["sweep"]["controllers"]) {
    if (!c.is_string()) {
      throw ConfigError("configuration key 'sweep.controllers' must hold controller names");
    }
    try {
      cfg.sweep_controllers.push_back(controller_kind_from_string(c.get<std::string>()));
    } catch (const InvalidParameterError & e) {
      throw ConfigError(std::string("sweep.controllers: ") + e.what());
    }
  }
  if (doc["scenarios"].empty()) {
    throw ConfigError("configuration key 'scenarios' must list at least one scenario");
  }
  std::set<std::string> names;
  Json resolved_scenarios = Json::array();
  for (std::size_t i = 0; i < doc["scenarios"].size(); ++i) {
    ExperimentRun run;
    try {
      run.scenario = resolve_scenario(doc["scenarios"][i], overrides, &run.resolved);
    } catch (const ConfigError & e) {
      throw ConfigError("scenarios[" + std::to_string(i) + "]: " + e.what());
    }
    if (!names.insert(run.scenario.name).second) {
      throw ConfigError("duplicate scenario name '" + run.scenario.name + "'");
    }
    resolved_scenarios.push_back(run.resolved);
    cfg.scenarios.push_back(std::move(run));
  }
  doc["scenarios"] = resolved_scenarios;
  cfg.resolved = doc;
  return cfg;
}

inline Json read_json_file(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open configuration file '" + path.string() + "'");
  }
  Json j = Json::parse(in, nullptr, false, true);
  if (j.is_discarded()) {
    throw ConfigError("configuration file '" + path.string() + "' is not valid JSON");
  }
  return j;
}

/// Writes `content` to a temporary sibling and renames it into place.
inline void write_atomic(const std::filesystem::path & path, const std::string & content)
{
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot write '" + tmp.string() + "'");
    }
    out << content;
    out.flush();
    if (!out) {
      throw Error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

}  // namespace mfcv

#endif  // MFCV_CONFIG_HPP_
