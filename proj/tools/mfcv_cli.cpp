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

// Experiment runner: single runs, controller comparisons, estimator
// self-test, plot data extraction and the scenario catalog.

#include "mfcv/catalog.hpp"
#include "mfcv/config.hpp"
#include "mfcv/estimator_check.hpp"
#include "mfcv/plotdata.hpp"
#include "mfcv/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mfcv;

namespace
{

struct RunOptions
{
  std::string config;
  std::string scenario;
  std::vector<std::string> overrides;
  std::string out;
  unsigned jobs = 0;
  std::vector<double> mu;
  std::vector<std::string> controllers;
};

ExperimentConfig load_experiment(const RunOptions & opt)
{
  if (!opt.config.empty()) {
    return parse_experiment(read_json_file(opt.config), opt.overrides);
  }
  const std::string name = opt.scenario.empty() ? "tracklike_mfc" : opt.scenario;
  ExperimentConfig cfg;
  ExperimentRun run;
  run.scenario = resolve_scenario(Json::object(), opt.overrides, &run.resolved, catalog_scenario(name));
  cfg.scenarios.push_back(run);
  cfg.resolved = experiment_defaults();
  cfg.resolved["scenarios"] = Json::array({run.resolved});
  return cfg;
}

Json metrics_json(const ErrorReport & rep)
{
  Json m = Json::object();
  for (const auto & [name, ch] : rep.channels) {
    m[name] = {{"normalized_pct", ch.normalized_pct}, {"linf", ch.linf}, {"rms", ch.rms}};
  }
  return m;
}

std::string summary_text(const std::vector<ExperimentRun> & runs, const std::vector<RunTrace> & traces)
{
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "Runs (maximum normalized errors, %)\n";
  os << std::left << std::setw(32) << "scenario" << std::setw(7) << "ctrl" << std::setw(6) << "mu" << std::right
     << std::setw(10) << "e_Vx" << std::setw(10) << "e_psi" << std::setw(10) << "e_y" << std::setw(10) << "e_z2"
     << "   verdict\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Scenario & s = runs[i].scenario;
    const ErrorReport rep = error_report(traces[i]);
    os << std::left << std::setw(32) << s.name << std::setw(7) << to_string(s.controller) << std::setw(6)
       << std::setprecision(2) << s.vehicle.mu << std::right << std::setprecision(3);
    if (rep.samples > 0) {
      os << std::setw(10) << rep.at("Vx").normalized_pct << std::setw(10) << rep.at("psi").normalized_pct
         << std::setw(10) << rep.at("y").normalized_pct << std::setw(10) << rep.at("z2").normalized_pct;
    } else {
      os << std::setw(40) << "no samples";
    }
    os << "   " << to_string(traces[i].verdict);
    if (!traces[i].completed()) {
      os << " (" << traces[i].message << ")";
    }
    os << '\n';
  }
  return os.str();
}

/// Controller-by-adhesion grid for runs that share one base scenario.
std::string grid_text(const std::vector<ExperimentRun> & runs, const std::vector<RunTrace> & traces)
{
  ComparisonTable table;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    ComparisonEntry e;
    e.mu = runs[i].scenario.vehicle.mu;
    e.controller = runs[i].scenario.controller;
    e.verdict = traces[i].verdict;
    e.message = traces[i].message;
    e.report = error_report(traces[i]);
    table.entries.push_back(e);
  }
  return format_table(table);
}

int execute(ExperimentConfig cfg, const RunOptions & opt, bool grid)
{
  if (!opt.mu.empty()) {
    cfg.sweep_mu = opt.mu;
  }
  if (!opt.controllers.empty()) {
    cfg.sweep_controllers.clear();
    for (const auto & c : opt.controllers) {
      try {
        cfg.sweep_controllers.push_back(controller_kind_from_string(c));
      } catch (const InvalidParameterError & e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (opt.jobs > 0) {
    cfg.jobs = opt.jobs;
  }
  const fs::path out = opt.out.empty() ? fs::path(cfg.output_dir) : fs::path(opt.out);
  cfg.resolved["output_dir"] = out.string();
  cfg.resolved["jobs"] = cfg.jobs;
  cfg.resolved["sweep"]["mu"] = cfg.sweep_mu;
  Json ctrl_names = Json::array();
  for (ControllerKind c : cfg.sweep_controllers) {
    ctrl_names.push_back(to_string(c));
  }
  cfg.resolved["sweep"]["controllers"] = ctrl_names;

  const std::vector<ExperimentRun> runs = cfg.expanded();
  std::vector<RunTrace> traces(runs.size());
  parallel_for(runs.size(), cfg.jobs, [&](std::size_t i) { traces[i] = run_scenario(runs[i].scenario); });

  fs::create_directories(out);
  Json report = {{"config", cfg.resolved}, {"runs", Json::array()}};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunTrace & tr = traces[i];
    const std::string name = runs[i].scenario.name;
    report["runs"].push_back({{"scenario", name},
                              {"controller", tr.controller},
                              {"mu", tr.mu},
                              {"verdict", to_string(tr.verdict)},
                              {"message", tr.message},
                              {"excluded_before_s", tr.bootstrap_exclusion},
                              {"metrics", metrics_json(error_report(tr))},
                              {"scenario_config", runs[i].resolved}});
    if (cfg.emit.trace) {
      write_atomic(out / (name + ".csv"), trace_to_csv(tr));
    }
    if (cfg.emit.plotdata) {
      const TraceTable table = parse_trace_csv(trace_to_csv(tr));
      for (const auto & ch : available_channels(table)) {
        write_atomic(out / "plot" / name / (ch + ".csv"), channel_csv(table, ch));
      }
    }
  }

  std::string text = summary_text(runs, traces);
  if (grid || !cfg.sweep_mu.empty() || !cfg.sweep_controllers.empty()) {
    text += "\n" + grid_text(runs, traces);
  }
  if (cfg.emit.report) {
    write_atomic(out / "report.txt", text + "\nResolved configuration\n" + cfg.resolved.dump(2) + "\n");
    write_atomic(out / "report.json", report.dump(2) + "\n");
  }
  std::cout << text;
  std::cout << "outputs written to " << out.string() << '\n';

  bool all_completed = true;
  for (const auto & tr : traces) {
    all_completed = all_completed && tr.completed();
  }
  return all_completed ? 0 : 1;
}

int cmd_validate_estimators(double tau, double fs_hz, double alpha1, double alpha2, double tolerance)
{
  const OracleReport rep = run_estimator_oracles(tau, fs_hz, alpha1, alpha2, tolerance);
  const OracleReport fine = run_estimator_oracles(tau, 2.0 * fs_hz, alpha1, alpha2, tolerance);
  std::cout << "Estimator oracle suite (tau = " << tau << " s, fs = " << fs_hz << " Hz, tolerance " << tolerance
            << ")\n";
  std::cout << std::scientific << std::setprecision(3);
  for (const auto & c : rep.cases) {
    std::cout << (c.pass ? "PASS" : "FAIL") << "  nu=" << c.nu << "  alpha=" << std::defaultfloat << c.alpha
              << "  F=" << std::setw(5) << c.F << std::scientific << "  F_est=" << std::setprecision(9)
              << c.estimate << std::setprecision(3) << "  error=" << c.error << '\n';
  }
  bool refined = true;
  for (int nu : {1, 2}) {
    const bool down = fine.max_error(nu) < rep.max_error(nu);
    refined = refined && down;
    std::cout << (down ? "PASS" : "FAIL") << "  nu=" << nu << " refinement: max error " << rep.max_error(nu)
              << " at fs, " << fine.max_error(nu) << " at 2 fs\n";
  }
  std::cout << std::defaultfloat;
  return rep.all_pass() && refined ? 0 : 1;
}

int cmd_plotdata(const std::string & trace_path, const std::vector<std::string> & channels, std::string out)
{
  std::ifstream in(trace_path, std::ios::binary);
  if (!in) {
    throw Error("cannot open trace file '" + trace_path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const TraceTable table = parse_trace_csv(buf.str());
  std::vector<std::string> requested;
  for (const auto & c : channels) {
    std::stringstream ss(c);
    for (std::string part; std::getline(ss, part, ',');) {
      if (!part.empty()) {
        requested.push_back(part);
      }
    }
  }
  const std::vector<std::string> selected = select_channels(table, requested);
  if (out.empty()) {
    out = (fs::path(trace_path).parent_path() / (fs::path(trace_path).stem().string() + "_plot")).string();
  }
  for (const auto & ch : selected) {
    write_atomic(fs::path(out) / (ch + ".csv"), channel_csv(table, ch));
  }
  std::cout << selected.size() << " channel file(s) written to " << out << '\n';
  return 0;
}

int cmd_list_scenarios()
{
  for (const auto & e : scenario_catalog()) {
    std::cout << std::left << std::setw(20) << e.name << e.description << '\n';
  }
  return 0;
}

void add_run_options(CLI::App * cmd, RunOptions & opt)
{
  auto * config = cmd->add_option("--config", opt.config, "experiment JSON file");
  auto * scenario = cmd->add_option("--scenario", opt.scenario, "built-in scenario name (see list-scenarios)");
  config->excludes(scenario);
  cmd->add_option("--override", opt.overrides, "key=value applied to every scenario (repeatable)")
    ->allow_extra_args(false);
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--jobs", opt.jobs, "parallel runs")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Model-free vehicle control lab"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto * run = app.add_subcommand("run", "run scenarios from a config file or the catalog");
  add_run_options(run, run_opt);

  RunOptions cmp_opt;
  auto * compare = app.add_subcommand("compare", "compare controllers across road adhesion values");
  add_run_options(compare, cmp_opt);
  compare->add_option("--mu", cmp_opt.mu, "adhesion values (default 1 0.7)");
  compare->add_option("--controllers", cmp_opt.controllers, "controllers (default mfc flat pid)");

  double tau = 0.25;
  double fs_hz = 200.0;
  double alpha1 = 1.5;
  double alpha2 = 1.95;
  double tolerance = 1e-3;
  auto * validate = app.add_subcommand("validate-estimators", "check the estimators against closed-form signals");
  validate->add_option("--tau-s", tau, "estimation window (s)");
  validate->add_option("--fs-hz", fs_hz, "sample rate (Hz)");
  validate->add_option("--alpha1", alpha1, "input gain of the first-order model");
  validate->add_option("--alpha2", alpha2, "input gain of the second-order model");
  validate->add_option("--tolerance", tolerance, "relative error bound");

  std::string trace_path;
  std::vector<std::string> channels;
  std::string plot_out;
  auto * plot = app.add_subcommand("plotdata", "split a trace into per-channel plot files");
  plot->add_option("--trace", trace_path, "trace CSV written by run")->required();
  plot->add_option("--channels", channels, "channel names, comma separated; empty selects all");
  plot->add_option("--out", plot_out, "output directory");

  auto * list = app.add_subcommand("list-scenarios", "list built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return execute(load_experiment(run_opt), run_opt, false);
    }
    if (compare->parsed()) {
      if (cmp_opt.mu.empty()) {
        cmp_opt.mu = {1.0, 0.7};
      }
      if (cmp_opt.controllers.empty()) {
        cmp_opt.controllers = {"mfc", "flat", "pid"};
      }
      return execute(load_experiment(cmp_opt), cmp_opt, true);
    }
    if (validate->parsed()) {
      return cmd_validate_estimators(tau, fs_hz, alpha1, alpha2, tolerance);
    }
    if (plot->parsed()) {
      return cmd_plotdata(trace_path, channels, plot_out);
    }
    if (list->parsed()) {
      return cmd_list_scenarios();
    }
  } catch (const ConfigError & e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
