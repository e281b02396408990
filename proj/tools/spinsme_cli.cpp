// Copyright 2026 The spinsme Authors
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

// Command-line front end. Exit codes: 0 success, 2 validation error or bad
// usage, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinsme/analysis.hpp"
#include "spinsme/config.hpp"
#include "spinsme/errors.hpp"
#include "spinsme/experiment.hpp"

namespace {

using namespace spinsme;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool strict = false;
  std::optional<int> workers;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config_path, "key = value config file");
  app->add_option("--preset", o.preset, "fig1 or fig2");
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--out", o.out, "output directory");
  app->add_flag("--strict", o.strict, "fail when a required condition does not hold");
  app->add_option("--workers", o.workers, "worker threads (0 = all cores)");
  app->add_option("--set", o.overrides, "override, e.g. --set integrator.dt=1e-4");
}

ExperimentConfig resolve(const CommonOptions& o) {
  if (!o.config_path.empty() && !o.preset.empty()) {
    throw DomainError("use either --config or --preset, not both");
  }
  ExperimentConfig cfg;
  if (!o.preset.empty()) cfg = ExperimentConfig::preset(o.preset);
  if (!o.config_path.empty()) cfg = ExperimentConfig::load(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw DomainError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.strict) cfg.strict = true;
  if (o.workers) cfg.workers = *o.workers;
  cfg.validate();
  return cfg;
}

void print_summary(const EnsembleSummary& s) {
  std::printf("trajectories: %zu (failures: %zu)\n", s.outcomes.size(), s.failures());
  if (!s.mean.times.empty()) {
    std::printf("final mean dB_coupled: %.6g (se %.3g)\n", s.mean.coupled.back(),
                s.mean.coupled_se.back());
    std::printf("final mean dB_true_filter: %.6g\n", s.mean.true_filter.back());
  }
  if (s.mean_fit) std::printf("mean fit slope: %.6g (r2 %.4f)\n", s.mean_fit->slope, s.mean_fit->r_squared);
  if (s.bounds) {
    std::printf("reference nu_av = %.4f, nu_s = %.4f\n", s.bounds->nu_av, s.bounds->nu_s);
  }
  for (const auto& w : s.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("output: %s\n", s.config.output_dir.c_str());
}

int cmd_run(const CommonOptions& o, bool single) {
  ExperimentConfig cfg = resolve(o);
  if (single) cfg.ensemble_size = 1;
  const EnsembleSummary s = run_experiment(cfg, true);
  print_summary(s);
  return s.failures() > 0 ? kExitNumerical : 0;
}

int cmd_check(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve(o);
  const CheckResult r = run_checks(cfg);
  std::cout << r.to_text();
  if (cfg.strict && !r.required_hold(cfg.theorem, cfg.n, cfg.controller.target)) {
    std::cout << "required conditions do not all hold\n";
    return kExitValidation;
  }
  return 0;
}

ProbeOptions probe_options(const ExperimentConfig& cfg, int n_traj) {
  ProbeOptions p;
  p.config = cfg.integrator;
  p.n_traj = n_traj;
  p.master_seed = cfg.seed;
  p.workers = cfg.workers;
  return p;
}

void write_probe(const ExperimentConfig& cfg, const ProbeResult& r, const std::string& file,
                 const std::string& event) {
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream out(std::filesystem::path(cfg.output_dir) / file, std::ios::binary);
  out << r.to_csv(event);
  std::printf("trajectories: %zu\nfraction: %.6g\nq10: %.6g\nq50: %.6g\nq90: %.6g\n",
              r.count(), r.fraction, r.q10, r.q50, r.q90);
  std::printf("output: %s\n", (std::filesystem::path(cfg.output_dir) / file).string().c_str());
}

int cmd_probe_exit(const CommonOptions& o, int center, double radius, double perturbation,
                   int n_traj) {
  const ExperimentConfig cfg = resolve(o);
  const SpinBasis basis = build_basis(cfg.n);
  if (center < 0) center = cfg.controller.target == 0 ? basis.max_index() : 0;
  const ProbeResult r = exit_time_probe(basis, center, radius, perturbation, cfg.controller,
                                        cfg.params, probe_options(cfg, n_traj));
  write_probe(cfg, r, "exit_times.csv", "exited");
  return 0;
}

int cmd_probe_hit(const CommonOptions& o, double epsilon, int n_traj) {
  const ExperimentConfig cfg = resolve(o);
  const SpinBasis basis = build_basis(cfg.n);
  const ProbeResult r = hitting_time_probe(basis, cfg.initial.build(basis), epsilon,
                                           cfg.controller, cfg.params,
                                           probe_options(cfg, n_traj));
  write_probe(cfg, r, "hit_times.csv", "hit");
  return 0;
}

int cmd_oracle(const CommonOptions& o, int states, long long samples, double dt) {
  const ExperimentConfig cfg = resolve(o);
  const SpinBasis basis = build_basis(cfg.n);
  const OracleSuiteResult r = run_oracle_suite(basis, cfg.controller, cfg.params, states,
                                               samples, dt, cfg.seed, cfg.workers);
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream out(std::filesystem::path(cfg.output_dir) / "oracle.csv", std::ios::binary);
  out << r.to_csv();
  std::printf("comparisons: %zu\npass_fraction: %.4f\n", r.comparisons.size(), r.pass_fraction);
  return 0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

int cmd_fit(const std::string& in, const std::string& column, double window) {
  std::ifstream file(in);
  if (!file) throw DomainError("cannot open '" + in + "'");
  std::string line;
  if (!std::getline(file, line)) throw DomainError("'" + in + "' is empty");
  const auto header = split_csv_line(line);
  std::size_t tcol = header.size(), vcol = header.size();
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == "t") tcol = k;
    if (header[k] == column) vcol = k;
  }
  if (tcol == header.size() || vcol == header.size()) {
    throw DomainError("'" + in + "' lacks column 't' or '" + column + "'");
  }
  std::vector<double> t, v;
  while (std::getline(file, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw ShapeError("ragged row in '" + in + "'");
    t.push_back(std::stod(cells[tcol]));
    v.push_back(std::stod(cells[vcol]));
  }
  const FitMode mode = column.rfind("mean_", 0) == 0 ? FitMode::EnsembleMean : FitMode::PerSample;
  const FitResult f = fit_exponent(t, v, window, mode);
  std::printf("column: %s\nslope: %.6g\nintercept: %.6g\nwindow: [%.6g, %.6g]\nr_squared: %.6f\npoints: %zu\n",
              column.c_str(), f.slope, f.intercept, f.t_start, f.t_end, f.r_squared, f.points);
  if (!f.warning.empty()) std::printf("warning: %s\n", f.warning.c_str());

  const auto summary = std::filesystem::path(in).parent_path() / "summary.json";
  if (std::filesystem::exists(summary)) {
    std::ifstream sin(summary);
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(sin);
    nlohmann::ordered_json entry;
    entry["source"] = std::filesystem::path(in).filename().string();
    entry["column"] = column;
    entry["window_fraction"] = window;
    entry["slope"] = f.slope;
    entry["intercept"] = f.intercept;
    entry["t_start"] = f.t_start;
    entry["t_end"] = f.t_end;
    entry["r_squared"] = f.r_squared;
    j["refits"].push_back(entry);
    std::ofstream sout(summary, std::ios::binary);
    sout << j.dump(2) << "\n";
    std::printf("appended to: %s\n", summary.string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled stochastic master equation simulator and stability checker"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  CommonOptions common;
  auto* simulate = app.add_subcommand("simulate", "run a single trajectory");
  auto* ensemble = app.add_subcommand("ensemble", "run a seeded ensemble");
  auto* check = app.add_subcommand("check", "parameter and controller conditions only");
  auto* probe_exit = app.add_subcommand("probe-exit", "exit times from a spurious equilibrium");
  auto* probe_hit = app.add_subcommand("probe-hit", "hitting times of a target neighbourhood");
  auto* oracle = app.add_subcommand("oracle", "generator cross-validation");
  auto* fit = app.add_subcommand("fit", "fit an exponent to a CSV column");
  for (auto* sub : {simulate, ensemble, check, probe_exit, probe_hit, oracle}) {
    add_common(sub, common);
  }

  int center = -1;
  double radius = 0.2, perturbation = 0.05, epsilon = 0.2;
  int n_traj = 200;
  probe_exit->add_option("--center", center, "eigenstate index of the spurious equilibrium");
  probe_exit->add_option("--radius", radius, "exit radius (coupled Bures distance)");
  probe_exit->add_option("--perturbation", perturbation, "initial distance from the center");
  probe_exit->add_option("--trajectories", n_traj, "number of trajectories");
  probe_hit->add_option("--epsilon", epsilon, "hitting radius (coupled Bures distance)");
  probe_hit->add_option("--trajectories", n_traj, "number of trajectories");

  int states = 50;
  long long samples = 100000;
  double oracle_dt = 1e-5;
  oracle->add_option("--states", states, "random interior states");
  oracle->add_option("--samples", samples, "Monte Carlo samples per state");
  oracle->add_option("--dt", oracle_dt, "step used by the oracle");

  std::string fit_in;
  std::string fit_column = "mean_dB_coupled";
  double fit_window = 0.5;
  fit->add_option("--in", fit_in, "CSV file")->required();
  fit->add_option("--column", fit_column, "column to fit");
  fit->add_option("--window", fit_window, "trailing window fraction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*simulate) return cmd_run(common, true);
    if (*ensemble) return cmd_run(common, false);
    if (*check) return cmd_check(common);
    if (*probe_exit) return cmd_probe_exit(common, center, radius, perturbation, n_traj);
    if (*probe_hit) return cmd_probe_hit(common, epsilon, n_traj);
    if (*oracle) return cmd_oracle(common, states, samples, oracle_dt);
    if (*fit) return cmd_fit(fit_in, fit_column, fit_window);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
