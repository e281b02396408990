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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinsme/analysis.hpp"
#include "spinsme/config.hpp"
#include "spinsme/feedback.hpp"
#include "spinsme/integrator.hpp"

namespace spinsme {

std::string version_string();

struct TrajectoryOutcome {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double failed_at = 0.0;
  double final_true_target = 0.0;
  double final_filter_target = 0.0;
  double final_true_filter = 0.0;
  /// d_B(rho, rho_n) + d_B(rho_hat, rho_n) at the last recorded time.
  double final_coupled = 0.0;
  std::optional<FitResult> fit;
  std::string fit_error;
};

/// Ensemble means over the successful trajectories at the shared record times.
struct MeanSeries {
  std::vector<double> times;
  std::vector<double> true_target;
  std::vector<double> filter_target;
  std::vector<double> true_filter;
  std::vector<double> coupled;
  std::vector<double> coupled_se;

  std::string to_csv() const;
};

struct EnsembleSummary {
  ExperimentConfig config;
  ConditionReport parameter_conditions;
  ConditionReport hypotheses;
  std::optional<ConditionReport> condition_u;
  std::optional<ExponentBounds> bounds;
  std::string bounds_note;
  std::vector<std::string> warnings;

  std::vector<TrajectoryOutcome> outcomes;
  /// Indexed like `outcomes`; empty records for failed trajectories.
  std::vector<TrajectoryRecord> records;
  MeanSeries mean;
  std::optional<FitResult> mean_fit;
  std::string mean_fit_error;
  InvariantMonitor monitor;
  /// Written to timing.txt, never to the summary, to keep it byte-stable.
  double wall_seconds = 0.0;

  std::size_t failures() const;
  nlohmann::ordered_json to_json() const;
};

/// Coupled Bures distance d_B(rho, rho_n) + d_B(rho_hat, rho_n) per record.
std::vector<double> coupled_series(const TrajectoryRecord& rec);

/// Seed of trajectory `index` in an ensemble with master seed `seed`.
std::uint64_t trajectory_seed(std::uint64_t master, std::size_t index);

/// Runs condition checks, the ensemble and the fits. With `write_files`,
/// writes traj_NNNN.csv, mean.csv, summary.json, failures.csv and timing.txt
/// into config.output_dir. In strict mode a failing condition throws
/// ConditionFailed before any trajectory runs. Trajectory blowups are
/// collected in the summary instead of thrown, unless every trajectory fails.
EnsembleSummary run_experiment(const ExperimentConfig& config, bool write_files = true);

/// Checks only; no files, no trajectories.
struct CheckResult {
  ConditionReport parameter_conditions;
  ConditionReport hypotheses;
  std::optional<ConditionReport> condition_u;
  std::optional<ExponentBounds> bounds;
  std::string bounds_note;

  bool required_hold(TheoremId theorem, int n, int target) const;
  std::string to_text() const;
};

CheckResult run_checks(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Generator cross-validation

struct OracleComparison {
  int state = 0;
  std::string quantity;
  double closed_form = 0.0;
  double oracle = 0.0;
  double se = 0.0;
  bool pass = false;
};

struct OracleSuiteResult {
  std::vector<OracleComparison> comparisons;
  double pass_fraction = 0.0;

  std::string to_csv() const;
};

/// For `states` random full-rank states with every population and every
/// target complement >= 1e-3, compares the closed-form population
/// drifts/diffusions and the generator of every Lyapunov tag compatible with
/// spec.target against generator_oracle; a comparison passes within 3 SE.
OracleSuiteResult run_oracle_suite(const SpinBasis& basis, const ControllerSpec& spec,
                                   const SystemParams& params, int states,
                                   long long samples, double dt, std::uint64_t seed,
                                   int workers = 1);

}  // namespace spinsme
