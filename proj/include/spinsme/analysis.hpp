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
#include <functional>
#include <string>
#include <vector>

#include "spinsme/feedback.hpp"
#include "spinsme/integrator.hpp"
#include "spinsme/spin_basis.hpp"
#include "spinsme/state.hpp"

namespace spinsme {

// ---------------------------------------------------------------------------
// Lyapunov functions. p = rho_nn, p^ = rho_hat_nn for the target n.

enum class LyapunovTag {
  SqrtJoint,      // sqrt(2 - p - p^)
  SqrtSum,        // sqrt(1 - p) + sqrt(1 - p^)
  MixedAsym,      // 1 - p + sqrt(1 - p^)
  OffdiagSum,     // sum_{k != n} sqrt(rho_kk) + sum_{k != n} sqrt(rho_hat_kk)
  MixedInterior,  // 1 - p + sum_{k != n} sqrt(rho_hat_kk)
};

std::string to_string(LyapunovTag tag);
LyapunovTag parse_lyapunov_tag(const std::string& name);

struct LyapunovId {
  LyapunovTag tag = LyapunovTag::SqrtJoint;
  int target = 0;

  /// Throws DomainError when the tag needs a boundary target and `target`
  /// is interior, or when the target is out of range.
  void validate(const SpinBasis& basis) const;
};

double lyapunov_value(const SpinBasis& basis, const LyapunovId& id, const CoupledState& state);

struct SandwichCheck {
  double lower = 0.0;  // lower_factor * d
  double value = 0.0;
  double upper = 0.0;  // upper_factor * d
  double distance = 0.0;
  /// False for tags without a two-sided comparison to the coupled distance.
  bool applicable = false;
  bool holds = true;
};

/// Compares V with the coupled Bures distance to (rho_n, rho_n):
/// SqrtJoint in [d/2, d], SqrtSum in [d/sqrt2, d], OffdiagSum in
/// [d/sqrt2, sqrt(2J) d]. `slack` absorbs rounding.
SandwichCheck lyapunov_bounds_check(const SpinBasis& basis, const LyapunovId& id,
                                    const CoupledState& state, double slack = 1e-12);

// ---------------------------------------------------------------------------
// Generators

enum class Component { True, Filter };

struct DriftDiffusion {
  double drift = 0.0;
  double diffusion = 0.0;
};

/// Ito drift and diffusion of the population rho_kk (Component::True) or
/// rho_hat_kk (Component::Filter) of the coupled system at control u.
DriftDiffusion generator_population(const SpinBasis& basis, const SystemParams& params,
                                    const CoupledState& state, int k, Component which,
                                    double u);

/// L V from the population drifts and diffusions (both components share one
/// Wiener process, so mixed second derivatives contribute). u = u(rho_hat).
DriftDiffusion lyapunov_generator(const SpinBasis& basis, const LyapunovId& id,
                                  const CoupledState& state, const ControllerSpec& spec,
                                  const SystemParams& params);

using ScalarFunction = std::function<double(const CoupledState&)>;

struct OracleEstimate {
  /// (E phi(X_dt) - phi(X_0)) / dt
  double drift = 0.0;
  double drift_se = 0.0;
  /// E[(phi(X_dt) - phi(X_0)) dW] / dt, the signed diffusion coefficient.
  double diffusion = 0.0;
  double diffusion_se = 0.0;
};

/// Monte Carlo generator estimate from single Euler steps. Samples come in
/// antithetic pairs (+dW, -dW), so `n_samples` is rounded up to even. The
/// standard errors include a rounding term for the differences.
std::vector<OracleEstimate> generator_oracle(const SpinBasis& basis,
                                             const std::vector<ScalarFunction>& phis,
                                             const CoupledState& state,
                                             const ControllerSpec& spec,
                                             const SystemParams& params, double dt,
                                             long long n_samples, std::uint64_t seed);

OracleEstimate generator_oracle(const SpinBasis& basis, const ScalarFunction& phi,
                                const CoupledState& state, const ControllerSpec& spec,
                                const SystemParams& params, double dt, long long n_samples,
                                std::uint64_t seed);

// ---------------------------------------------------------------------------
// Exponent fits

enum class FitMode { PerSample, EnsembleMean };

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
  FitMode mode = FitMode::EnsembleMean;
  /// Non-empty when the window was shortened at the 1e-14 floor.
  std::string warning;
};

/// Least-squares slope of log(value) against t over the trailing
/// `window_fraction` of the time span. The window is cut before the first
/// value below 1e-14; throws DomainError if fewer than two points remain.
FitResult fit_exponent(const std::vector<double>& times, const std::vector<double>& values,
                       double window_fraction = 0.5, FitMode mode = FitMode::EnsembleMean);

// ---------------------------------------------------------------------------
// Exit and hitting probes

struct ProbeResult {
  /// Event time per trajectory; negative when the event did not occur.
  std::vector<double> event_times;
  double t_end = 0.0;
  double fraction = 0.0;
  /// Quantiles of the observed event times (0.1, 0.5, 0.9); NaN if none.
  double q10 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  InvariantMonitor monitor;

  std::size_t count() const { return event_times.size(); }
  /// Columns trajectory_index,time,event.
  std::string to_csv(const std::string& event_name) const;
};

struct ProbeOptions {
  IntegratorConfig config;
  int n_traj = 200;
  std::uint64_t master_seed = 0;
  int workers = 1;
};

/// Starts each trajectory at coupled distance `perturbation` from the
/// equilibrium (rho_center, rho_target), split randomly between the two
/// components, and records the first time the coupled distance exceeds
/// `radius`. Checks the instability condition for `spec.target` first and
/// throws ConditionFailed when it does not hold.
ProbeResult exit_time_probe(const SpinBasis& basis, int center, double radius,
                            double perturbation, const ControllerSpec& spec,
                            const SystemParams& params, const ProbeOptions& options);

/// Runs from `initial` until the coupled distance to (rho_n, rho_n) falls
/// below `epsilon`. Throws ConditionFailed when the reachability conditions
/// do not hold.
ProbeResult hitting_time_probe(const SpinBasis& basis, const CoupledState& initial,
                               double epsilon, const ControllerSpec& spec,
                               const SystemParams& params, const ProbeOptions& options);

/// Full-rank state at Bures distance `d` from rho_n (0 <= d < sqrt 2), built
/// by mixing rho_n with a random full-rank state.
Matrix state_at_distance(const SpinBasis& basis, int n, double d, std::uint64_t seed);

}  // namespace spinsme
