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
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spinsme/feedback.hpp"
#include "spinsme/spin_basis.hpp"
#include "spinsme/state.hpp"

namespace spinsme {

enum class DrivingMode {
  /// Both equations driven by dW; the estimate gets the 2 T G_hat dt correction.
  SharedWiener,
  /// Both equations driven by their own innovation computed from dY.
  ObservationDriven,
};

std::string to_string(DrivingMode mode);
DrivingMode parse_driving_mode(const std::string& name);

enum class Scheme {
  /// Normalized Kraus-map step with the second-order Ito correction; keeps
  /// states positive semidefinite by construction. First order like
  /// Euler-Maruyama.
  Kraus,
  /// rho + L dt + G dW followed by renormalization.
  EulerMaruyama,
};

std::string to_string(Scheme scheme);
Scheme parse_scheme(const std::string& name);

struct IntegratorConfig {
  double dt = 1e-4;
  double t_end = 10.0;
  int record_stride = 100;
  bool renormalize = true;
  bool psd_projection = false;
  std::uint64_t seed = 0;
  DrivingMode driving_mode = DrivingMode::SharedWiener;
  Scheme scheme = Scheme::Kraus;

  /// Throws DomainError on dt <= 0, dt > t_end or record_stride < 1.
  void validate() const;
  /// round(t_end / dt).
  long long step_count() const;
};

/// Running validity statistics over every step of a trajectory.
struct InvariantMonitor {
  /// |Tr(rho) - 1| after the step (and renormalization when enabled).
  double max_trace_defect = 0.0;
  /// Frobenius norm of rho - rho^* after the step.
  double max_herm_defect = 0.0;
  /// Exact at record points; per step, values below -1e-6 are caught by a
  /// Cholesky probe and then resolved exactly.
  double min_eigenvalue = 1.0;
  long long psd_violations = 0;
  long long steps = 0;

  void merge(const InvariantMonitor& other);
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<RealVector> populations;
  std::vector<RealVector> populations_hat;
  std::vector<double> d_true_target;
  std::vector<double> d_filter_target;
  std::vector<double> d_true_filter;
  std::vector<double> control;
  std::vector<double> jz_mean;
  std::vector<double> observation;
  std::vector<double> purity;
  std::vector<double> purity_hat;

  std::uint64_t seed = 0;
  int target = 0;
  IntegratorConfig config;
  InvariantMonitor monitor;
  std::vector<std::string> flags;
  /// Set when a stop predicate ended the run early.
  std::optional<double> stopped_at;
  CoupledState final_state;

  std::size_t size() const { return times.size(); }

  /// Column names in CSV order for an N-level system.
  static std::vector<std::string> csv_header(int n);
  /// Full-precision CSV (17 significant digits), header included.
  std::string to_csv() const;
};

/// Hermitize, divide by the trace and optionally clip negative eigenvalues.
/// Throws IntegrationBlowup when the Hermiticity defect is >= 0.1 or the
/// trace is not positive.
Matrix renormalize(const Matrix& rho, bool psd_projection, double time = 0.0);

/// One step with u = u(rho_hat) frozen over the step. Scheme, mode,
/// renormalization and projection come from `config`.
CoupledState step_coupled(const SpinBasis& basis, const CoupledState& state,
                          const ControllerSpec& spec, const SystemParams& params,
                          double dt, double dw, const IntegratorConfig& config = {});

/// Returns true to end the trajectory after the current step.
using StopPredicate = std::function<bool(double t, const Matrix& rho, const Matrix& rho_hat)>;

/// Deterministic in (config.seed, config, initial, spec, params). Records
/// t = 0 and every record_stride steps; the final time is always recorded.
TrajectoryRecord run_trajectory(const SpinBasis& basis, const CoupledState& initial,
                                const ControllerSpec& spec, const SystemParams& params,
                                const IntegratorConfig& config,
                                const StopPredicate& stop = {});

/// Piecewise-constant v(t); evaluated at the start of each step.
using ControlSignal = std::function<double(double t)>;

/// RK4 on the deterministic coupled system with V = v + 2 sqrt(eta M) Tr(J_z rho)
/// and u = u(rho_hat) at every stage. No renormalization. The observation
/// column holds the running integral of v.
TrajectoryRecord run_deterministic(const SpinBasis& basis, const CoupledState& initial,
                                   const ControllerSpec& spec, const SystemParams& params,
                                   const ControlSignal& v, double dt, double t_end,
                                   int record_stride = 1);

/// Classical RK4 step for x' = f(x).
template <typename State, typename Field>
State rk4_step(const Field& f, const State& x, double dt) {
  const State k1 = f(x);
  const State k2 = f(State(x + (0.5 * dt) * k1));
  const State k3 = f(State(x + (0.5 * dt) * k2));
  const State k4 = f(State(x + dt * k3));
  return State(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Seed for stream `index` of an ensemble with master seed `master`
/// (SplitMix64 mixing; independent of scheduling).
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index);

/// Normal increments N(0, dt) for one trajectory.
class WienerStream {
 public:
  WienerStream(std::uint64_t seed, double dt) : gen_(seed), normal_(0.0, std::sqrt(dt)) {}
  double next() { return normal_(gen_); }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_;
};

/// Calls fn(i) for i in [0, count) on `workers` threads (0 = hardware
/// concurrency). Rethrows the exception of the lowest failing index.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace spinsme
