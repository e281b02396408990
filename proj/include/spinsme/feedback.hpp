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
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinsme/spin_basis.hpp"
#include "spinsme/state.hpp"

namespace spinsme {

enum class ControllerKind { Zero, BoundaryLaw, InteriorLaw, UserSupplied };

std::string to_string(ControllerKind kind);
ControllerKind parse_controller_kind(const std::string& name);

using ControlFunction = std::function<double(const SpinBasis&, const Matrix&)>;

/// Feedback law u(rho_hat) stabilizing the eigenstate `target`.
///
///  - BoundaryLaw:  u = alpha (1 - rho_hat_{nn})^beta
///  - InteriorLaw:  u = alpha (J - n - Tr(J_z rho_hat))^beta f(1 - rho_hat_{nn})
///    where f is the C^1 cutoff with seams at eps1 and eps2.
struct ControllerSpec {
  ControllerKind kind = ControllerKind::Zero;
  double alpha = 5.0;
  double beta = 2.0;
  int target = 0;
  double eps1 = 0.1;
  double eps2 = 0.3;
  /// Permits beta in (1/2, 1), where only the instability hypothesis is known
  /// to hold.
  bool allow_unvalidated_beta = false;
  ControlFunction user;

  /// Throws DomainError on out-of-range fields.
  void validate(const SpinBasis& basis) const;

  static ControllerSpec zero(int target);
  static ControllerSpec boundary(int target, double alpha, double beta);
  static ControllerSpec interior(int target, double alpha, double beta,
                                 double eps1 = 0.1, double eps2 = 0.3);
  static ControllerSpec user_supplied(int target, ControlFunction fn);
};

/// C^1 cutoff f: [0,1] -> [0,1]; 0 below eps1, 1 above eps2, half-sine ramp
/// in between. Throws DomainError for x outside [0,1].
double smooth_cutoff(double x, double eps1, double eps2);

double evaluate_control(const ControllerSpec& spec, const SpinBasis& basis,
                        const Matrix& rho_hat);

// ---------------------------------------------------------------------------
// Condition reports

enum class Verdict { Pass, Fail, NotFalsified, Falsified };

std::string to_string(Verdict v);

/// One checked statement. For inequality chains, `chain[0] relation chain[1]
/// relation chain[2] ...` is the statement and `margin` is the smallest gap
/// in the direction of the relation (positive iff the chain holds).
struct ConditionEntry {
  std::string name;
  std::string relation;
  std::vector<double> chain;
  double margin = 0.0;
  Verdict verdict = Verdict::Fail;
  std::string method;
  std::string detail;

  bool holds() const { return verdict == Verdict::Pass || verdict == Verdict::NotFalsified; }
};

struct ConditionReport {
  std::string title;
  std::vector<ConditionEntry> entries;
  std::map<std::string, double> constants;

  const ConditionEntry& at(const std::string& name) const;
  bool has(const std::string& name) const;
  bool holds(const std::string& name) const { return at(name).holds(); }
  bool all_hold() const;

  /// "key: value" lines, stable order.
  std::string to_text() const;
  nlohmann::ordered_json to_json() const;
};

/// H0 exactly at the eigen-projectors; H1/H2 analytically for the built-in
/// laws and by sampling (`sample_count` states, seeded) for user controllers.
/// Sampling never upgrades a verdict beyond NotFalsified.
ConditionReport check_hypotheses(const ControllerSpec& spec, const SpinBasis& basis,
                                 int sample_count = 10000, std::uint64_t seed = 1);

/// Every parameter-domain inequality of the instability, reachability and
/// stabilization results, with margins and per-theorem eligibility.
ConditionReport check_parameter_conditions(int n, const SystemParams& params,
                                           int target);

enum class TheoremId { Auto, BoundaryWindow, BoundaryExtended, Interior };

std::string to_string(TheoremId id);
TheoremId parse_theorem_id(const std::string& name);

struct ExponentBounds {
  TheoremId theorem = TheoremId::Auto;
  /// Sample Lyapunov exponent bound.
  double nu_s = 0.0;
  /// Heuristic decay rate of the mean Lyapunov function.
  double nu_av = 0.0;
  /// Boundary-window theorem only: the exponent as printed in the theorem
  /// statement, which differs from the value its proof establishes.
  double nu_s_statement = 0.0;
  std::map<std::string, double> constants;
};

/// Throws ConditionFailed (message carries the margins) when the named
/// theorem's conditions do not hold.
ExponentBounds exponent_bounds(int n, const SystemParams& params, int target,
                               TheoremId theorem = TheoremId::Auto);

/// Samples the slice P_target(rho_hat) = 0 on the interior of the state space
/// and checks 2 eta^ M^ Var_z(rho_hat) rho_hat_{nn} > u(rho_hat) Theta_n(rho_hat).
/// Requires 1 <= target <= 2J - 1.
ConditionReport check_condition_u(const ControllerSpec& spec, const SpinBasis& basis,
                                  const SystemParams& params, int target,
                                  int sample_count = 10000, std::uint64_t seed = 1);

/// Slice sampler used by check_condition_u; exposed for tests.
Matrix sample_on_slice(const SpinBasis& basis, int target, std::uint64_t seed);

}  // namespace spinsme
