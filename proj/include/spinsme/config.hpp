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
#include <string>
#include <utility>
#include <vector>

#include "spinsme/feedback.hpp"
#include "spinsme/integrator.hpp"
#include "spinsme/spin_basis.hpp"
#include "spinsme/state.hpp"

namespace spinsme {

enum class InitialKind { EigenPair, Diagonal, MaximallyMixedPair, Random };

std::string to_string(InitialKind kind);
InitialKind parse_initial_kind(const std::string& name);

struct InitialSpec {
  InitialKind kind = InitialKind::EigenPair;
  int n = 0;  // eigen-pair: rho = rho_n
  int m = 0;  //             rho_hat = rho_m
  std::vector<double> diag;
  std::vector<double> diag_hat;
  int rank = 1;
  std::uint64_t seed = 0;

  /// Throws DomainError / ShapeError for out-of-range or inconsistent fields.
  CoupledState build(const SpinBasis& basis) const;
};

/// Experiment description. Text form is one `key = value` per line with
/// dotted sections; `#` starts a comment.
///
///   n, seed, strict
///   params.{omega,eta,m,omega_hat,eta_hat,m_hat}
///   controller.{variant,alpha,beta,target,eps1,eps2,allow_unvalidated_beta}
///   initial.{kind,n,m,rho,rho_hat,rank,seed}
///   integrator.{dt,t_end,record_stride,renormalize,psd_projection,driving_mode,scheme}
///   ensemble.{size,workers}
///   analysis.{fit_window,theorem}
///   output.{dir,trajectories}
struct ExperimentConfig {
  int n = 3;
  SystemParams params = SystemParams::reference();
  ControllerSpec controller = ControllerSpec::boundary(0, 5.0, 2.0);
  InitialSpec initial;
  IntegratorConfig integrator;
  int ensemble_size = 10;
  /// Not part of the echo: outputs do not depend on it.
  int workers = 1;
  std::uint64_t seed = 0;
  double fit_window = 0.5;
  TheoremId theorem = TheoremId::Auto;
  std::string output_dir = "out";
  bool write_trajectories = true;
  bool strict = false;

  /// Throws a ValidationError subclass naming the offending key.
  void validate() const;

  /// Applies one key/value pair. Throws DomainError on unknown keys or
  /// malformed values.
  void set(const std::string& key, const std::string& value);

  /// Canonical key/value pairs in a fixed order (the config echo).
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string to_text() const;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  /// "fig1" (boundary target) or "fig2" (interior target).
  static ExperimentConfig preset(const std::string& name);
};

}  // namespace spinsme
