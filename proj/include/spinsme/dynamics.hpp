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

#include "spinsme/spin_basis.hpp"
#include "spinsme/state.hpp"

// Vector fields of the coupled stochastic master equation
//
//   d rho     = L^u_{w,M}(rho) dt + G_{eta,M}(rho) dW
//   d rho_hat = L^u_{w^,M^}(rho_hat) dt + G_{eta^,M^}(rho_hat) (dW + 2 T dt)
//
// with T the innovation gap. All fields take raw matrices so they can be
// evaluated off the state space (finite differences, RK stages).

namespace spinsme {

/// -i[omega J_z + u J_y, rho] + M/2 (2 J_z rho J_z - J_z^2 rho - rho J_z^2)
Matrix drift_l(const SpinBasis& basis, const Matrix& rho, double u, double omega,
               double m);

/// sqrt(eta M) (J_z rho + rho J_z - 2 Tr(J_z rho) rho)
Matrix diffusion_g(const SpinBasis& basis, const Matrix& rho, double eta, double m);

/// Drift of the estimate coming from the innovation: 2 T(rho, rho_hat) G_hat(rho_hat).
Matrix filter_correction(const SpinBasis& basis, const Matrix& rho,
                         const Matrix& rho_hat, const SystemParams& params);

/// -i[omega J_z + u J_y, rho]
///   + M((1-eta) J_z rho J_z - (1+eta)/2 (J_z^2 rho + rho J_z^2)
///       + 2 eta Tr(J_z^2 rho) rho)
Matrix stratonovich_drift(const SpinBasis& basis, const Matrix& rho, double u,
                          double omega, double eta, double m);

/// dY = dW + 2 sqrt(eta M) Tr(J_z rho) dt
double observation_increment(const SpinBasis& basis, const Matrix& rho,
                             const SystemParams& params, double dw, double dt);

/// Right-hand side of the deterministic control system associated with the
/// Stratonovich form, with V = v + 2 sqrt(eta M) Tr(J_z rho).
struct DeterministicRhs {
  Matrix rho;
  Matrix rho_hat;
};

DeterministicRhs deterministic_rhs(const SpinBasis& basis, const Matrix& rho,
                                   const Matrix& rho_hat, double u, double v,
                                   const SystemParams& params);

}  // namespace spinsme
