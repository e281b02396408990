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

#include "spinsme/dynamics.hpp"

#include <cmath>

#include "spinsme/errors.hpp"

namespace spinsme {

namespace {

// J_z is diagonal, so every J_z sandwich acts entrywise on rho(i,j) through
// the eigenvalues l_i, l_j.

void require_square(const SpinBasis& basis, const Matrix& rho) {
  if (rho.rows() != basis.dim() || rho.cols() != basis.dim()) {
    throw ShapeError("matrix shape does not match the spin basis dimension");
  }
}

// -i u [J_y, rho]
Matrix control_commutator(const SpinBasis& basis, const Matrix& rho, double u) {
  if (u == 0.0) return Matrix::Zero(rho.rows(), rho.cols());
  const Matrix& jy = basis.jy();
  return Complex(0.0, -u) * (jy * rho - rho * jy);
}

}  // namespace

Matrix drift_l(const SpinBasis& basis, const Matrix& rho, double u, double omega,
               double m) {
  require_square(basis, rho);
  const RealVector& l = basis.jz_diag();
  const Eigen::Index n = rho.rows();
  Matrix out = control_commutator(basis, rho, u);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      const double gap = l(r) - l(c);
      // -i omega (l_r - l_c) - M/2 (l_r - l_c)^2
      out(r, c) += Complex(-0.5 * m * gap * gap, -omega * gap) * rho(r, c);
    }
  }
  return out;
}

Matrix diffusion_g(const SpinBasis& basis, const Matrix& rho, double eta, double m) {
  require_square(basis, rho);
  const RealVector& l = basis.jz_diag();
  const Eigen::Index n = rho.rows();
  const double s = std::sqrt(eta * m);
  const double mean = 2.0 * basis.jz_diag().dot(rho.diagonal().real());
  Matrix out(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      out(r, c) = s * (l(r) + l(c) - mean) * rho(r, c);
    }
  }
  return out;
}

Matrix filter_correction(const SpinBasis& basis, const Matrix& rho,
                         const Matrix& rho_hat, const SystemParams& params) {
  const double gap = innovation_gap(basis, params, rho, rho_hat);
  return 2.0 * gap * diffusion_g(basis, rho_hat, params.eta_hat, params.m_hat);
}

Matrix stratonovich_drift(const SpinBasis& basis, const Matrix& rho, double u,
                          double omega, double eta, double m) {
  require_square(basis, rho);
  const RealVector& l = basis.jz_diag();
  const Eigen::Index n = rho.rows();
  const double second = 2.0 * eta * expect_jz2(basis, rho);
  Matrix out = control_commutator(basis, rho, u);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      const double diss = (1.0 - eta) * l(r) * l(c) -
                          0.5 * (1.0 + eta) * (l(r) * l(r) + l(c) * l(c)) + second;
      out(r, c) += Complex(m * diss, -omega * (l(r) - l(c))) * rho(r, c);
    }
  }
  return out;
}

double observation_increment(const SpinBasis& basis, const Matrix& rho,
                             const SystemParams& params, double dw, double dt) {
  return dw + 2.0 * params.sqrt_eta_m() * expect_jz(basis, rho) * dt;
}

DeterministicRhs deterministic_rhs(const SpinBasis& basis, const Matrix& rho,
                                   const Matrix& rho_hat, double u, double v,
                                   const SystemParams& params) {
  const double big_v = v + 2.0 * params.sqrt_eta_m() * expect_jz(basis, rho);
  DeterministicRhs out;
  out.rho = stratonovich_drift(basis, rho, u, params.omega, params.eta, params.m) +
            big_v * diffusion_g(basis, rho, params.eta, params.m);
  out.rho_hat = stratonovich_drift(basis, rho_hat, u, params.omega_hat,
                                   params.eta_hat, params.m_hat) +
                big_v * diffusion_g(basis, rho_hat, params.eta_hat, params.m_hat);
  return out;
}

}  // namespace spinsme
