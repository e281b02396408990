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
#include <span>
#include <utility>

#include "spinsme/spin_basis.hpp"

namespace spinsme {

struct Tolerances {
  double herm = 1e-9;
  double trace = 1e-9;
  double psd = 1e-9;
};

struct ValidityReport {
  double herm_defect = 0.0;   // Frobenius norm of rho - rho^*
  double trace_defect = 0.0;  // |Tr(rho) - 1|
  double min_eigenvalue = 0.0;
  bool hermitian = false;
  bool unit_trace = false;
  bool psd = false;

  bool ok() const { return hermitian && unit_trace && psd; }
};

/// Throws ShapeError for a non-square matrix.
ValidityReport validate(const Matrix& m, const Tolerances& tol = {});

/// N x N density matrix. The plain constructor does not check validity; use
/// DensityMatrix::checked at trust boundaries.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(Matrix data) : data_(std::move(data)) {}

  /// Throws ShapeError / DomainError when `data` is not a valid state.
  static DensityMatrix checked(Matrix data, const Tolerances& tol = {});
  static DensityMatrix diagonal(std::span<const double> populations);
  static DensityMatrix maximally_mixed(int n);

  const Matrix& matrix() const { return data_; }
  Matrix& matrix() { return data_; }
  int dim() const { return static_cast<int>(data_.rows()); }

  double population(int n) const { return data_(n, n).real(); }
  RealVector populations() const { return data_.diagonal().real(); }
  double purity() const;

 private:
  Matrix data_;
};

/// Joint state of the true system and its estimate.
struct CoupledState {
  DensityMatrix rho;
  DensityMatrix rho_hat;

  int dim() const { return rho.dim(); }
};

/// True (omega, eta, m) and estimated (omega_hat, eta_hat, m_hat) physical
/// parameters. eta in (0,1], m > 0, omega >= 0.
struct SystemParams {
  double omega = 0.0;
  double eta = 1.0;
  double m = 1.0;
  double omega_hat = 0.0;
  double eta_hat = 1.0;
  double m_hat = 1.0;

  /// Throws DomainError when a field is out of range.
  void validate() const;

  double sqrt_eta_m() const;
  double sqrt_eta_m_hat() const;

  /// Three-level simulation parameters: omega=0.4, eta=0.4, M=1.4 and
  /// estimates 0.5, 0.5, 1.5.
  static SystemParams reference();
  /// Estimated parameters equal to the true ones.
  static SystemParams matched(double omega, double eta, double m);
};

/// Pure state e_n e_n^*. Throws DomainError if n is out of range.
DensityMatrix projector(const SpinBasis& basis, int n);

/// Tr( sqrt( sqrt(a) b sqrt(a) ) ), clamped to [0,1].
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

/// sqrt(2 - 2 F(a,b)); reduces to sqrt(2 - 2 sqrt(rho_nn)) for a pure
/// eigenstate target.
double bures_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Closed-form Bures distance to the eigen-projector rho_n.
double bures_to_eigenstate(const Matrix& rho, int n);

/// d_B(x.rho, y.rho) + d_B(x.rho_hat, y.rho_hat).
double coupled_distance(const CoupledState& x, const CoupledState& y);

/// Coupled distance to (rho_n, rho_m) via the closed form.
double coupled_distance_to_eigenpair(const CoupledState& x, int n, int m);

struct Functionals {
  double theta = 0.0;   // Tr(i[J_y, rho] rho_n)
  double p = 0.0;       // J - n - Tr(J_z rho)
  double lambda = 0.0;  // Tr(J_z^2 rho) - (J - n)^2
};

Functionals functionals(const SpinBasis& basis, const Matrix& rho, int n);

double theta(const SpinBasis& basis, const Matrix& rho, int n);
double p_offset(const SpinBasis& basis, const Matrix& rho, int n);
double lambda_offset(const SpinBasis& basis, const Matrix& rho, int n);
double expect_jz(const SpinBasis& basis, const Matrix& rho);
double expect_jz2(const SpinBasis& basis, const Matrix& rho);

/// Tr(J_z^2 rho) - Tr(J_z rho)^2.
double variance_z(const SpinBasis& basis, const Matrix& rho);

/// sqrt(eta M) Tr(J_z rho) - sqrt(eta_hat M_hat) Tr(J_z rho_hat).
double innovation_gap(const SpinBasis& basis, const SystemParams& params,
                      const Matrix& rho, const Matrix& rho_hat);

/// G G^* / Tr(G G^*) with G an N x rank complex Gaussian matrix; deterministic
/// in `seed`. Throws DomainError when rank is not in 1..N.
DensityMatrix random_density(int n, int rank, std::uint64_t seed);

}  // namespace spinsme
