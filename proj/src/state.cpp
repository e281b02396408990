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

#include "spinsme/state.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "spinsme/errors.hpp"

namespace spinsme {

namespace {

// Eigenvalues in [-kNegativeFloor, 0) are treated as rounding and clamped to
// zero; anything below kNegativeFloor is rejected.
constexpr double kNegativeFloor = 1e-6;

void require_index(const SpinBasis& basis, int n) {
  if (!basis.valid_index(n)) {
    throw DomainError("level index " + std::to_string(n) + " outside 0.." +
                      std::to_string(basis.max_index()));
  }
}

void require_same_dim(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) {
    throw ShapeError("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                     std::to_string(b.dim()));
  }
}

double clamp_eigenvalue(double v) {
  if (v < -kNegativeFloor) {
    throw NumericalError("negative eigenvalue " + std::to_string(v) +
                         " in fidelity; input is not a valid state");
  }
  return std::max(v, 0.0);
}

Matrix psd_sqrt(const Matrix& a) {
  const Matrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed");
  }
  RealVector s = es.eigenvalues();
  for (Eigen::Index k = 0; k < s.size(); ++k) s(k) = std::sqrt(clamp_eigenvalue(s(k)));
  return es.eigenvectors() * s.cast<Complex>().asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace

ValidityReport validate(const Matrix& m, const Tolerances& tol) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << "density matrix must be square, got " << m.rows() << "x" << m.cols();
    throw ShapeError(os.str());
  }
  ValidityReport r;
  r.herm_defect = (m - m.adjoint()).norm();
  r.trace_defect = std::abs(m.trace() - Complex(1.0, 0.0));
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  r.hermitian = r.herm_defect <= tol.herm;
  r.unit_trace = r.trace_defect <= tol.trace;
  r.psd = r.min_eigenvalue >= -tol.psd;
  return r;
}

DensityMatrix DensityMatrix::checked(Matrix data, const Tolerances& tol) {
  const ValidityReport r = validate(data, tol);
  if (!r.ok()) {
    std::ostringstream os;
    os << "invalid density matrix: herm_defect=" << r.herm_defect
       << " trace_defect=" << r.trace_defect
       << " min_eigenvalue=" << r.min_eigenvalue;
    throw DomainError(os.str());
  }
  return DensityMatrix(std::move(data));
}

DensityMatrix DensityMatrix::diagonal(std::span<const double> populations) {
  const auto n = static_cast<Eigen::Index>(populations.size());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) m(k, k) = populations[k];
  return checked(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(int n) {
  if (n < 1) throw InvalidDimension("dimension must be positive");
  return DensityMatrix(Matrix::Identity(n, n) / static_cast<double>(n));
}

double DensityMatrix::purity() const {
  // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
  return data_.squaredNorm();
}

void SystemParams::validate() const {
  auto fail = [](const std::string& what) { throw DomainError(what); };
  if (!(eta > 0.0 && eta <= 1.0)) fail("eta must lie in (0,1]");
  if (!(eta_hat > 0.0 && eta_hat <= 1.0)) fail("eta_hat must lie in (0,1]");
  if (!(m > 0.0)) fail("M must be positive");
  if (!(m_hat > 0.0)) fail("M_hat must be positive");
  if (!(omega >= 0.0)) fail("omega must be non-negative");
  if (!(omega_hat >= 0.0)) fail("omega_hat must be non-negative");
}

double SystemParams::sqrt_eta_m() const { return std::sqrt(eta * m); }
double SystemParams::sqrt_eta_m_hat() const { return std::sqrt(eta_hat * m_hat); }

SystemParams SystemParams::reference() {
  return SystemParams{0.4, 0.4, 1.4, 0.5, 0.5, 1.5};
}

SystemParams SystemParams::matched(double omega, double eta, double m) {
  return SystemParams{omega, eta, m, omega, eta, m};
}

DensityMatrix projector(const SpinBasis& basis, int n) {
  require_index(basis, n);
  Matrix m = Matrix::Zero(basis.dim(), basis.dim());
  m(n, n) = 1.0;
  return DensityMatrix(std::move(m));
}

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  require_same_dim(a, b);
  // Tr sqrt(sqrt(a) b sqrt(a)) is the trace norm of sqrt(a) sqrt(b). Singular
  // values avoid taking square roots of rounding-level eigenvalues, which
  // would inflate the error from 1e-16 to 1e-8 for low-rank inputs.
  const Matrix prod = psd_sqrt(a.matrix()) * psd_sqrt(b.matrix());
  Eigen::JacobiSVD<Matrix> svd(prod);
  return std::clamp(svd.singularValues().sum(), 0.0, 1.0);
}

double bures_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * fidelity(a, b)));
}

double bures_to_eigenstate(const Matrix& rho, int n) {
  const double pop = std::clamp(rho(n, n).real(), 0.0, 1.0);
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::sqrt(pop)));
}

double coupled_distance(const CoupledState& x, const CoupledState& y) {
  require_same_dim(x.rho, y.rho);
  require_same_dim(x.rho_hat, y.rho_hat);
  require_same_dim(x.rho, x.rho_hat);
  return bures_distance(x.rho, y.rho) + bures_distance(x.rho_hat, y.rho_hat);
}

double coupled_distance_to_eigenpair(const CoupledState& x, int n, int m) {
  return bures_to_eigenstate(x.rho.matrix(), n) +
         bures_to_eigenstate(x.rho_hat.matrix(), m);
}

double expect_jz(const SpinBasis& basis, const Matrix& rho) {
  return basis.jz_diag().dot(rho.diagonal().real());
}

double expect_jz2(const SpinBasis& basis, const Matrix& rho) {
  return basis.jz_diag().array().square().matrix().dot(rho.diagonal().real());
}

double theta(const SpinBasis& basis, const Matrix& rho, int n) {
  require_index(basis, n);
  // (i [J_y, rho])_nn = i (J_y rho - rho J_y)_nn
  const Complex i(0.0, 1.0);
  const Complex jr = basis.jy().row(n) * rho.col(n);
  const Complex rj = rho.row(n) * basis.jy().col(n);
  return (i * (jr - rj)).real();
}

double p_offset(const SpinBasis& basis, const Matrix& rho, int n) {
  require_index(basis, n);
  return basis.j() - n - expect_jz(basis, rho);
}

double lambda_offset(const SpinBasis& basis, const Matrix& rho, int n) {
  require_index(basis, n);
  const double level = basis.j() - n;
  return expect_jz2(basis, rho) - level * level;
}

Functionals functionals(const SpinBasis& basis, const Matrix& rho, int n) {
  return Functionals{theta(basis, rho, n), p_offset(basis, rho, n),
                     lambda_offset(basis, rho, n)};
}

double variance_z(const SpinBasis& basis, const Matrix& rho) {
  const double mean = expect_jz(basis, rho);
  return expect_jz2(basis, rho) - mean * mean;
}

double innovation_gap(const SpinBasis& basis, const SystemParams& params,
                      const Matrix& rho, const Matrix& rho_hat) {
  return params.sqrt_eta_m() * expect_jz(basis, rho) -
         params.sqrt_eta_m_hat() * expect_jz(basis, rho_hat);
}

DensityMatrix random_density(int n, int rank, std::uint64_t seed) {
  if (n < 1) throw InvalidDimension("dimension must be positive");
  if (rank < 1 || rank > n) {
    throw DomainError("rank " + std::to_string(rank) + " outside 1.." +
                      std::to_string(n));
  }
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, rank);
  for (int c = 0; c < rank; ++c) {
    for (int r = 0; r < n; ++r) {
      const double re = normal(gen);
      const double im = normal(gen);
      g(r, c) = Complex(re, im);
    }
  }
  Matrix rho = g * g.adjoint();
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();
  return DensityMatrix(std::move(rho));
}

}  // namespace spinsme
