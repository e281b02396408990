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

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace spinsme {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Angular momentum operators of a spin-J system, J = (N-1)/2, in the
/// eigenbasis e_0..e_{2J} of J_z (J_z e_n = (J-n) e_n).
///
/// Immutable after construction.
class SpinBasis {
 public:
  int dim() const { return dim_; }
  double j() const { return 0.5 * (dim_ - 1); }

  /// Largest valid level index, 2J = N-1.
  int max_index() const { return dim_ - 1; }

  const Matrix& jz() const { return jz_; }
  const Matrix& jy() const { return jy_; }
  const Matrix& jz_squared() const { return jz2_; }

  /// Diagonal of J_z: J, J-1, ..., -J.
  const RealVector& jz_diag() const { return jz_diag_; }

  /// c_m = (1/2) sqrt((2J+1-m) m) for m = 0..N, with c_0 = c_N = 0.
  double c(int m) const;

  /// c_1..c_{2J} as stored in the first off-diagonal of J_y.
  const std::vector<double>& coefficients() const { return c_; }

  /// J_x := i [J_y, J_z].
  Matrix jx() const;

  bool valid_index(int n) const { return n >= 0 && n < dim_; }

 private:
  friend SpinBasis build_basis(int n);

  int dim_ = 0;
  Matrix jz_;
  Matrix jy_;
  Matrix jz2_;
  RealVector jz_diag_;
  std::vector<double> c_;
};

/// Throws InvalidDimension for n < 2.
SpinBasis build_basis(int n);

}  // namespace spinsme
