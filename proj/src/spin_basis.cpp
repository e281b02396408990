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

#include "spinsme/spin_basis.hpp"

#include <cmath>
#include <string>

#include "spinsme/errors.hpp"

namespace spinsme {

namespace {

double c_formula(int n_levels, int m) {
  // 2J + 1 = N
  return 0.5 * std::sqrt(static_cast<double>((n_levels - m) * m));
}

}  // namespace

double SpinBasis::c(int m) const {
  if (m <= 0 || m >= dim_) return 0.0;
  return c_[m - 1];
}

Matrix SpinBasis::jx() const {
  const Complex i(0.0, 1.0);
  return i * (jy_ * jz_ - jz_ * jy_);
}

SpinBasis build_basis(int n) {
  if (n < 2) {
    throw InvalidDimension("spin basis needs N >= 2, got N=" + std::to_string(n));
  }
  SpinBasis b;
  b.dim_ = n;
  const double j = 0.5 * (n - 1);

  b.jz_diag_.resize(n);
  for (int k = 0; k < n; ++k) b.jz_diag_(k) = j - k;
  b.jz_ = b.jz_diag_.cast<Complex>().asDiagonal();
  b.jz2_ = b.jz_diag_.array().square().matrix().cast<Complex>().asDiagonal();

  b.c_.resize(n - 1);
  for (int m = 1; m < n; ++m) b.c_[m - 1] = c_formula(n, m);

  // J_y e_n = -i c_n e_{n-1} + i c_{n+1} e_{n+1}
  b.jy_ = Matrix::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) {
    b.jy_(k, k + 1) = Complex(0.0, -b.c_[k]);
    b.jy_(k + 1, k) = Complex(0.0, b.c_[k]);
  }
  return b;
}

}  // namespace spinsme
