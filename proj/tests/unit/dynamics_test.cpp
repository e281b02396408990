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

#include <cmath>

#include <gtest/gtest.h>

#include "spinsme/dynamics.hpp"
#include "spinsme/errors.hpp"
#include "spinsme/spin_basis.hpp"
#include "spinsme/state.hpp"

namespace spinsme {
namespace {

const Complex kI(0.0, 1.0);

// Reference fields written as plain matrix products, independent of the
// entrywise evaluation in the library.
Matrix ref_drift(const SpinBasis& b, const Matrix& r, double u, double omega, double m) {
  const Matrix h = omega * b.jz() + u * b.jy();
  const Matrix& z = b.jz();
  return -kI * (h * r - r * h) + 0.5 * m * (2.0 * z * r * z - z * z * r - r * z * z);
}

Matrix ref_diffusion(const SpinBasis& b, const Matrix& r, double eta, double m) {
  const Matrix& z = b.jz();
  return std::sqrt(eta * m) * (z * r + r * z - 2.0 * (z * r).trace().real() * r);
}

// Directional derivative of G along itself by central differences.
Matrix dg_along_g(const SpinBasis& b, const Matrix& r, double eta, double m, double h) {
  const Matrix g = ref_diffusion(b, r, eta, m);
  return (ref_diffusion(b, r + h * g, eta, m) - ref_diffusion(b, r - h * g, eta, m)) /
         (2.0 * h);
}

TEST(Drift, Examples) {
  const SpinBasis b3 = build_basis(3);
  for (int n = 0; n < 3; ++n) {
    EXPECT_EQ(drift_l(b3, projector(b3, n).matrix(), 0.0, 0.4, 1.4).norm(), 0.0);
  }
  const SpinBasis b2 = build_basis(2);
  const Matrix half = Matrix::Constant(2, 2, Complex(0.5));
  Matrix expected(2, 2);
  expected << 0.0, -0.25, -0.25, 0.0;
  EXPECT_LE((drift_l(b2, half, 0.0, 0.0, 1.0) - expected).norm(), 1e-15);
}

TEST(Diffusion, Examples) {
  const SpinBasis b3 = build_basis(3);
  for (int n = 0; n < 3; ++n) {
    EXPECT_EQ(diffusion_g(b3, projector(b3, n).matrix(), 0.5, 1.5).norm(), 0.0);
  }
  const double a = 2.0 * std::sqrt(0.75) / 3.0;
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 0) = a;
  expected(2, 2) = -a;
  const Matrix g = diffusion_g(b3, DensityMatrix::maximally_mixed(3).matrix(), 0.5, 1.5);
  EXPECT_LE((g - expected).norm(), 1e-15);
}

TEST(Fields, MatchMatrixProductsAndPreserveTraceAndHermiticity) {
  for (int n = 2; n <= 6; ++n) {
    const SpinBasis b = build_basis(n);
    for (std::uint64_t s = 0; s < 1000; ++s) {
      const Matrix r = random_density(n, 1 + static_cast<int>(s % n), s).matrix();
      const double u = 0.01 * static_cast<double>(s % 300) - 1.5;
      const Matrix l = drift_l(b, r, u, 0.4, 1.4);
      const Matrix g = diffusion_g(b, r, 0.4, 1.4);
      ASSERT_LE((l - ref_drift(b, r, u, 0.4, 1.4)).norm(), 1e-12);
      ASSERT_LE((g - ref_diffusion(b, r, 0.4, 1.4)).norm(), 1e-12);
      ASSERT_LE(std::abs(l.trace()), 1e-10);
      ASSERT_LE(std::abs(g.trace()), 1e-10);
      ASSERT_LE((l - l.adjoint()).norm(), 1e-10);
      ASSERT_LE((g - g.adjoint()).norm(), 1e-10);
    }
  }
}

TEST(FilterCorrection, Examples) {
  const SpinBasis b = build_basis(3);
  const SystemParams matched = SystemParams::matched(0.4, 0.4, 1.4);
  const Matrix r = random_density(3, 3, 11).matrix();
  EXPECT_LE(filter_correction(b, r, r, matched).norm(), 1e-15);

  const SystemParams ref = SystemParams::reference();
  EXPECT_EQ(filter_correction(b, projector(b, 2).matrix(), projector(b, 0).matrix(), ref)
                .norm(),
            0.0);

  for (std::uint64_t s = 0; s < 50; ++s) {
    const Matrix x = random_density(3, 3, 100 + s).matrix();
    const Matrix y = random_density(3, 2, 200 + s).matrix();
    const double gap = std::sqrt(0.56) * (b.jz() * x).trace().real() -
                       std::sqrt(0.75) * (b.jz() * y).trace().real();
    const Matrix expected = 2.0 * gap * ref_diffusion(b, y, 0.5, 1.5);
    EXPECT_LE((filter_correction(b, x, y, ref) - expected).norm(), 1e-13);
  }
}

TEST(Stratonovich, EigenstatesAreEquilibriaAtFullEfficiency) {
  const SpinBasis b = build_basis(4);
  for (int n = 0; n < 4; ++n) {
    EXPECT_LE(stratonovich_drift(b, projector(b, n).matrix(), 0.0, 0.3, 1.0, 1.2).norm(),
              1e-14);
  }
}

TEST(Stratonovich, ConversionMatchesFiniteDifferenceOracle) {
  for (int n = 2; n <= 5; ++n) {
    const SpinBasis b = build_basis(n);
    for (std::uint64_t s = 0; s < 40; ++s) {
      const Matrix r = random_density(n, n, 500 + s).matrix();
      const double u = 0.7;
      const double eta = 0.4;
      const double m = 1.4;
      const double shift = 2.0 * std::sqrt(eta * m) * (b.jz() * r).trace().real();
      const Matrix lhs = stratonovich_drift(b, r, u, 0.4, eta, m) +
                         shift * ref_diffusion(b, r, eta, m);
      const Matrix rhs = ref_drift(b, r, u, 0.4, m) - 0.5 * dg_along_g(b, r, eta, m, 1e-6);
      EXPECT_LE((lhs - rhs).norm(), 1e-6) << "N=" << n << " seed=" << s;
    }
  }
}

TEST(Stratonovich, DeterministicRightHandSide) {
  const SpinBasis b = build_basis(3);
  const SystemParams p = SystemParams::reference();
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Matrix r = random_density(3, 3, 700 + s).matrix();
    const Matrix h = random_density(3, 3, 800 + s).matrix();
    const double u = 0.3;
    const double v = -0.2;
    const DeterministicRhs rhs = deterministic_rhs(b, r, h, u, v, p);
    const double big_v = v + 2.0 * std::sqrt(p.eta * p.m) * (b.jz() * r).trace().real();
    const double sh = std::sqrt(p.eta_hat * p.m_hat);
    const Matrix expected_hat = ref_drift(b, h, u, p.omega_hat, p.m_hat) -
                                0.5 * dg_along_g(b, h, p.eta_hat, p.m_hat, 1e-6) +
                                (big_v - 2.0 * sh * (b.jz() * h).trace().real()) *
                                    ref_diffusion(b, h, p.eta_hat, p.m_hat);
    EXPECT_LE((rhs.rho_hat - expected_hat).norm(), 1e-6);
    EXPECT_LE(std::abs(rhs.rho.trace()), 1e-12);
    EXPECT_LE(std::abs(rhs.rho_hat.trace()), 1e-12);
  }
}

TEST(Observation, Increment) {
  const SpinBasis b = build_basis(3);
  const SystemParams p = SystemParams::reference();
  const Matrix mixed = DensityMatrix::maximally_mixed(3).matrix();
  EXPECT_NEAR(observation_increment(b, mixed, p, 0.01, 1e-3), 0.01, 1e-17);
  EXPECT_NEAR(observation_increment(b, projector(b, 0).matrix(), p, 0.0, 1e-3),
              2.0 * std::sqrt(0.56) * 1e-3, 1e-18);
  EXPECT_NEAR(observation_increment(b, projector(b, 0).matrix(), p, 0.0, 1e-3), 1.49666e-3,
              5e-9);
  const Matrix r = random_density(3, 3, 3).matrix();
  const double y0 = observation_increment(b, r, p, 0.0, 1e-3);
  const double y1 = observation_increment(b, r, p, 0.02, 1e-3);
  const double y2 = observation_increment(b, r, p, 0.04, 1e-3);
  EXPECT_NEAR(y2 - y1, y1 - y0, 1e-16);
}

TEST(Fields, RejectWrongShape) {
  const SpinBasis b = build_basis(3);
  EXPECT_THROW(drift_l(b, Matrix::Identity(2, 2), 0.0, 0.0, 1.0), ShapeError);
  EXPECT_THROW(diffusion_g(b, Matrix::Identity(4, 4), 1.0, 1.0), ShapeError);
}

}  // namespace
}  // namespace spinsme
