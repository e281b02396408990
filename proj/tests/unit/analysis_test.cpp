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
#include <vector>

#include <gtest/gtest.h>

#include "spinsme/analysis.hpp"
#include "spinsme/dynamics.hpp"
#include "spinsme/errors.hpp"
#include "spinsme/feedback.hpp"
#include "spinsme/spin_basis.hpp"
#include "spinsme/state.hpp"

namespace spinsme {
namespace {

const LyapunovTag kAllTags[] = {LyapunovTag::SqrtJoint, LyapunovTag::SqrtSum,
                                LyapunovTag::MixedAsym, LyapunovTag::OffdiagSum,
                                LyapunovTag::MixedInterior};

bool boundary_only(LyapunovTag t) {
  return t == LyapunovTag::SqrtJoint || t == LyapunovTag::SqrtSum ||
         t == LyapunovTag::MixedAsym;
}

TEST(Lyapunov, Examples) {
  const SpinBasis b = build_basis(3);
  const CoupledState target{projector(b, 0), projector(b, 0)};
  EXPECT_EQ(lyapunov_value(b, {LyapunovTag::SqrtJoint, 0}, target), 0.0);
  EXPECT_DOUBLE_EQ(lyapunov_value(b, {LyapunovTag::SqrtJoint, 0}, {projector(b, 2), projector(b, 0)}),
                   1.0);
  const CoupledState mixed{DensityMatrix::maximally_mixed(3), DensityMatrix::maximally_mixed(3)};
  EXPECT_NEAR(lyapunov_value(b, {LyapunovTag::OffdiagSum, 1}, mixed), 4.0 * std::sqrt(1.0 / 3.0),
              1e-15);
  EXPECT_NEAR(lyapunov_value(b, {LyapunovTag::OffdiagSum, 1}, mixed), 2.30940, 5e-6);
}

TEST(Lyapunov, TagTargetCompatibility) {
  const SpinBasis b = build_basis(3);
  const CoupledState mixed{DensityMatrix::maximally_mixed(3), DensityMatrix::maximally_mixed(3)};
  for (const LyapunovTag t : kAllTags) {
    EXPECT_NO_THROW(lyapunov_value(b, {t, 0}, mixed));
    EXPECT_NO_THROW(lyapunov_value(b, {t, 2}, mixed));
    if (boundary_only(t)) {
      EXPECT_THROW(lyapunov_value(b, {t, 1}, mixed), DomainError);
    } else {
      EXPECT_NO_THROW(lyapunov_value(b, {t, 1}, mixed));
    }
    EXPECT_THROW(lyapunov_value(b, {t, 3}, mixed), DomainError);
    EXPECT_EQ(parse_lyapunov_tag(to_string(t)), t);
  }
}

TEST(Lyapunov, ZeroExactlyAtTarget) {
  for (int n = 2; n <= 5; ++n) {
    const SpinBasis b = build_basis(n);
    for (const int target : {0, n - 1}) {
      const CoupledState at{projector(b, target), projector(b, target)};
      for (const LyapunovTag t : kAllTags) {
        EXPECT_EQ(lyapunov_value(b, {t, target}, at), 0.0);
        for (std::uint64_t s = 0; s < 2000; ++s) {
          const CoupledState x{random_density(n, 1 + static_cast<int>(s % n), s),
                               random_density(n, n, 5000 + s)};
          ASSERT_GT(lyapunov_value(b, {t, target}, x), 0.0);
          ASSERT_GT(coupled_distance_to_eigenpair(x, target, target), 0.0);
        }
      }
    }
  }
}

TEST(Lyapunov, SandwichBounds) {
  const SpinBasis b = build_basis(3);
  int checked = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const CoupledState x{random_density(3, 1 + static_cast<int>(s % 3), s),
                         random_density(3, 1 + static_cast<int>((s / 3) % 3), 20000 + s)};
    for (const LyapunovId id : {LyapunovId{LyapunovTag::SqrtJoint, 0},
                                LyapunovId{LyapunovTag::SqrtSum, 2},
                                LyapunovId{LyapunovTag::OffdiagSum, 1}}) {
      const SandwichCheck c = lyapunov_bounds_check(b, id, x);
      ASSERT_TRUE(c.applicable);
      ASSERT_TRUE(c.holds) << to_string(id.tag) << " seed " << s << ": " << c.lower << " "
                           << c.value << " " << c.upper;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 30000);

  const SandwichCheck zero =
      lyapunov_bounds_check(b, {LyapunovTag::SqrtJoint, 0}, {projector(b, 0), projector(b, 0)});
  EXPECT_EQ(zero.value, 0.0);
  EXPECT_LE(zero.upper, 1e-6);
  EXPECT_TRUE(zero.holds);

  const SandwichCheck offdiag = lyapunov_bounds_check(
      b, {LyapunovTag::OffdiagSum, 1},
      {DensityMatrix::maximally_mixed(3), DensityMatrix::maximally_mixed(3)});
  EXPECT_NEAR(offdiag.upper, std::sqrt(2.0) * offdiag.distance, 1e-12);
  EXPECT_NEAR(offdiag.lower, std::sqrt(0.5) * offdiag.distance, 1e-12);

  EXPECT_FALSE(
      lyapunov_bounds_check(b, {LyapunovTag::MixedAsym, 0}, {projector(b, 1), projector(b, 2)})
          .applicable);
}

TEST(Generator, PopulationExamples) {
  const SpinBasis b = build_basis(3);
  const SystemParams p = SystemParams::reference();
  const CoupledState at{projector(b, 1), projector(b, 1)};
  for (int k = 0; k < 3; ++k) {
    for (const Component c : {Component::True, Component::Filter}) {
      const DriftDiffusion dd = generator_population(b, p, at, k, c, 0.0);
      EXPECT_EQ(dd.drift, 0.0);
      EXPECT_EQ(dd.diffusion, 0.0);
    }
  }
  const CoupledState x{projector(b, 2), DensityMatrix::maximally_mixed(3)};
  const DriftDiffusion f = generator_population(b, p, x, 0, Component::Filter, 0.0);
  EXPECT_NEAR(f.drift, 4.0 * std::sqrt(0.75) * 1.0 * (-std::sqrt(0.56)) / 3.0, 1e-14);
  // The exact value is -0.864099; the commonly quoted -0.86400 is rounded.
  EXPECT_NEAR(f.drift, -0.86410, 5e-6);
}

// Closed forms against (k,k) entries of the matrix fields, and against the
// displayed population formulas.
TEST(Generator, MatchesMatrixFieldsAndDisplays) {
  for (int n = 2; n <= 5; ++n) {
    const SpinBasis b = build_basis(n);
    const SystemParams p = SystemParams::reference();
    for (std::uint64_t s = 0; s < 200; ++s) {
      const CoupledState x{random_density(n, n, s), random_density(n, n, 300 + s)};
      const Matrix& r = x.rho.matrix();
      const Matrix& h = x.rho_hat.matrix();
      const double u = 0.02 * static_cast<double>(s) - 2.0;
      const Matrix lt = drift_l(b, r, u, p.omega, p.m);
      const Matrix gt = diffusion_g(b, r, p.eta, p.m);
      const Matrix lf = drift_l(b, h, u, p.omega_hat, p.m_hat) + filter_correction(b, r, h, p);
      const Matrix gf = diffusion_g(b, h, p.eta_hat, p.m_hat);
      const double gap = innovation_gap(b, p, r, h);
      for (int k = 0; k < n; ++k) {
        const DriftDiffusion t = generator_population(b, p, x, k, Component::True, u);
        const DriftDiffusion f = generator_population(b, p, x, k, Component::Filter, u);
        ASSERT_NEAR(t.drift, lt(k, k).real(), 1e-12);
        ASSERT_NEAR(t.diffusion, gt(k, k).real(), 1e-12);
        ASSERT_NEAR(f.drift, lf(k, k).real(), 1e-12);
        ASSERT_NEAR(f.diffusion, gf(k, k).real(), 1e-12);

        ASSERT_NEAR(t.drift, -u * theta(b, r, k), 1e-12);
        ASSERT_NEAR(t.diffusion, 2.0 * p.sqrt_eta_m() * p_offset(b, r, k) * r(k, k).real(), 1e-12);
        ASSERT_NEAR(f.drift,
                    -u * theta(b, h, k) +
                        4.0 * p.sqrt_eta_m_hat() * p_offset(b, h, k) * gap * h(k, k).real(),
                    1e-12);
      }
    }
  }
}

// Ito formula assembled from finite-difference derivatives of the Lyapunov
// value and the population fields.
TEST(Generator, LyapunovMatchesFiniteDifferenceChainRule) {
  const SpinBasis b = build_basis(3);
  const SystemParams p = SystemParams::reference();
  for (const int target : {0, 1}) {
    const ControllerSpec spec = target == 0 ? ControllerSpec::boundary(0, 5.0, 2.0)
                                            : ControllerSpec::interior(1, 5.0, 2.0);
    for (const LyapunovTag tag : kAllTags) {
      if (target == 1 && boundary_only(tag)) continue;
      const LyapunovId id{tag, target};
      for (std::uint64_t s = 0; s < 20; ++s) {
        const CoupledState x{random_density(3, 3, 40 + s), random_density(3, 3, 90 + s)};
        const double u = evaluate_control(spec, b, x.rho_hat.matrix());
        std::vector<double> drift(6);
        std::vector<double> diff(6);
        for (int k = 0; k < 3; ++k) {
          const auto t = generator_population(b, p, x, k, Component::True, u);
          const auto f = generator_population(b, p, x, k, Component::Filter, u);
          drift[k] = t.drift;
          diff[k] = t.diffusion;
          drift[3 + k] = f.drift;
          diff[3 + k] = f.diffusion;
        }
        const auto shifted = [&](int i, double di, int j, double dj) {
          CoupledState y = x;
          auto bump = [&](int idx, double d) {
            Matrix& m = idx < 3 ? y.rho.matrix() : y.rho_hat.matrix();
            m(idx % 3, idx % 3) += d;
          };
          bump(i, di);
          if (j >= 0) bump(j, dj);
          return lyapunov_value(b, id, y);
        };
        const double h = 1e-4;
        double grad_b = 0.0;
        double grad_s = 0.0;
        double hess = 0.0;
        for (int i = 0; i < 6; ++i) {
          const double gi = (shifted(i, h, -1, 0) - shifted(i, -h, -1, 0)) / (2.0 * h);
          grad_b += gi * drift[i];
          grad_s += gi * diff[i];
          for (int j = 0; j < 6; ++j) {
            const double hij = (shifted(i, h, j, h) - shifted(i, h, j, -h) -
                                shifted(i, -h, j, h) + shifted(i, -h, j, -h)) /
                               (4.0 * h * h);
            hess += hij * diff[i] * diff[j];
          }
        }
        const DriftDiffusion g = lyapunov_generator(b, id, x, spec, p);
        EXPECT_NEAR(g.drift, grad_b + 0.5 * hess, 1e-5) << to_string(tag) << " seed " << s;
        EXPECT_NEAR(g.diffusion, grad_s, 1e-6) << to_string(tag) << " seed " << s;
      }
    }
  }
}

TEST(Oracle, ConstantFunctionAndPopulation) {
  const SpinBasis b = build_basis(3);
  const SystemParams p = SystemParams::reference();
  const ControllerSpec spec = ControllerSpec::boundary(0, 5.0, 2.0);
  const CoupledState x{random_density(3, 3, 8), random_density(3, 3, 9)};

  const OracleEstimate c =
      generator_oracle(b, [](const CoupledState&) { return 3.0; }, x, spec, p, 1e-5, 2000, 1);
  EXPECT_NEAR(c.drift, 0.0, 3.0 * c.drift_se + 1e-12);
  EXPECT_NEAR(c.diffusion, 0.0, 3.0 * c.diffusion_se + 1e-12);

  const double u = evaluate_control(spec, b, x.rho_hat.matrix());
  const DriftDiffusion ref = generator_population(b, p, x, 0, Component::True, u);
  const OracleEstimate e = generator_oracle(
      b, [](const CoupledState& y) { return y.rho.population(0); }, x, spec, p, 1e-5, 20000, 2);
  EXPECT_GT(e.drift_se, 0.0);
  EXPECT_NEAR(e.drift, ref.drift, 4.0 * e.drift_se);
  EXPECT_NEAR(e.diffusion, ref.diffusion, 4.0 * e.diffusion_se);

  const OracleEstimate again = generator_oracle(
      b, [](const CoupledState& y) { return y.rho.population(0); }, x, spec, p, 1e-5, 20000, 2);
  EXPECT_EQ(e.drift, again.drift);
}

TEST(Fit, ExactExponential) {
  std::vector<double> t;
  std::vector<double> v;
  for (int k = 0; k <= 1000; ++k) {
    t.push_back(0.01 * k);
    v.push_back(std::exp(-0.28 * t.back()));
  }
  const FitResult f = fit_exponent(t, v, 0.5);
  EXPECT_NEAR(f.slope, -0.28, 1e-10);
  EXPECT_NEAR(f.intercept, 0.0, 1e-9);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(f.t_start, 5.0, 1e-12);
  EXPECT_NEAR(f.t_end, 10.0, 1e-12);
  EXPECT_TRUE(f.warning.empty());
}

TEST(Fit, ConstantAndFloor) {
  std::vector<double> t;
  std::vector<double> v;
  for (int k = 0; k <= 100; ++k) {
    t.push_back(0.1 * k);
    v.push_back(0.3);
  }
  const FitResult c = fit_exponent(t, v, 0.5, FitMode::PerSample);
  EXPECT_NEAR(c.slope, 0.0, 1e-14);
  EXPECT_EQ(c.mode, FitMode::PerSample);

  for (int k = 80; k <= 100; ++k) v[k] = 0.0;
  const FitResult cut = fit_exponent(t, v, 0.5);
  EXPECT_FALSE(cut.warning.empty());
  EXPECT_LT(cut.t_end, 8.0);

  std::vector<double> dead(t.size(), 0.0);
  EXPECT_THROW(fit_exponent(t, dead, 0.5), DomainError);
  EXPECT_THROW(fit_exponent(t, v, 0.0), DomainError);
  EXPECT_THROW(fit_exponent(t, v, 1.5), DomainError);
}

TEST(Probe, StateAtDistance) {
  const SpinBasis b = build_basis(3);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const double d = 0.013 * static_cast<double>(s);
    const Matrix r = state_at_distance(b, s % 3, d, s);
    EXPECT_TRUE(validate(r).ok());
    EXPECT_NEAR(bures_to_eigenstate(r, static_cast<int>(s % 3)), d, 1e-7);
  }
}

TEST(Probe, ExitFromSpuriousEquilibrium) {
  const SpinBasis b = build_basis(3);
  ProbeOptions o;
  o.config.dt = 1e-4;
  o.config.t_end = 10.0;
  o.n_traj = 20;
  o.master_seed = 3;
  const ProbeResult r = exit_time_probe(b, 2, 0.2, 0.05, ControllerSpec::boundary(0, 5.0, 2.0),
                                        SystemParams::reference(), o);
  EXPECT_EQ(r.count(), 20u);
  EXPECT_DOUBLE_EQ(r.fraction, 1.0);
  EXPECT_LE(r.q10, r.q50);
  EXPECT_LE(r.q50, r.q90);

  // A shorter horizon cannot exit more often.
  o.config.t_end = 0.5;
  const ProbeResult early = exit_time_probe(
      b, 2, 0.2, 0.05, ControllerSpec::boundary(0, 5.0, 2.0), SystemParams::reference(), o);
  EXPECT_LE(early.fraction, r.fraction);
  for (std::size_t i = 0; i < early.count(); ++i) {
    if (early.event_times[i] >= 0.0) EXPECT_DOUBLE_EQ(early.event_times[i], r.event_times[i]);
  }

  const std::string csv = r.to_csv("exit");
  EXPECT_EQ(csv.rfind("trajectory_index,time,exit\n", 0), 0u);
}

TEST(Probe, EquilibriumNeverExits) {
  const SpinBasis b = build_basis(3);
  ProbeOptions o;
  o.config.t_end = 2.0;
  o.n_traj = 5;
  const ProbeResult r = exit_time_probe(b, 2, 0.2, 0.0, ControllerSpec::zero(0),
                                        SystemParams::matched(0.4, 0.4, 1.4), o);
  EXPECT_EQ(r.fraction, 0.0);
  for (const double t : r.event_times) EXPECT_LT(t, 0.0);
  EXPECT_THROW(exit_time_probe(b, 0, 0.2, 0.05, ControllerSpec::zero(0),
                               SystemParams::reference(), o),
               DomainError);
}

TEST(Probe, HittingTime) {
  const SpinBasis b = build_basis(3);
  ProbeOptions o;
  o.config.t_end = 1.0;
  o.n_traj = 4;
  o.master_seed = 11;
  const CoupledState near{projector(b, 0), DensityMatrix::maximally_mixed(3)};
  const ProbeResult r = hitting_time_probe(b, near, std::sqrt(2.0),
                                           ControllerSpec::boundary(0, 5.0, 2.0),
                                           SystemParams::reference(), o);
  EXPECT_EQ(r.fraction, 1.0);
  for (const double t : r.event_times) EXPECT_EQ(t, 0.0);

  const ProbeResult a = hitting_time_probe(b, {projector(b, 2), projector(b, 1)}, 0.2,
                                           ControllerSpec::boundary(0, 5.0, 2.0),
                                           SystemParams::reference(), o);
  const ProbeResult c = hitting_time_probe(b, {projector(b, 2), projector(b, 1)}, 0.2,
                                           ControllerSpec::boundary(0, 5.0, 2.0),
                                           SystemParams::reference(), o);
  EXPECT_EQ(a.event_times, c.event_times);
}

}  // namespace
}  // namespace spinsme
