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

#include "spinsme/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "spinsme/errors.hpp"

namespace spinsme {

namespace {

constexpr double kFitFloor = 1e-14;

bool needs_boundary(LyapunovTag tag) {
  return tag == LyapunovTag::SqrtJoint || tag == LyapunovTag::SqrtSum ||
         tag == LyapunovTag::MixedAsym;
}

// V as a function of the 2N populations x = (rho_00..rho_{N-1,N-1},
// rho_hat_00..), with analytic gradient and Hessian.
struct PopulationFunction {
  double value = 0.0;
  RealVector grad;
  Eigen::MatrixXd hess;
};

// sqrt(y) with its first two derivatives in y, accumulated with sign `sgn`
// on coordinate i of x where y = offset + sgn * x_i.
void add_sqrt_term(PopulationFunction& f, int i, double y, double sgn) {
  const double r = std::sqrt(y);
  f.value += r;
  f.grad(i) += sgn * 0.5 / r;
  f.hess(i, i) += -0.25 / (y * r);
}

PopulationFunction population_function(const LyapunovId& id, int n, const RealVector& x) {
  PopulationFunction f;
  f.grad = RealVector::Zero(2 * n);
  f.hess = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  const int t = id.target;
  const int th = n + t;
  switch (id.tag) {
    case LyapunovTag::SqrtJoint: {
      const double q = 2.0 - x(t) - x(th);
      const double r = std::sqrt(q);
      f.value = r;
      const double g = -0.5 / r;
      const double h = -0.25 / (q * r);
      f.grad(t) = g;
      f.grad(th) = g;
      f.hess(t, t) = f.hess(t, th) = f.hess(th, t) = f.hess(th, th) = h;
      break;
    }
    case LyapunovTag::SqrtSum:
      add_sqrt_term(f, t, 1.0 - x(t), -1.0);
      add_sqrt_term(f, th, 1.0 - x(th), -1.0);
      break;
    case LyapunovTag::MixedAsym:
      f.value = 1.0 - x(t);
      f.grad(t) = -1.0;
      add_sqrt_term(f, th, 1.0 - x(th), -1.0);
      break;
    case LyapunovTag::OffdiagSum:
      for (int k = 0; k < n; ++k) {
        if (k == t) continue;
        add_sqrt_term(f, k, x(k), 1.0);
        add_sqrt_term(f, n + k, x(n + k), 1.0);
      }
      break;
    case LyapunovTag::MixedInterior:
      f.value = 1.0 - x(t);
      f.grad(t) = -1.0;
      for (int k = 0; k < n; ++k) {
        if (k != t) add_sqrt_term(f, n + k, x(n + k), 1.0);
      }
      break;
  }
  return f;
}

RealVector stacked_populations(const CoupledState& s) {
  const int n = s.dim();
  RealVector x(2 * n);
  x.head(n) = s.rho.populations();
  x.tail(n) = s.rho_hat.populations();
  return x;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void summarize(ProbeResult& r) {
  std::vector<double> hit;
  for (double t : r.event_times) {
    if (t >= 0.0) hit.push_back(t);
  }
  r.fraction = r.event_times.empty()
                   ? 0.0
                   : static_cast<double>(hit.size()) / static_cast<double>(r.event_times.size());
  r.q10 = quantile(hit, 0.1);
  r.q50 = quantile(hit, 0.5);
  r.q90 = quantile(hit, 0.9);
}

ProbeResult run_probe(const SpinBasis& basis, const ControllerSpec& spec,
                      const SystemParams& params, const ProbeOptions& opt,
                      const std::function<CoupledState(std::size_t)>& initial,
                      const std::function<bool(const Matrix&, const Matrix&)>& event) {
  if (opt.n_traj < 1) throw DomainError("n_traj must be positive");
  opt.config.validate();
  ProbeResult out;
  out.t_end = opt.config.t_end;
  out.event_times.assign(static_cast<std::size_t>(opt.n_traj), -1.0);
  std::vector<InvariantMonitor> monitors(out.event_times.size());
  parallel_for(out.event_times.size(), opt.workers, [&](std::size_t i) {
    const CoupledState start = initial(i);
    if (event(start.rho.matrix(), start.rho_hat.matrix())) {
      out.event_times[i] = 0.0;
      return;
    }
    IntegratorConfig cfg = opt.config;
    cfg.seed = derive_stream_seed(opt.master_seed, i);
    cfg.record_stride = static_cast<int>(std::min<long long>(cfg.step_count(), 1 << 30));
    const TrajectoryRecord rec = run_trajectory(
        basis, start, spec, params, cfg,
        [&](double, const Matrix& rho, const Matrix& rho_hat) { return event(rho, rho_hat); });
    if (rec.stopped_at) out.event_times[i] = *rec.stopped_at;
    monitors[i] = rec.monitor;
  });
  for (const auto& m : monitors) out.monitor.merge(m);
  summarize(out);
  return out;
}

}  // namespace

std::string to_string(LyapunovTag tag) {
  switch (tag) {
    case LyapunovTag::SqrtJoint: return "V_sqrt_joint";
    case LyapunovTag::SqrtSum: return "V_sqrt_sum";
    case LyapunovTag::MixedAsym: return "V_mixed_asym";
    case LyapunovTag::OffdiagSum: return "V_offdiag_sum";
    case LyapunovTag::MixedInterior: return "V_mixed_interior";
  }
  return "unknown";
}

LyapunovTag parse_lyapunov_tag(const std::string& name) {
  for (LyapunovTag t : {LyapunovTag::SqrtJoint, LyapunovTag::SqrtSum, LyapunovTag::MixedAsym,
                        LyapunovTag::OffdiagSum, LyapunovTag::MixedInterior}) {
    if (to_string(t) == name) return t;
  }
  throw DomainError("unknown Lyapunov tag '" + name + "'");
}

void LyapunovId::validate(const SpinBasis& basis) const {
  if (!basis.valid_index(target)) {
    throw DomainError("Lyapunov target " + std::to_string(target) + " out of range");
  }
  if (needs_boundary(tag) && target != 0 && target != basis.max_index()) {
    throw DomainError(to_string(tag) + " needs a boundary target (0 or " +
                      std::to_string(basis.max_index()) + ")");
  }
}

double lyapunov_value(const SpinBasis& basis, const LyapunovId& id, const CoupledState& state) {
  id.validate(basis);
  if (state.dim() != basis.dim() || state.rho_hat.dim() != basis.dim()) {
    throw ShapeError("state dimension does not match the basis");
  }
  RealVector x = stacked_populations(state);
  x = x.cwiseMax(0.0).cwiseMin(1.0);
  const int n = basis.dim();
  const int t = id.target;
  auto root = [](double v) { return std::sqrt(std::max(v, 0.0)); };
  double v = 0.0;
  switch (id.tag) {
    case LyapunovTag::SqrtJoint:
      return root(2.0 - x(t) - x(n + t));
    case LyapunovTag::SqrtSum:
      return root(1.0 - x(t)) + root(1.0 - x(n + t));
    case LyapunovTag::MixedAsym:
      return 1.0 - x(t) + root(1.0 - x(n + t));
    case LyapunovTag::OffdiagSum:
      for (int k = 0; k < n; ++k) {
        if (k != t) v += root(x(k)) + root(x(n + k));
      }
      return v;
    case LyapunovTag::MixedInterior:
      v = 1.0 - x(t);
      for (int k = 0; k < n; ++k) {
        if (k != t) v += root(x(n + k));
      }
      return v;
  }
  return v;
}

SandwichCheck lyapunov_bounds_check(const SpinBasis& basis, const LyapunovId& id,
                                    const CoupledState& state, double slack) {
  SandwichCheck c;
  c.value = lyapunov_value(basis, id, state);
  c.distance = coupled_distance_to_eigenpair(state, id.target, id.target);
  double lo = 0.0;
  double hi = 0.0;
  switch (id.tag) {
    case LyapunovTag::SqrtJoint:
      lo = 0.5;
      hi = 1.0;
      break;
    case LyapunovTag::SqrtSum:
      lo = std::sqrt(0.5);
      hi = 1.0;
      break;
    case LyapunovTag::OffdiagSum:
      lo = std::sqrt(0.5);
      hi = std::sqrt(2.0 * basis.j());
      break;
    default:
      return c;
  }
  c.applicable = true;
  c.lower = lo * c.distance;
  c.upper = hi * c.distance;
  c.holds = c.lower <= c.value + slack && c.value <= c.upper + slack;
  return c;
}

DriftDiffusion generator_population(const SpinBasis& basis, const SystemParams& params,
                                    const CoupledState& state, int k, Component which,
                                    double u) {
  if (!basis.valid_index(k)) throw DomainError("population index out of range");
  const Matrix& rho = state.rho.matrix();
  const Matrix& rho_hat = state.rho_hat.matrix();
  DriftDiffusion out;
  if (which == Component::True) {
    const double pop = rho(k, k).real();
    out.drift = -u * theta(basis, rho, k);
    out.diffusion = 2.0 * params.sqrt_eta_m() * p_offset(basis, rho, k) * pop;
  } else {
    const double pop = rho_hat(k, k).real();
    const double b = params.sqrt_eta_m_hat();
    const double gap = innovation_gap(basis, params, rho, rho_hat);
    const double p = p_offset(basis, rho_hat, k);
    out.drift = -u * theta(basis, rho_hat, k) + 4.0 * b * p * gap * pop;
    out.diffusion = 2.0 * b * p * pop;
  }
  return out;
}

DriftDiffusion lyapunov_generator(const SpinBasis& basis, const LyapunovId& id,
                                  const CoupledState& state, const ControllerSpec& spec,
                                  const SystemParams& params) {
  id.validate(basis);
  const int n = basis.dim();
  const double u = evaluate_control(spec, basis, state.rho_hat.matrix());
  RealVector b(2 * n);
  RealVector s(2 * n);
  for (int k = 0; k < n; ++k) {
    const DriftDiffusion t = generator_population(basis, params, state, k, Component::True, u);
    const DriftDiffusion f =
        generator_population(basis, params, state, k, Component::Filter, u);
    b(k) = t.drift;
    s(k) = t.diffusion;
    b(n + k) = f.drift;
    s(n + k) = f.diffusion;
  }
  const PopulationFunction f = population_function(id, n, stacked_populations(state));
  DriftDiffusion out;
  out.drift = f.grad.dot(b) + 0.5 * s.dot(f.hess * s);
  out.diffusion = f.grad.dot(s);
  return out;
}

std::vector<OracleEstimate> generator_oracle(const SpinBasis& basis,
                                             const std::vector<ScalarFunction>& phis,
                                             const CoupledState& state,
                                             const ControllerSpec& spec,
                                             const SystemParams& params, double dt,
                                             long long n_samples, std::uint64_t seed) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (n_samples < 2) throw DomainError("n_samples must be at least 2");
  const long long pairs = (n_samples + 1) / 2;
  const std::size_t m = phis.size();
  std::vector<double> phi0(m);
  for (std::size_t j = 0; j < m; ++j) phi0[j] = phis[j](state);

  // Welford accumulators per function: antithetic drift and diffusion terms.
  std::vector<double> mean_a(m, 0.0), m2_a(m, 0.0), mean_d(m, 0.0), m2_d(m, 0.0);
  IntegratorConfig cfg;
  cfg.dt = dt;
  WienerStream noise(seed, dt);
  for (long long p = 1; p <= pairs; ++p) {
    const double dw = noise.next();
    const CoupledState plus = step_coupled(basis, state, spec, params, dt, dw, cfg);
    const CoupledState minus = step_coupled(basis, state, spec, params, dt, -dw, cfg);
    for (std::size_t j = 0; j < m; ++j) {
      const double fp = phis[j](plus);
      const double fm = phis[j](minus);
      const double a = (0.5 * (fp + fm) - phi0[j]) / dt;
      const double d = 0.5 * (fp - fm) * dw / dt;
      const double da = a - mean_a[j];
      mean_a[j] += da / static_cast<double>(p);
      m2_a[j] += da * (a - mean_a[j]);
      const double dd = d - mean_d[j];
      mean_d[j] += dd / static_cast<double>(p);
      m2_d[j] += dd * (d - mean_d[j]);
    }
  }
  std::vector<OracleEstimate> out(m);
  const double np = static_cast<double>(pairs);
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t j = 0; j < m; ++j) {
    // Differences of O(1) values carry ~eps |phi| rounding each.
    const double rounding = 16.0 * eps * std::max(1.0, std::abs(phi0[j])) / dt;
    out[j].drift = mean_a[j];
    out[j].drift_se = std::sqrt(m2_a[j] / (np - 1.0) / np) + rounding;
    out[j].diffusion = mean_d[j];
    out[j].diffusion_se = std::sqrt(m2_d[j] / (np - 1.0) / np) + rounding * std::sqrt(dt);
  }
  return out;
}

OracleEstimate generator_oracle(const SpinBasis& basis, const ScalarFunction& phi,
                                const CoupledState& state, const ControllerSpec& spec,
                                const SystemParams& params, double dt, long long n_samples,
                                std::uint64_t seed) {
  return generator_oracle(basis, std::vector<ScalarFunction>{phi}, state, spec, params, dt,
                          n_samples, seed)
      .front();
}

FitResult fit_exponent(const std::vector<double>& times, const std::vector<double>& values,
                       double window_fraction, FitMode mode) {
  if (times.size() != values.size()) throw ShapeError("times and values differ in length");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw DomainError("window_fraction must lie in (0,1]");
  }
  if (times.size() < 2) throw DomainError("need at least two points to fit");
  const double t0 = times.front();
  const double t1 = times.back();
  const double start = t1 - window_fraction * (t1 - t0);
  std::size_t first = 0;
  while (first < times.size() && times[first] < start - 1e-12 * std::max(1.0, std::abs(t1))) {
    ++first;
  }
  std::size_t last = times.size();
  FitResult r;
  r.mode = mode;
  for (std::size_t i = first; i < times.size(); ++i) {
    if (!(values[i] >= kFitFloor)) {
      last = i;
      r.warning = "window cut at t=" + std::to_string(times[i]) + " (value below 1e-14)";
      break;
    }
  }
  if (last < first + 2) {
    throw DomainError("fit window has fewer than two points above 1e-14");
  }
  const double cnt = static_cast<double>(last - first);
  double mt = 0.0, my = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    mt += times[i];
    my += std::log(values[i]);
  }
  mt /= cnt;
  my /= cnt;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const double dt = times[i] - mt;
    const double dy = std::log(values[i]) - my;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  if (!(stt > 0.0)) throw DomainError("fit window spans a single time");
  r.slope = sty / stt;
  r.intercept = my - r.slope * mt;
  r.t_start = times[first];
  r.t_end = times[last - 1];
  r.points = last - first;
  const double sse = std::max(0.0, syy - r.slope * sty);
  r.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return r;
}

std::string ProbeResult::to_csv(const std::string& event_name) const {
  std::string out = "trajectory_index,time," + event_name + "\n";
  char buf[64];
  for (std::size_t i = 0; i < event_times.size(); ++i) {
    const bool hit = event_times[i] >= 0.0;
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%d\n", i, hit ? event_times[i] : t_end,
                  hit ? 1 : 0);
    out += buf;
  }
  return out;
}

Matrix state_at_distance(const SpinBasis& basis, int n, double d, std::uint64_t seed) {
  if (!basis.valid_index(n)) throw DomainError("level index out of range");
  if (!(d >= 0.0 && d < std::sqrt(2.0))) throw DomainError("distance must lie in [0, sqrt 2)");
  const Matrix sigma = random_density(basis.dim(), basis.dim(), seed).matrix();
  const double s = 1.0 - 0.5 * d * d;
  const double want = s * s;
  const double pop = sigma(n, n).real();
  Matrix rho;
  if (want >= pop) {
    const double w = (want - pop) / (1.0 - pop);
    rho = (1.0 - w) * sigma;
    rho(n, n) += w;
  } else {
    // Dilute the target population with another eigenstate.
    const int other = n == 0 ? 1 : 0;
    const double w = 1.0 - want / pop;
    rho = (1.0 - w) * sigma;
    rho(other, other) += w;
  }
  return 0.5 * (rho + rho.adjoint());
}

ProbeResult exit_time_probe(const SpinBasis& basis, int center, double radius,
                            double perturbation, const ControllerSpec& spec,
                            const SystemParams& params, const ProbeOptions& options) {
  spec.validate(basis);
  if (!basis.valid_index(center) || center == spec.target) {
    throw DomainError("exit probe center must be an eigenstate other than the target");
  }
  if (!(perturbation >= 0.0 && perturbation < radius)) {
    throw DomainError("perturbation must lie in [0, radius)");
  }
  const ConditionReport rep = check_parameter_conditions(basis.dim(), params, spec.target);
  const bool boundary = spec.target == 0 || spec.target == basis.max_index();
  const std::string cond = boundary ? "boundary_instability" : "interior_instability";
  if (!rep.holds(cond)) {
    throw ConditionFailed("instability condition does not hold:\n" + rep.to_text());
  }
  const int target = spec.target;
  auto initial = [&](std::size_t i) {
    std::mt19937_64 gen(derive_stream_seed(options.master_seed ^ 0x5eedULL, i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double share = unit(gen);
    const double d_rho = share * perturbation;
    const double d_hat = perturbation - d_rho;
    return CoupledState{DensityMatrix(state_at_distance(basis, center, d_rho, gen())),
                        DensityMatrix(state_at_distance(basis, target, d_hat, gen()))};
  };
  auto event = [&](const Matrix& rho, const Matrix& rho_hat) {
    return bures_to_eigenstate(rho, center) + bures_to_eigenstate(rho_hat, target) > radius;
  };
  return run_probe(basis, spec, params, options, initial, event);
}

ProbeResult hitting_time_probe(const SpinBasis& basis, const CoupledState& initial,
                               double epsilon, const ControllerSpec& spec,
                               const SystemParams& params, const ProbeOptions& options) {
  spec.validate(basis);
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const ConditionReport rep = check_parameter_conditions(basis.dim(), params, spec.target);
  if (!rep.holds("reachability_true") || !rep.holds("reachability_filter")) {
    throw ConditionFailed("reachability conditions do not hold:\n" + rep.to_text());
  }
  const int target = spec.target;
  auto start = [&](std::size_t) { return initial; };
  auto event = [&](const Matrix& rho, const Matrix& rho_hat) {
    return bures_to_eigenstate(rho, target) + bures_to_eigenstate(rho_hat, target) < epsilon;
  };
  return run_probe(basis, spec, params, options, start, event);
}

}  // namespace spinsme
