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

#include "spinsme/integrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "spinsme/dynamics.hpp"
#include "spinsme/errors.hpp"

namespace spinsme {

namespace {

constexpr double kHardTraceDefect = 0.1;
constexpr double kHardMinEigenvalue = -0.1;
constexpr double kPsdProbeShift = 1e-6;

double min_eigenvalue(const Matrix& rho) {
  const Matrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_eigenpair(const Matrix& rho, int n) {
  Matrix p = Matrix::Zero(rho.rows(), rho.cols());
  p(n, n) = 1.0;
  return rho == p;
}

// One-component update driven by the innovation dz. Euler-Maruyama:
// rho + L^u dt + G dz. Kraus form: M rho M^* + (1-eta) M_rate J_z rho J_z dt,
// normalized, with
//   M = I - i(omega J_z + u J_y) dt - M_rate/2 J_z^2 dt + s J_z dY
//       + s^2/2 J_z^2 (dY^2 - dt),   s = sqrt(eta M_rate), dY = dz + 2 s <J_z> dt.
class ComponentStepper {
 public:
  explicit ComponentStepper(const SpinBasis& basis)
      : l_(basis.jz_diag()), n_(basis.dim()), up_(n_), down_(n_), kraus_(n_, n_),
        tmp_(n_, n_) {
    const Matrix& jy = basis.jy();
    for (int k = 0; k < n_; ++k) {
      up_[k] = k + 1 < n_ ? jy(k, k + 1) : Complex(0.0);
      down_[k] = k > 0 ? jy(k, k - 1) : Complex(0.0);
    }
  }

  void step(Scheme scheme, const Matrix& rho, double u, double omega, double eta, double m,
            double dt, double dz, Matrix& out) {
    if (scheme == Scheme::Kraus) {
      kraus(rho, u, omega, eta, m, dt, dz, out);
    } else {
      euler(rho, u, omega, eta, m, dt, dz, out);
    }
  }

 private:
  double mean_jz(const Matrix& rho) const {
    double mean = 0.0;
    for (int k = 0; k < n_; ++k) mean += l_(k) * rho(k, k).real();
    return mean;
  }

  void euler(const Matrix& rho, double u, double omega, double eta, double m, double dt,
             double dz, Matrix& out) const {
    const double s = std::sqrt(eta * m);
    const double mean = mean_jz(rho);
    const Complex minus_iu_dt(0.0, -u * dt);
    for (int c = 0; c < n_; ++c) {
      for (int r = 0; r < n_; ++r) {
        const double gap = l_(r) - l_(c);
        const Complex drift(-0.5 * m * gap * gap * dt, -omega * gap * dt);
        const double diff = s * (l_(r) + l_(c) - 2.0 * mean) * dz;
        Complex v = rho(r, c) * (1.0 + drift + diff);
        if (u != 0.0) {
          // (J_y rho - rho J_y)(r, c)
          Complex comm(0.0);
          if (r > 0) comm += down_[r] * rho(r - 1, c);
          if (r + 1 < n_) comm += up_[r] * rho(r + 1, c);
          if (c > 0) comm -= rho(r, c - 1) * up_[c - 1];
          if (c + 1 < n_) comm -= rho(r, c + 1) * down_[c + 1];
          v += minus_iu_dt * comm;
        }
        out(r, c) = v;
      }
    }
  }

  void kraus(const Matrix& rho, double u, double omega, double eta, double m, double dt,
             double dz, Matrix& out) {
    const double s = std::sqrt(eta * m);
    const double dy = dz + 2.0 * s * mean_jz(rho) * dt;
    const double ito = 0.5 * s * s * (dy * dy - dt);
    kraus_.setZero();
    const Complex minus_iu_dt(0.0, -u * dt);
    for (int k = 0; k < n_; ++k) {
      const double l = l_(k);
      kraus_(k, k) = Complex(1.0 - 0.5 * m * l * l * dt + s * l * dy + ito * l * l,
                             -omega * l * dt);
      if (k + 1 < n_) kraus_(k, k + 1) = minus_iu_dt * up_[k];
      if (k > 0) kraus_(k, k - 1) = minus_iu_dt * down_[k];
    }
    tmp_.noalias() = kraus_ * rho;
    out.noalias() = tmp_ * kraus_.adjoint();
    const double jump = (1.0 - eta) * m * dt;
    for (int c = 0; c < n_; ++c) {
      for (int r = 0; r < n_; ++r) out(r, c) += jump * l_(r) * l_(c) * rho(r, c);
    }
    const double tr = out.trace().real();
    if (tr > 0.0) out /= tr;
  }

  const RealVector& l_;
  int n_;
  std::vector<Complex> up_;    // J_y(k, k+1)
  std::vector<Complex> down_;  // J_y(k, k-1)
  Matrix kraus_;
  Matrix tmp_;
};

// Applies renormalization and the per-step validity checks in place.
class StepFinisher {
 public:
  StepFinisher(int n, const IntegratorConfig& cfg)
      : cfg_(cfg), shifted_(n, n), llt_(n) {}

  void finish(Matrix& rho, double t, InvariantMonitor& mon) {
    const double raw_trace_defect = std::abs(rho.trace() - Complex(1.0));
    if (!std::isfinite(raw_trace_defect) || raw_trace_defect > kHardTraceDefect) {
      throw IntegrationBlowup("trace defect " + std::to_string(raw_trace_defect) +
                                  " beyond hard limit",
                              t);
    }
    if (cfg_.renormalize) rho = renormalize(rho, cfg_.psd_projection, t);
    mon.max_trace_defect =
        std::max(mon.max_trace_defect, std::abs(rho.trace() - Complex(1.0)));
    mon.max_herm_defect = std::max(mon.max_herm_defect, (rho - rho.adjoint()).norm());

    shifted_ = rho;
    shifted_.diagonal().array() += kPsdProbeShift;
    llt_.compute(shifted_);
    if (llt_.info() != Eigen::Success) {
      const double lo = min_eigenvalue(rho);
      if (lo < -kPsdProbeShift) ++mon.psd_violations;
      mon.min_eigenvalue = std::min(mon.min_eigenvalue, lo);
      if (lo < kHardMinEigenvalue) {
        throw IntegrationBlowup("min eigenvalue " + std::to_string(lo) +
                                    " beyond hard limit",
                                t);
      }
    }
  }

 private:
  const IntegratorConfig& cfg_;
  Matrix shifted_;
  Eigen::LLT<Matrix> llt_;
};

// Shared step kernel; `dy` receives the observation increment.
class CoupledStepper {
 public:
  CoupledStepper(const SpinBasis& basis, const ControllerSpec& spec,
                 const SystemParams& params, const IntegratorConfig& cfg)
      : basis_(basis), spec_(spec), params_(params), cfg_(cfg),
        component_(basis), finisher_(basis.dim(), cfg),
        next_(basis.dim(), basis.dim()), next_hat_(basis.dim(), basis.dim()) {}

  // Returns u used over the step.
  double step(Matrix& rho, Matrix& rho_hat, double dt, double dw, double t,
              InvariantMonitor& mon, double& dy) {
    const double u = evaluate_control(spec_, basis_, rho_hat);
    const double a = params_.sqrt_eta_m();
    const double b = params_.sqrt_eta_m_hat();
    const double mean = expect_jz(basis_, rho);
    const double mean_hat = expect_jz(basis_, rho_hat);
    dy = dw + 2.0 * a * mean * dt;
    double dz = dw;
    double dz_hat = 0.0;
    if (cfg_.driving_mode == DrivingMode::SharedWiener) {
      const double gap = a * mean - b * mean_hat;
      dz_hat = dw + 2.0 * gap * dt;
    } else {
      dz = dy - 2.0 * a * mean * dt;
      dz_hat = dy - 2.0 * b * mean_hat * dt;
    }
    component_.step(cfg_.scheme, rho, u, params_.omega, params_.eta, params_.m, dt, dz, next_);
    component_.step(cfg_.scheme, rho_hat, u, params_.omega_hat, params_.eta_hat, params_.m_hat, dt,
                    dz_hat, next_hat_);
    finisher_.finish(next_, t + dt, mon);
    finisher_.finish(next_hat_, t + dt, mon);
    rho.swap(next_);
    rho_hat.swap(next_hat_);
    ++mon.steps;
    return u;
  }

 private:
  const SpinBasis& basis_;
  const ControllerSpec& spec_;
  const SystemParams& params_;
  const IntegratorConfig& cfg_;
  ComponentStepper component_;
  StepFinisher finisher_;
  Matrix next_;
  Matrix next_hat_;
};

void append_record(TrajectoryRecord& rec, const SpinBasis& basis,
                   const ControllerSpec& spec, double t, const Matrix& rho,
                   const Matrix& rho_hat, double y) {
  rec.times.push_back(t);
  rec.populations.push_back(rho.diagonal().real());
  rec.populations_hat.push_back(rho_hat.diagonal().real());
  rec.d_true_target.push_back(bures_to_eigenstate(rho, spec.target));
  rec.d_filter_target.push_back(bures_to_eigenstate(rho_hat, spec.target));
  // Euler-Maruyama states may carry small negative eigenvalues; the fidelity
  // needs PSD inputs.
  rec.d_true_filter.push_back(bures_distance(DensityMatrix(renormalize(rho, true, t)),
                                             DensityMatrix(renormalize(rho_hat, true, t))));
  rec.control.push_back(evaluate_control(spec, basis, rho_hat));
  rec.jz_mean.push_back(expect_jz(basis, rho));
  rec.observation.push_back(y);
  rec.purity.push_back(rho.squaredNorm());
  rec.purity_hat.push_back(rho_hat.squaredNorm());
  rec.monitor.min_eigenvalue =
      std::min({rec.monitor.min_eigenvalue, min_eigenvalue(rho), min_eigenvalue(rho_hat)});
}

void flag_initial_state(TrajectoryRecord& rec, const SpinBasis& basis,
                        const CoupledState& initial, int target) {
  if (!is_eigenpair(initial.rho_hat.matrix(), target)) return;
  for (int n = 0; n <= basis.max_index(); ++n) {
    if (n != target && is_eigenpair(initial.rho.matrix(), n)) {
      rec.flags.push_back("initial_spurious_equilibrium(" + std::to_string(n) + "," +
                          std::to_string(target) + ")");
    }
  }
}

void require_initial(const SpinBasis& basis, const CoupledState& initial) {
  if (initial.rho.dim() != basis.dim() || initial.rho_hat.dim() != basis.dim()) {
    throw ShapeError("initial state dimension does not match the basis");
  }
  DensityMatrix::checked(initial.rho.matrix());
  DensityMatrix::checked(initial.rho_hat.matrix());
}

}  // namespace

std::string to_string(Scheme scheme) {
  return scheme == Scheme::Kraus ? "kraus" : "euler-maruyama";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "kraus") return Scheme::Kraus;
  if (name == "euler-maruyama") return Scheme::EulerMaruyama;
  throw DomainError("unknown scheme '" + name + "' (expected kraus or euler-maruyama)");
}

std::string to_string(DrivingMode mode) {
  return mode == DrivingMode::SharedWiener ? "shared-wiener" : "observation-driven";
}

DrivingMode parse_driving_mode(const std::string& name) {
  if (name == "shared-wiener") return DrivingMode::SharedWiener;
  if (name == "observation-driven") return DrivingMode::ObservationDriven;
  throw DomainError("unknown driving mode '" + name +
                    "' (expected shared-wiener or observation-driven)");
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
  if (!(t_end >= dt) || !std::isfinite(t_end)) throw DomainError("t_end must be >= dt");
  if (record_stride < 1) throw DomainError("record_stride must be >= 1");
}

long long IntegratorConfig::step_count() const {
  return static_cast<long long>(std::llround(t_end / dt));
}

void InvariantMonitor::merge(const InvariantMonitor& o) {
  max_trace_defect = std::max(max_trace_defect, o.max_trace_defect);
  max_herm_defect = std::max(max_herm_defect, o.max_herm_defect);
  min_eigenvalue = std::min(min_eigenvalue, o.min_eigenvalue);
  psd_violations += o.psd_violations;
  steps += o.steps;
}

std::vector<std::string> TrajectoryRecord::csv_header(int n) {
  std::vector<std::string> h{"t"};
  for (int k = 0; k < n; ++k) h.push_back("rho_" + std::to_string(k));
  for (int k = 0; k < n; ++k) h.push_back("rhohat_" + std::to_string(k));
  for (const char* c : {"dB_true_target", "dB_filter_target", "dB_true_filter", "u",
                        "trJzRho", "Y", "purity_rho", "purity_rhohat"}) {
    h.emplace_back(c);
  }
  return h;
}

std::string TrajectoryRecord::to_csv() const {
  const int n = populations.empty() ? 0 : static_cast<int>(populations.front().size());
  std::string out;
  const auto header = csv_header(n);
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (k) out += ',';
    out += header[k];
  }
  out += '\n';
  char buf[40];
  auto put = [&](double v, bool first = false) {
    if (!first) out += ',';
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
  };
  for (std::size_t i = 0; i < times.size(); ++i) {
    put(times[i], true);
    for (int k = 0; k < n; ++k) put(populations[i](k));
    for (int k = 0; k < n; ++k) put(populations_hat[i](k));
    put(d_true_target[i]);
    put(d_filter_target[i]);
    put(d_true_filter[i]);
    put(control[i]);
    put(jz_mean[i]);
    put(observation[i]);
    put(purity[i]);
    put(purity_hat[i]);
    out += '\n';
  }
  return out;
}

Matrix renormalize(const Matrix& rho, bool psd_projection, double time) {
  const double herm = (rho - rho.adjoint()).norm();
  if (!(herm < 0.1)) {
    throw IntegrationBlowup("Hermiticity defect " + std::to_string(herm) +
                                " beyond hard limit",
                            time);
  }
  Matrix out = 0.5 * (rho + rho.adjoint());
  double tr = out.trace().real();
  if (!(tr > 0.0)) throw IntegrationBlowup("non-positive trace", time);
  out /= tr;
  if (psd_projection) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(out);
    RealVector w = es.eigenvalues().cwiseMax(0.0);
    out = es.eigenvectors() * w.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    out = 0.5 * (out + out.adjoint());
    tr = out.trace().real();
    if (!(tr > 0.0)) throw IntegrationBlowup("non-positive trace after projection", time);
    out /= tr;
  }
  return out;
}

CoupledState step_coupled(const SpinBasis& basis, const CoupledState& state,
                          const ControllerSpec& spec, const SystemParams& params,
                          double dt, double dw, const IntegratorConfig& config) {
  if (!std::isfinite(dw)) throw DomainError("dW must be finite");
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  Matrix rho = state.rho.matrix();
  Matrix rho_hat = state.rho_hat.matrix();
  if (rho.rows() != basis.dim() || rho_hat.rows() != basis.dim()) {
    throw ShapeError("state dimension does not match the basis");
  }
  CoupledStepper stepper(basis, spec, params, config);
  InvariantMonitor mon;
  double dy = 0.0;
  stepper.step(rho, rho_hat, dt, dw, 0.0, mon, dy);
  return CoupledState{DensityMatrix(std::move(rho)), DensityMatrix(std::move(rho_hat))};
}

TrajectoryRecord run_trajectory(const SpinBasis& basis, const CoupledState& initial,
                                const ControllerSpec& spec, const SystemParams& params,
                                const IntegratorConfig& config, const StopPredicate& stop) {
  config.validate();
  params.validate();
  spec.validate(basis);
  require_initial(basis, initial);

  TrajectoryRecord rec;
  rec.seed = config.seed;
  rec.target = spec.target;
  rec.config = config;
  flag_initial_state(rec, basis, initial, spec.target);

  Matrix rho = initial.rho.matrix();
  Matrix rho_hat = initial.rho_hat.matrix();
  CoupledStepper stepper(basis, spec, params, config);
  WienerStream noise(config.seed, config.dt);
  const long long steps = config.step_count();
  double y = 0.0;
  append_record(rec, basis, spec, 0.0, rho, rho_hat, y);
  for (long long k = 1; k <= steps; ++k) {
    const double t_prev = static_cast<double>(k - 1) * config.dt;
    const double t = static_cast<double>(k) * config.dt;
    double dy = 0.0;
    stepper.step(rho, rho_hat, config.dt, noise.next(), t_prev, rec.monitor, dy);
    y += dy;
    const bool stopping = stop && stop(t, rho, rho_hat);
    if (stopping || k % config.record_stride == 0 || k == steps) {
      append_record(rec, basis, spec, t, rho, rho_hat, y);
    }
    if (stopping) {
      rec.stopped_at = t;
      break;
    }
  }
  rec.final_state = CoupledState{DensityMatrix(std::move(rho)), DensityMatrix(std::move(rho_hat))};
  return rec;
}

TrajectoryRecord run_deterministic(const SpinBasis& basis, const CoupledState& initial,
                                   const ControllerSpec& spec, const SystemParams& params,
                                   const ControlSignal& v, double dt, double t_end,
                                   int record_stride) {
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.record_stride = record_stride;
  cfg.renormalize = false;
  cfg.validate();
  params.validate();
  spec.validate(basis);
  require_initial(basis, initial);
  if (!v) throw DomainError("control signal is empty");

  TrajectoryRecord rec;
  rec.target = spec.target;
  rec.config = cfg;
  flag_initial_state(rec, basis, initial, spec.target);

  const int n = basis.dim();
  // Stack rho over rho_hat so the generic RK4 helper applies.
  Matrix x(2 * n, n);
  x.topRows(n) = initial.rho.matrix();
  x.bottomRows(n) = initial.rho_hat.matrix();
  double vt = 0.0;
  auto field = [&](const Matrix& s) -> Matrix {
    const Matrix rho = s.topRows(n);
    const Matrix rho_hat = s.bottomRows(n);
    const double u = evaluate_control(spec, basis, rho_hat);
    const DeterministicRhs f = deterministic_rhs(basis, rho, rho_hat, u, vt, params);
    Matrix out(2 * n, n);
    out.topRows(n) = f.rho;
    out.bottomRows(n) = f.rho_hat;
    return out;
  };

  const long long steps = cfg.step_count();
  double integral_v = 0.0;
  append_record(rec, basis, spec, 0.0, x.topRows(n), x.bottomRows(n), integral_v);
  for (long long k = 1; k <= steps; ++k) {
    const double t_prev = static_cast<double>(k - 1) * dt;
    const double t = static_cast<double>(k) * dt;
    vt = v(t_prev);
    if (!std::isfinite(vt)) throw DomainError("control signal is not finite");
    x = rk4_step(field, x, dt);
    integral_v += vt * dt;
    for (int half = 0; half < 2; ++half) {
      const Matrix block = x.middleRows(half * n, n);
      const double defect = std::abs(block.trace() - Complex(1.0));
      if (!std::isfinite(defect) || defect > kHardTraceDefect) {
        throw IntegrationBlowup("deterministic trace defect " + std::to_string(defect), t);
      }
      rec.monitor.max_trace_defect = std::max(rec.monitor.max_trace_defect, defect);
      rec.monitor.max_herm_defect =
          std::max(rec.monitor.max_herm_defect, (block - block.adjoint()).norm());
    }
    ++rec.monitor.steps;
    if (k % record_stride == 0 || k == steps) {
      append_record(rec, basis, spec, t, x.topRows(n), x.bottomRows(n), integral_v);
    }
  }
  rec.final_state = CoupledState{DensityMatrix(Matrix(x.topRows(n))),
                                 DensityMatrix(Matrix(x.bottomRows(n)))};
  return rec;
}

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                    : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace spinsme
