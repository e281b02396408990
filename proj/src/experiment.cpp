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

#include "spinsme/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "spinsme/errors.hpp"

namespace spinsme {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write '" + path.string() + "'");
  out << content;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::ordered_json fit_json(const FitResult& f) {
  nlohmann::ordered_json j;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["t_start"] = f.t_start;
  j["t_end"] = f.t_end;
  j["r_squared"] = f.r_squared;
  j["points"] = f.points;
  j["mode"] = f.mode == FitMode::PerSample ? "per-sample" : "ensemble-mean";
  if (!f.warning.empty()) j["warning"] = f.warning;
  return j;
}

nlohmann::ordered_json bounds_json(const ExponentBounds& b) {
  nlohmann::ordered_json j;
  j["theorem"] = to_string(b.theorem);
  j["nu_s"] = b.nu_s;
  j["nu_av"] = b.nu_av;
  j["nu_s_statement"] = b.nu_s_statement;
  j["constants"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : b.constants) j["constants"][k] = v;
  return j;
}

nlohmann::ordered_json monitor_json(const InvariantMonitor& m) {
  nlohmann::ordered_json j;
  j["steps"] = m.steps;
  j["max_trace_defect"] = m.max_trace_defect;
  j["max_herm_defect"] = m.max_herm_defect;
  j["min_eigenvalue"] = m.min_eigenvalue;
  j["psd_violations"] = m.psd_violations;
  return j;
}

bool is_boundary(int n, int target) { return target == 0 || target == n - 1; }

std::string eligibility_flag(TheoremId theorem, int n, int target) {
  if (theorem == TheoremId::Auto) {
    theorem = is_boundary(n, target) ? TheoremId::BoundaryWindow : TheoremId::Interior;
  }
  switch (theorem) {
    case TheoremId::BoundaryWindow: return "eligible_boundary_window";
    case TheoremId::BoundaryExtended: return "eligible_boundary_extended";
    default: return "eligible_interior";
  }
}

MeanSeries ensemble_mean(const std::vector<TrajectoryRecord>& records,
                         const std::vector<TrajectoryOutcome>& outcomes) {
  MeanSeries m;
  std::vector<const TrajectoryRecord*> ok;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (outcomes[i].ok) ok.push_back(&records[i]);
  }
  if (ok.empty()) return m;
  const std::size_t len = ok.front()->size();
  m.times = ok.front()->times;
  const double cnt = static_cast<double>(ok.size());
  for (std::size_t t = 0; t < len; ++t) {
    double a = 0.0, b = 0.0, c = 0.0, s = 0.0, s2 = 0.0;
    for (const TrajectoryRecord* r : ok) {
      a += r->d_true_target[t];
      b += r->d_filter_target[t];
      c += r->d_true_filter[t];
      const double d = r->d_true_target[t] + r->d_filter_target[t];
      s += d;
      s2 += d * d;
    }
    m.true_target.push_back(a / cnt);
    m.filter_target.push_back(b / cnt);
    m.true_filter.push_back(c / cnt);
    const double mean = s / cnt;
    m.coupled.push_back(mean);
    const double var = cnt > 1.0 ? std::max(0.0, (s2 - cnt * mean * mean) / (cnt - 1.0)) : 0.0;
    m.coupled_se.push_back(std::sqrt(var / cnt));
  }
  return m;
}

}  // namespace

std::string version_string() { return std::string("spinsme ") + SPINSME_VERSION; }

std::vector<double> coupled_series(const TrajectoryRecord& rec) {
  std::vector<double> out(rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    out[i] = rec.d_true_target[i] + rec.d_filter_target[i];
  }
  return out;
}

std::uint64_t trajectory_seed(std::uint64_t master, std::size_t index) {
  return derive_stream_seed(master, index);
}

std::string MeanSeries::to_csv() const {
  std::string out =
      "t,mean_dB_true_target,mean_dB_filter_target,mean_dB_true_filter,mean_dB_coupled,"
      "se_dB_coupled\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out += fmt17(times[i]) + ',' + fmt17(true_target[i]) + ',' + fmt17(filter_target[i]) +
           ',' + fmt17(true_filter[i]) + ',' + fmt17(coupled[i]) + ',' +
           fmt17(coupled_se[i]) + '\n';
  }
  return out;
}

std::size_t EnsembleSummary::failures() const {
  std::size_t f = 0;
  for (const auto& o : outcomes) f += o.ok ? 0 : 1;
  return f;
}

nlohmann::ordered_json EnsembleSummary::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = version_string();
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config.entries()) j["config"][k] = v;
  j["master_seed"] = config.seed;
  j["trajectories"] = outcomes.size();
  j["failures"] = failures();
  j["parameter_conditions"] = parameter_conditions.to_json();
  j["hypotheses"] = hypotheses.to_json();
  if (condition_u) j["condition_u"] = condition_u->to_json();
  if (bounds) {
    j["exponent_bounds"] = bounds_json(*bounds);
  } else {
    j["exponent_bounds"] = nullptr;
    j["exponent_bounds_note"] = bounds_note;
  }
  j["warnings"] = warnings;
  if (!mean.times.empty()) {
    nlohmann::ordered_json f;
    f["t"] = mean.times.back();
    f["mean_dB_true_target"] = mean.true_target.back();
    f["mean_dB_filter_target"] = mean.filter_target.back();
    f["mean_dB_true_filter"] = mean.true_filter.back();
    f["mean_dB_coupled"] = mean.coupled.back();
    f["se_dB_coupled"] = mean.coupled_se.back();
    j["final_mean"] = f;
  }
  if (mean_fit) {
    j["mean_fit"] = fit_json(*mean_fit);
  } else {
    j["mean_fit"] = nullptr;
    j["mean_fit_error"] = mean_fit_error;
  }
  j["monitor"] = monitor_json(monitor);
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (const auto& o : outcomes) {
    nlohmann::ordered_json t;
    t["index"] = o.index;
    t["seed"] = o.seed;
    t["ok"] = o.ok;
    if (!o.ok) {
      t["error"] = o.error;
      t["failed_at"] = o.failed_at;
    } else {
      t["final_dB_true_target"] = o.final_true_target;
      t["final_dB_filter_target"] = o.final_filter_target;
      t["final_dB_true_filter"] = o.final_true_filter;
      t["final_dB_coupled"] = o.final_coupled;
      if (o.fit) {
        t["fit"] = fit_json(*o.fit);
      } else {
        t["fit"] = nullptr;
        t["fit_error"] = o.fit_error;
      }
    }
    per.push_back(std::move(t));
  }
  j["per_trajectory"] = std::move(per);
  return j;
}

bool CheckResult::required_hold(TheoremId theorem, int n, int target) const {
  if (!hypotheses.holds("H0") || !hypotheses.holds("H1")) return false;
  if (!is_boundary(n, target)) {
    if (!hypotheses.holds("H2")) return false;
    if (condition_u && !condition_u->all_hold()) return false;
  }
  return parameter_conditions.holds(eligibility_flag(theorem, n, target));
}

std::string CheckResult::to_text() const {
  std::ostringstream os;
  os << parameter_conditions.to_text() << hypotheses.to_text();
  if (condition_u) os << condition_u->to_text();
  if (bounds) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "exponent_bounds[%s]: nu_s = %.4f, nu_av = %.4f, nu_s_statement = %.4f\n",
                  to_string(bounds->theorem).c_str(), bounds->nu_s, bounds->nu_av,
                  bounds->nu_s_statement);
    os << buf;
  } else {
    os << "exponent_bounds: unavailable (" << bounds_note << ")\n";
  }
  return os.str();
}

CheckResult run_checks(const ExperimentConfig& config) {
  config.validate();
  const SpinBasis basis = build_basis(config.n);
  const int target = config.controller.target;
  CheckResult r;
  r.parameter_conditions = check_parameter_conditions(config.n, config.params, target);
  r.hypotheses = check_hypotheses(config.controller, basis, 10000, config.seed);
  if (!is_boundary(config.n, target)) {
    r.condition_u = check_condition_u(config.controller, basis, config.params, target,
                                      10000, config.seed);
  }
  try {
    r.bounds = exponent_bounds(config.n, config.params, target, config.theorem);
  } catch (const ConditionFailed& e) {
    r.bounds_note = "conditions do not hold for theorem '" + to_string(config.theorem) + "'";
  }
  return r;
}

EnsembleSummary run_experiment(const ExperimentConfig& config, bool write_files) {
  const auto start = std::chrono::steady_clock::now();
  const CheckResult checks = run_checks(config);
  const SpinBasis basis = build_basis(config.n);
  const int target = config.controller.target;

  EnsembleSummary s;
  s.config = config;
  s.parameter_conditions = checks.parameter_conditions;
  s.hypotheses = checks.hypotheses;
  s.condition_u = checks.condition_u;
  s.bounds = checks.bounds;
  s.bounds_note = checks.bounds_note;
  if (!checks.required_hold(config.theorem, config.n, target)) {
    const std::string msg = "required conditions do not all hold";
    if (config.strict) throw ConditionFailed(msg + ":\n" + checks.to_text());
    s.warnings.push_back(msg);
  }

  const CoupledState initial = config.initial.build(basis);
  const std::size_t count = static_cast<std::size_t>(config.ensemble_size);
  s.records.resize(count);
  s.outcomes.resize(count);
  parallel_for(count, config.workers, [&](std::size_t i) {
    TrajectoryOutcome& o = s.outcomes[i];
    o.index = i;
    o.seed = trajectory_seed(config.seed, i);
    IntegratorConfig cfg = config.integrator;
    cfg.seed = o.seed;
    try {
      s.records[i] = run_trajectory(basis, initial, config.controller, config.params, cfg);
    } catch (const IntegrationBlowup& e) {
      o.error = e.what();
      o.failed_at = e.time();
      return;
    } catch (const NumericalError& e) {
      o.error = e.what();
      return;
    }
    const TrajectoryRecord& r = s.records[i];
    o.ok = true;
    o.final_true_target = r.d_true_target.back();
    o.final_filter_target = r.d_filter_target.back();
    o.final_true_filter = r.d_true_filter.back();
    o.final_coupled = o.final_true_target + o.final_filter_target;
    try {
      o.fit = fit_exponent(r.times, coupled_series(r), config.fit_window, FitMode::PerSample);
    } catch (const ValidationError& e) {
      o.fit_error = e.what();
    }
  });
  for (std::size_t i = 0; i < count; ++i) {
    if (s.outcomes[i].ok) s.monitor.merge(s.records[i].monitor);
  }
  s.mean = ensemble_mean(s.records, s.outcomes);
  if (!s.mean.times.empty()) {
    try {
      s.mean_fit = fit_exponent(s.mean.times, s.mean.coupled, config.fit_window,
                                FitMode::EnsembleMean);
    } catch (const ValidationError& e) {
      s.mean_fit_error = e.what();
    }
  }
  s.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (write_files) {
    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    if (config.write_trajectories) {
      for (std::size_t i = 0; i < count; ++i) {
        if (!s.outcomes[i].ok) continue;
        char name[32];
        std::snprintf(name, sizeof(name), "traj_%04zu.csv", i);
        write_file(dir / name, s.records[i].to_csv());
      }
    }
    write_file(dir / "mean.csv", s.mean.to_csv());
    write_file(dir / "summary.json", s.to_json().dump(2) + "\n");
    std::string manifest = "trajectory_index,seed,failed_at,error\n";
    for (const auto& o : s.outcomes) {
      if (o.ok) continue;
      std::string err = o.error;
      for (char& c : err) {
        if (c == ',' || c == '\n') c = ';';
      }
      manifest += std::to_string(o.index) + ',' + std::to_string(o.seed) + ',' +
                  fmt17(o.failed_at) + ',' + err + '\n';
    }
    write_file(dir / "failures.csv", manifest);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "wall_seconds = %.3f\n", s.wall_seconds);
    write_file(dir / "timing.txt", buf);
  }
  if (s.failures() == count) {
    throw NumericalError("every trajectory failed; first error: " + s.outcomes.front().error);
  }
  return s;
}

std::string OracleSuiteResult::to_csv() const {
  std::string out = "state,quantity,closed_form,oracle,se,pass\n";
  for (const auto& c : comparisons) {
    out += std::to_string(c.state) + ',' + c.quantity + ',' + fmt17(c.closed_form) + ',' +
           fmt17(c.oracle) + ',' + fmt17(c.se) + ',' + (c.pass ? "1" : "0") + '\n';
  }
  return out;
}

OracleSuiteResult run_oracle_suite(const SpinBasis& basis, const ControllerSpec& spec,
                                   const SystemParams& params, int states,
                                   long long samples, double dt, std::uint64_t seed,
                                   int workers) {
  spec.validate(basis);
  params.validate();
  if (states < 1) throw DomainError("states must be positive");
  const int n = basis.dim();
  const int target = spec.target;

  std::vector<LyapunovId> tags;
  for (LyapunovTag t : {LyapunovTag::SqrtJoint, LyapunovTag::SqrtSum, LyapunovTag::MixedAsym,
                        LyapunovTag::OffdiagSum, LyapunovTag::MixedInterior}) {
    const LyapunovId id{t, target};
    try {
      id.validate(basis);
      tags.push_back(id);
    } catch (const DomainError&) {
    }
  }

  // Random interior states, drawn sequentially so the set does not depend on
  // the worker count.
  std::vector<CoupledState> picks;
  std::mt19937_64 gen(seed);
  while (static_cast<int>(picks.size()) < states) {
    CoupledState s{random_density(n, n, gen()), random_density(n, n, gen())};
    const RealVector a = s.rho.populations();
    const RealVector b = s.rho_hat.populations();
    if (a.minCoeff() < 1e-3 || b.minCoeff() < 1e-3) continue;
    if (1.0 - a(target) < 1e-3 || 1.0 - b(target) < 1e-3) continue;
    picks.push_back(std::move(s));
  }

  std::vector<std::vector<OracleComparison>> per_state(picks.size());
  parallel_for(picks.size(), workers, [&](std::size_t i) {
    const CoupledState& st = picks[i];
    std::vector<ScalarFunction> phis;
    for (int k = 0; k < n; ++k) {
      phis.emplace_back([k](const CoupledState& x) { return x.rho.population(k); });
    }
    for (int k = 0; k < n; ++k) {
      phis.emplace_back([k](const CoupledState& x) { return x.rho_hat.population(k); });
    }
    for (const LyapunovId& id : tags) {
      phis.emplace_back(
          [&basis, id](const CoupledState& x) { return lyapunov_value(basis, id, x); });
    }
    const std::vector<OracleEstimate> est =
        generator_oracle(basis, phis, st, spec, params, dt, samples,
                         derive_stream_seed(seed ^ 0x0dd5ULL, i));
    const double u = evaluate_control(spec, basis, st.rho_hat.matrix());
    auto& out = per_state[i];
    auto add = [&](const std::string& q, double closed, double oracle, double se) {
      OracleComparison c;
      c.state = static_cast<int>(i);
      c.quantity = q;
      c.closed_form = closed;
      c.oracle = oracle;
      c.se = se;
      c.pass = std::abs(closed - oracle) <= 3.0 * se;
      out.push_back(c);
    };
    for (int k = 0; k < n; ++k) {
      const auto t = generator_population(basis, params, st, k, Component::True, u);
      const auto f = generator_population(basis, params, st, k, Component::Filter, u);
      const auto& et = est[static_cast<std::size_t>(k)];
      const auto& ef = est[static_cast<std::size_t>(n + k)];
      const std::string kk = std::to_string(k);
      add("drift_rho_" + kk, t.drift, et.drift, et.drift_se);
      add("diffusion_rho_" + kk, t.diffusion, et.diffusion, et.diffusion_se);
      add("drift_rhohat_" + kk, f.drift, ef.drift, ef.drift_se);
      add("diffusion_rhohat_" + kk, f.diffusion, ef.diffusion, ef.diffusion_se);
    }
    for (std::size_t j = 0; j < tags.size(); ++j) {
      const auto g = lyapunov_generator(basis, tags[j], st, spec, params);
      const auto& e = est[static_cast<std::size_t>(2 * n) + j];
      add("generator_" + to_string(tags[j].tag), g.drift, e.drift, e.drift_se);
      add("diffusion_" + to_string(tags[j].tag), g.diffusion, e.diffusion, e.diffusion_se);
    }
  });
  OracleSuiteResult r;
  std::size_t passed = 0;
  for (auto& v : per_state) {
    for (auto& c : v) {
      passed += c.pass ? 1 : 0;
      r.comparisons.push_back(std::move(c));
    }
  }
  r.pass_fraction = r.comparisons.empty()
                        ? 0.0
                        : static_cast<double>(passed) / static_cast<double>(r.comparisons.size());
  return r;
}

}  // namespace spinsme
