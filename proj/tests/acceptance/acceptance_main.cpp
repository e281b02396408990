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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Thresholds are fixed; do not tune them
// to the observed values.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "spinsme/analysis.hpp"
#include "spinsme/config.hpp"
#include "spinsme/experiment.hpp"
#include "spinsme/feedback.hpp"
#include "spinsme/integrator.hpp"
#include "spinsme/spin_basis.hpp"
#include "spinsme/state.hpp"

namespace {

namespace fs = std::filesystem;
using namespace spinsme;

constexpr std::uint64_t kSeed = 42;
constexpr int kWorkers = 0;  // hardware concurrency

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

// Monitors of every stochastic run below; checked by the invariants line.
InvariantMonitor g_monitor;

EnsembleSummary figure_ensemble(const std::string& preset) {
  ExperimentConfig c = ExperimentConfig::preset(preset);
  c.ensemble_size = 100;
  c.seed = kSeed;
  c.workers = kWorkers;
  const EnsembleSummary s = run_experiment(c, false);
  g_monitor.merge(s.monitor);
  return s;
}

Outcome constants() {
  const SystemParams p = SystemParams::reference();
  const ExponentBounds b0 = exponent_bounds(3, p, 0);
  const ExponentBounds b1 = exponent_bounds(3, p, 1);
  Outcome o;
  o.pass = round4(b0.nu_av) == -0.0761 && round4(b0.nu_s) == -0.3561 &&
           round4(b1.nu_s) == -0.28;
  o.detail = "nu_av(0) = " + fmt("%.4f", b0.nu_av) + ", nu_s(0) = " + fmt("%.4f", b0.nu_s) +
             ", nu_s(1) = " + fmt("%.4f", b1.nu_s);
  return o;
}

Outcome condition_window() {
  SystemParams p = SystemParams::reference();
  const ConditionReport ok = check_parameter_conditions(3, p, 0);
  p.m_hat = 4.0 * p.eta * p.m / p.eta_hat;
  const ConditionReport bad = check_parameter_conditions(3, p, 0);
  const std::string text = ok.to_text();
  const bool shows = text.find("boundary_window: 0.8 < 1.15728 < 1.20711 PASS") != std::string::npos;
  Outcome o;
  o.pass = shows && ok.holds("boundary_window") && !bad.holds("boundary_window");
  o.detail = "reference " + std::string(ok.holds("boundary_window") ? "PASS" : "FAIL") +
             ", eta^M^ = 4 eta M gives ratio " + fmt("%.5g", bad.at("boundary_window").chain[1]) +
             " " + (bad.holds("boundary_window") ? "PASS" : "FAIL");
  return o;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome figure1(const EnsembleSummary& s) {
  const double mean_final = s.mean.coupled.back();
  const double slope = s.mean_fit ? s.mean_fit->slope : NAN;
  std::vector<double> slopes;
  for (const auto& t : s.outcomes) {
    if (t.ok && t.fit) slopes.push_back(t.fit->slope);
  }
  const double med = slopes.empty() ? NAN : median(slopes);
  const bool a = mean_final < 0.05;
  const bool b = slope <= -0.05;
  const bool c = med <= -0.25;
  Outcome o;
  o.pass = a && b && c && s.failures() == 0;
  o.detail = std::string("(a) mean d_B(t=10) = ") + fmt("%.4f", mean_final) + " (se " +
             fmt("%.4f", s.mean.coupled_se.back()) + ") < 0.05 " + (a ? "ok" : "MISS") +
             "; (b) mean slope = " + fmt("%.4f", slope) + " <= -0.05 " + (b ? "ok" : "MISS") +
             "; (c) median sample slope = " + fmt("%.4f", med) + " <= -0.25 " +
             (c ? "ok" : "MISS") + "; d_B(rho,rho_0) = " + fmt("%.4f", s.mean.true_target.back()) +
             "; failures " + std::to_string(s.failures());
  return o;
}

Outcome figure2(const EnsembleSummary& s) {
  const double mean_final = s.mean.coupled.back();
  const double slope = s.mean_fit ? s.mean_fit->slope : NAN;
  const bool a = mean_final < 0.1;
  const bool b = slope <= -0.2;
  Outcome o;
  o.pass = a && b && s.failures() == 0;
  o.detail = std::string("mean d_B(t=10) = ") + fmt("%.4f", mean_final) + " (se " +
             fmt("%.4f", s.mean.coupled_se.back()) + ") < 0.1 " + (a ? "ok" : "MISS") +
             "; mean slope = " + fmt("%.4f", slope) + " <= -0.2 " + (b ? "ok" : "MISS") +
             "; failures " + std::to_string(s.failures());
  return o;
}

Outcome filter_stability(const EnsembleSummary& f1, const EnsembleSummary& f2) {
  const double a = f1.mean.true_filter.back();
  const double b = f2.mean.true_filter.back();
  Outcome o;
  o.pass = a < 0.05 && b < 0.05;
  o.detail = "mean d_B(rho, rho^) at t=10: boundary " + fmt("%.4f", a) + ", interior " +
             fmt("%.4f", b) + " (threshold 0.05)";
  return o;
}

Outcome oracle_suite() {
  const SpinBasis b = build_basis(3);
  const OracleSuiteResult r = run_oracle_suite(b, ControllerSpec::boundary(0, 5.0, 2.0),
                                               SystemParams::reference(), 50, 100000, 1e-5,
                                               kSeed, kWorkers);
  std::size_t pass = 0;
  for (const auto& c : r.comparisons) pass += c.pass ? 1 : 0;
  Outcome o;
  o.pass = r.pass_fraction >= 0.95;
  o.detail = std::to_string(pass) + "/" + std::to_string(r.comparisons.size()) +
             " comparisons within 3 SE (" + fmt("%.4f", r.pass_fraction) + " >= 0.95)";
  return o;
}

Outcome martingale() {
  const SpinBasis b = build_basis(3);
  const CoupledState start{random_density(3, 3, 2024), random_density(3, 3, 2025)};
  const double jz0 = expect_jz(b, start.rho.matrix());
  IntegratorConfig c;
  c.dt = 1e-4;
  c.t_end = 5.0;
  c.record_stride = 5000;
  const int n = 500;
  std::vector<TrajectoryRecord> recs(n);
  parallel_for(n, kWorkers, [&](std::size_t i) {
    IntegratorConfig ci = c;
    ci.seed = derive_stream_seed(kSeed, i);
    recs[i] = run_trajectory(b, start, ControllerSpec::zero(0), SystemParams::reference(), ci);
  });
  for (const auto& r : recs) g_monitor.merge(r.monitor);
  int ok = 0;
  double worst = 0.0;
  const std::size_t points = recs[0].size();
  for (std::size_t k = 1; k < points; ++k) {
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& r : recs) {
      sum += r.jz_mean[k];
      sq += r.jz_mean[k] * r.jz_mean[k];
    }
    const double mean = sum / n;
    const double var = (sq - n * mean * mean) / (n - 1);
    const double se = std::sqrt(std::max(var, 0.0) / n);
    const double z = std::abs(mean - jz0) / se;
    worst = std::max(worst, z);
    ok += z <= 3.0 ? 1 : 0;
  }
  Outcome o;
  o.pass = points == 11 && ok == 10;
  o.detail = std::to_string(ok) + "/" + std::to_string(points - 1) +
             " checkpoints within 3 SE, worst |z| = " + fmt("%.3f", worst);
  return o;
}

Outcome pathwise() {
  const SpinBasis b = build_basis(3);
  const ExperimentConfig f2 = ExperimentConfig::preset("fig2");
  const CoupledState start = f2.initial.build(b);
  IntegratorConfig c;
  c.dt = 1e-4;
  c.t_end = 1.0;  // 10^4 steps
  c.record_stride = 1;
  c.seed = kSeed;
  const TrajectoryRecord a = run_trajectory(b, start, f2.controller, f2.params, c);
  c.driving_mode = DrivingMode::ObservationDriven;
  const TrajectoryRecord d = run_trajectory(b, start, f2.controller, f2.params, c);
  g_monitor.merge(a.monitor);
  g_monitor.merge(d.monitor);
  double sup = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sup = std::max(sup, (a.populations[k] - d.populations[k]).cwiseAbs().maxCoeff());
    sup = std::max(sup, (a.populations_hat[k] - d.populations_hat[k]).cwiseAbs().maxCoeff());
  }
  sup = std::max(sup, (a.final_state.rho.matrix() - d.final_state.rho.matrix()).cwiseAbs().maxCoeff());
  sup = std::max(
      sup, (a.final_state.rho_hat.matrix() - d.final_state.rho_hat.matrix()).cwiseAbs().maxCoeff());
  Outcome o;
  o.pass = a.monitor.steps == 10000 && sup <= 1e-10;
  o.detail = std::to_string(a.monitor.steps) + " steps, sup-norm difference " + fmt("%.3g", sup);
  return o;
}

Outcome instability_probe() {
  const SpinBasis b = build_basis(3);
  ProbeOptions opt;
  opt.config.dt = 1e-4;
  opt.config.t_end = 10.0;
  opt.n_traj = 200;
  opt.master_seed = kSeed;
  opt.workers = kWorkers;
  const ProbeResult r = exit_time_probe(b, 2, 0.2, 0.05, ControllerSpec::boundary(0, 5.0, 2.0),
                                        SystemParams::reference(), opt);
  g_monitor.merge(r.monitor);
  Outcome o;
  o.pass = r.count() == 200 && r.fraction == 1.0;
  o.detail = fmt("%.3f", r.fraction) + " of 200 exited by t=10 (median exit " +
             fmt("%.3f", r.q50) + ", q90 " + fmt("%.3f", r.q90) + ")";
  return o;
}

Outcome invariants() {
  const InvariantMonitor& m = g_monitor;
  Outcome o;
  o.pass = m.steps > 0 && m.max_trace_defect <= 1e-9 && m.max_herm_defect <= 1e-9 &&
           m.min_eigenvalue >= -1e-6;
  o.detail = "over " + std::to_string(m.steps) + " steps: trace defect " +
             fmt("%.3g", m.max_trace_defect) + ", Hermiticity defect " +
             fmt("%.3g", m.max_herm_defect) + ", min eigenvalue " + fmt("%.3g", m.min_eigenvalue);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SPINSME_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "spinsme_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::pair<std::string, int>> runs = {{"w1a", 1}, {"w1b", 1}, {"w4", 4}};
  for (const auto& [dir, workers] : runs) {
    const int code = run_cli("ensemble --preset fig1 --seed 42 --workers " +
                             std::to_string(workers) + " --out " + (root / dir).string());
    if (code != 0) return {false, "ensemble run '" + dir + "' exited with " + std::to_string(code)};
  }
  std::size_t files = 0;
  std::size_t differing = 0;
  for (const auto& entry : fs::directory_iterator(root / "w1a")) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    const std::string name = entry.path().filename().string();
    const std::string ref = slurp(entry.path());
    for (const char* other : {"w1b", "w4"}) {
      if (!fs::exists(root / other / name) || slurp(root / other / name) != ref) ++differing;
    }
  }
  Outcome o;
  o.pass = files >= 12 && differing == 0;
  o.detail = std::to_string(files) + " CSV files compared across 3 runs (workers 1, 1, 4), " +
             std::to_string(differing) + " mismatches";
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  int total = 0;
  const auto report = [&](const std::string& name, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++total;
    failures += o.pass ? 0 : 1;
    std::printf("%s %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
  };

  report("constant_reproduction", constants);
  report("condition_window", condition_window);

  EnsembleSummary fig1;
  EnsembleSummary fig2;
  bool have1 = false;
  bool have2 = false;
  report("figure1_replication", [&] {
    fig1 = figure_ensemble("fig1");
    have1 = true;
    return figure1(fig1);
  });
  report("figure2_replication", [&] {
    fig2 = figure_ensemble("fig2");
    have2 = true;
    return figure2(fig2);
  });
  report("generator_oracle_suite", oracle_suite);
  report("martingale_open_loop", martingale);
  report("pathwise_mode_equivalence", pathwise);
  report("instability_probe", instability_probe);
  report("filter_stability", [&] {
    if (!have1 || !have2) return Outcome{false, "figure ensembles unavailable"};
    return filter_stability(fig1, fig2);
  });
  report("determinism", determinism);
  report("structural_invariants", invariants);

  std::printf("acceptance: %d/%d PASS\n", total - failures, total);
  return failures == 0 ? 0 : 1;
}
