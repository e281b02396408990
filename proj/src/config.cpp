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

#include "spinsme/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spinsme/errors.hpp"

namespace spinsme {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw DomainError("config key '" + key + "': cannot read '" + value + "' as " + expected);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(out)) {
    bad_value(key, v, "a finite number");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) bad_value(key, v, "an integer");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) bad_value(key, v, "an unsigned integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "a boolean");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) bad_value(key, v, "a comma-separated list");
  return out;
}

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ',';
    out += num(v[k]);
  }
  return out;
}

std::string boolean(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::EigenPair: return "eigen-pair";
    case InitialKind::Diagonal: return "diagonal";
    case InitialKind::MaximallyMixedPair: return "maximally-mixed-pair";
    case InitialKind::Random: return "random";
  }
  return "unknown";
}

InitialKind parse_initial_kind(const std::string& name) {
  for (InitialKind k : {InitialKind::EigenPair, InitialKind::Diagonal,
                        InitialKind::MaximallyMixedPair, InitialKind::Random}) {
    if (to_string(k) == name) return k;
  }
  throw DomainError("unknown initial kind '" + name +
                    "' (expected eigen-pair, diagonal, maximally-mixed-pair or random)");
}

CoupledState InitialSpec::build(const SpinBasis& basis) const {
  switch (kind) {
    case InitialKind::EigenPair:
      return CoupledState{projector(basis, n), projector(basis, m)};
    case InitialKind::Diagonal:
      if (static_cast<int>(diag.size()) != basis.dim() ||
          static_cast<int>(diag_hat.size()) != basis.dim()) {
        throw ShapeError("initial.rho and initial.rho_hat need N=" +
                         std::to_string(basis.dim()) + " entries");
      }
      return CoupledState{DensityMatrix::diagonal(diag), DensityMatrix::diagonal(diag_hat)};
    case InitialKind::MaximallyMixedPair:
      return CoupledState{DensityMatrix::maximally_mixed(basis.dim()),
                          DensityMatrix::maximally_mixed(basis.dim())};
    case InitialKind::Random:
      return CoupledState{random_density(basis.dim(), rank, seed),
                          random_density(basis.dim(), rank, seed + 1)};
  }
  throw DomainError("unknown initial kind");
}

void ExperimentConfig::validate() const {
  const SpinBasis basis = build_basis(n);
  params.validate();
  controller.validate(basis);
  if (controller.kind == ControllerKind::UserSupplied) {
    throw DomainError("controller.variant 'user' is only available through the library API");
  }
  integrator.validate();
  if (ensemble_size < 1) throw DomainError("ensemble.size must be >= 1");
  if (workers < 0) throw DomainError("ensemble.workers must be >= 0");
  if (!(fit_window > 0.0 && fit_window <= 1.0)) {
    throw DomainError("analysis.fit_window must lie in (0,1]");
  }
  if (output_dir.empty()) throw DomainError("output.dir must not be empty");
  initial.build(basis);
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "n") n = static_cast<int>(to_int(key, v));
  else if (key == "seed") seed = to_u64(key, v);
  else if (key == "strict") strict = to_bool(key, v);
  else if (key == "params.omega") params.omega = to_double(key, v);
  else if (key == "params.eta") params.eta = to_double(key, v);
  else if (key == "params.m") params.m = to_double(key, v);
  else if (key == "params.omega_hat") params.omega_hat = to_double(key, v);
  else if (key == "params.eta_hat") params.eta_hat = to_double(key, v);
  else if (key == "params.m_hat") params.m_hat = to_double(key, v);
  else if (key == "controller.variant") controller.kind = parse_controller_kind(v);
  else if (key == "controller.alpha") controller.alpha = to_double(key, v);
  else if (key == "controller.beta") controller.beta = to_double(key, v);
  else if (key == "controller.target") controller.target = static_cast<int>(to_int(key, v));
  else if (key == "controller.eps1") controller.eps1 = to_double(key, v);
  else if (key == "controller.eps2") controller.eps2 = to_double(key, v);
  else if (key == "controller.allow_unvalidated_beta") controller.allow_unvalidated_beta = to_bool(key, v);
  else if (key == "initial.kind") initial.kind = parse_initial_kind(v);
  else if (key == "initial.n") initial.n = static_cast<int>(to_int(key, v));
  else if (key == "initial.m") initial.m = static_cast<int>(to_int(key, v));
  else if (key == "initial.rho") initial.diag = to_list(key, v);
  else if (key == "initial.rho_hat") initial.diag_hat = to_list(key, v);
  else if (key == "initial.rank") initial.rank = static_cast<int>(to_int(key, v));
  else if (key == "initial.seed") initial.seed = to_u64(key, v);
  else if (key == "integrator.dt") integrator.dt = to_double(key, v);
  else if (key == "integrator.t_end") integrator.t_end = to_double(key, v);
  else if (key == "integrator.record_stride") integrator.record_stride = static_cast<int>(to_int(key, v));
  else if (key == "integrator.renormalize") integrator.renormalize = to_bool(key, v);
  else if (key == "integrator.psd_projection") integrator.psd_projection = to_bool(key, v);
  else if (key == "integrator.scheme") integrator.scheme = parse_scheme(v);
  else if (key == "integrator.driving_mode") integrator.driving_mode = parse_driving_mode(v);
  else if (key == "ensemble.size") ensemble_size = static_cast<int>(to_int(key, v));
  else if (key == "ensemble.workers") workers = static_cast<int>(to_int(key, v));
  else if (key == "analysis.fit_window") fit_window = to_double(key, v);
  else if (key == "analysis.theorem") theorem = parse_theorem_id(v);
  else if (key == "output.dir") output_dir = v;
  else if (key == "output.trajectories") write_trajectories = to_bool(key, v);
  else throw DomainError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> e = {
      {"n", std::to_string(n)},
      {"params.omega", num(params.omega)},
      {"params.eta", num(params.eta)},
      {"params.m", num(params.m)},
      {"params.omega_hat", num(params.omega_hat)},
      {"params.eta_hat", num(params.eta_hat)},
      {"params.m_hat", num(params.m_hat)},
      {"controller.variant", to_string(controller.kind)},
      {"controller.alpha", num(controller.alpha)},
      {"controller.beta", num(controller.beta)},
      {"controller.target", std::to_string(controller.target)},
      {"controller.eps1", num(controller.eps1)},
      {"controller.eps2", num(controller.eps2)},
      {"controller.allow_unvalidated_beta", boolean(controller.allow_unvalidated_beta)},
      {"initial.kind", to_string(initial.kind)},
  };
  switch (initial.kind) {
    case InitialKind::EigenPair:
      e.emplace_back("initial.n", std::to_string(initial.n));
      e.emplace_back("initial.m", std::to_string(initial.m));
      break;
    case InitialKind::Diagonal:
      e.emplace_back("initial.rho", list(initial.diag));
      e.emplace_back("initial.rho_hat", list(initial.diag_hat));
      break;
    case InitialKind::MaximallyMixedPair:
      break;
    case InitialKind::Random:
      e.emplace_back("initial.rank", std::to_string(initial.rank));
      e.emplace_back("initial.seed", std::to_string(initial.seed));
      break;
  }
  const std::vector<std::pair<std::string, std::string>> tail = {
      {"integrator.dt", num(integrator.dt)},
      {"integrator.t_end", num(integrator.t_end)},
      {"integrator.record_stride", std::to_string(integrator.record_stride)},
      {"integrator.renormalize", boolean(integrator.renormalize)},
      {"integrator.psd_projection", boolean(integrator.psd_projection)},
      {"integrator.driving_mode", to_string(integrator.driving_mode)},
      {"integrator.scheme", to_string(integrator.scheme)},
      {"ensemble.size", std::to_string(ensemble_size)},
      {"seed", std::to_string(seed)},
      {"analysis.fit_window", num(fit_window)},
      {"analysis.theorem", to_string(theorem)},
      {"output.dir", output_dir},
      {"output.trajectories", boolean(write_trajectories)},
      {"strict", boolean(strict)},
  };
  e.insert(e.end(), tail.begin(), tail.end());
  return e;
}

std::string ExperimentConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries()) out += k + " = " + v + "\n";
  return out;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DomainError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.n = 3;
  cfg.params = SystemParams::reference();
  cfg.integrator.dt = 1e-4;
  cfg.integrator.t_end = 10.0;
  cfg.integrator.record_stride = 100;
  cfg.ensemble_size = 10;
  if (name == "fig1") {
    cfg.controller = ControllerSpec::boundary(0, 5.0, 2.0);
    cfg.initial.kind = InitialKind::EigenPair;
    cfg.initial.n = 2;
    cfg.initial.m = 1;
    cfg.output_dir = "out/fig1";
  } else if (name == "fig2") {
    cfg.controller = ControllerSpec::interior(1, 5.0, 2.0, 0.1, 0.3);
    cfg.initial.kind = InitialKind::Diagonal;
    cfg.initial.diag = {0.2, 0.2, 0.6};
    cfg.initial.diag_hat = {0.3, 0.3, 0.4};
    cfg.output_dir = "out/fig2";
  } else {
    throw DomainError("unknown preset '" + name + "' (expected fig1 or fig2)");
  }
  return cfg;
}

}  // namespace spinsme
