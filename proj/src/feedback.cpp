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

#include "spinsme/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "spinsme/errors.hpp"

namespace spinsme {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

bool is_integer(double x) { return std::floor(x) == x; }

// x^beta, odd-extended for non-integer beta so the law stays real.
double signed_power(double x, double beta) {
  if (is_integer(beta)) return std::pow(x, beta);
  return std::copysign(std::pow(std::abs(x), beta), x);
}

// Entry for chain[0] rel chain[1] rel ... ; rel is "<" or ">".
ConditionEntry chain_entry(std::string name, std::string relation,
                           std::vector<double> chain, std::string detail = {}) {
  ConditionEntry e;
  e.name = std::move(name);
  e.relation = std::move(relation);
  e.chain = std::move(chain);
  e.method = "exact";
  e.detail = std::move(detail);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < e.chain.size(); ++k) {
    const double gap = e.relation == "<" ? e.chain[k + 1] - e.chain[k]
                                         : e.chain[k] - e.chain[k + 1];
    margin = std::min(margin, gap);
  }
  e.margin = margin;
  e.verdict = margin > 0.0 ? Verdict::Pass : Verdict::Fail;
  return e;
}

ConditionEntry flag_entry(std::string name, bool ok, std::string method,
                          std::string detail) {
  ConditionEntry e;
  e.name = std::move(name);
  e.verdict = ok ? Verdict::Pass : Verdict::Fail;
  e.method = std::move(method);
  e.detail = std::move(detail);
  return e;
}

// (1 - d^2/2)^2: target population of a state at Bures distance d from rho_n.
double population_at_distance(double d) {
  const double s = 1.0 - 0.5 * d * d;
  return s * s;
}

// Mixes a random full-rank state with rho_n so that the mixture sits at Bures
// distance d from rho_n.
Matrix state_near_target(const SpinBasis& basis, int target, double d,
                         std::uint64_t seed) {
  const Matrix sigma = random_density(basis.dim(), basis.dim(), seed).matrix();
  const double want = population_at_distance(d);
  const double s_pop = sigma(target, target).real();
  // w * 1 + (1 - w) * s_pop = want
  const double w = std::clamp((want - s_pop) / (1.0 - s_pop), 0.0, 1.0);
  Matrix rho = (1.0 - w) * sigma;
  rho(target, target) += w;
  return rho;
}

double cutoff_radius(double eps1) { return std::sqrt(2.0 - 2.0 * std::sqrt(1.0 - eps1)); }

// Largest |n - target| over levels: |P_target(rho)| <= l (1 - rho_nn).
double level_span(const SpinBasis& basis, int target) {
  return std::max(target, basis.max_index() - target);
}

}  // namespace

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Zero: return "zero";
    case ControllerKind::BoundaryLaw: return "boundary";
    case ControllerKind::InteriorLaw: return "interior";
    case ControllerKind::UserSupplied: return "user";
  }
  return "unknown";
}

ControllerKind parse_controller_kind(const std::string& name) {
  if (name == "zero") return ControllerKind::Zero;
  if (name == "boundary") return ControllerKind::BoundaryLaw;
  if (name == "interior") return ControllerKind::InteriorLaw;
  if (name == "user") return ControllerKind::UserSupplied;
  throw DomainError("unknown controller variant '" + name +
                    "' (expected zero, boundary, interior or user)");
}

void ControllerSpec::validate(const SpinBasis& basis) const {
  if (!basis.valid_index(target)) {
    throw DomainError("controller target " + std::to_string(target) + " outside 0.." +
                      std::to_string(basis.max_index()));
  }
  if (kind == ControllerKind::Zero) return;
  if (kind == ControllerKind::UserSupplied) {
    if (!user) throw DomainError("user controller has no function");
    return;
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be positive");
  if (!(beta > 0.5) || !std::isfinite(beta)) {
    throw DomainError("beta must exceed 1/2 (got " + fmt(beta) + ")");
  }
  if (beta < 1.0 && !allow_unvalidated_beta) {
    throw DomainError("beta in (1/2, 1) requires allow_unvalidated_beta (got " +
                      fmt(beta) + ")");
  }
  if (kind == ControllerKind::InteriorLaw) {
    if (!(eps1 > 0.0 && eps1 < eps2 && eps2 < 1.0)) {
      throw DomainError("cutoff seams need 0 < eps1 < eps2 < 1");
    }
  }
}

ControllerSpec ControllerSpec::zero(int target) {
  ControllerSpec s;
  s.kind = ControllerKind::Zero;
  s.target = target;
  return s;
}

ControllerSpec ControllerSpec::boundary(int target, double alpha, double beta) {
  ControllerSpec s;
  s.kind = ControllerKind::BoundaryLaw;
  s.target = target;
  s.alpha = alpha;
  s.beta = beta;
  return s;
}

ControllerSpec ControllerSpec::interior(int target, double alpha, double beta,
                                        double eps1, double eps2) {
  ControllerSpec s;
  s.kind = ControllerKind::InteriorLaw;
  s.target = target;
  s.alpha = alpha;
  s.beta = beta;
  s.eps1 = eps1;
  s.eps2 = eps2;
  return s;
}

ControllerSpec ControllerSpec::user_supplied(int target, ControlFunction fn) {
  ControllerSpec s;
  s.kind = ControllerKind::UserSupplied;
  s.target = target;
  s.user = std::move(fn);
  return s;
}

double smooth_cutoff(double x, double eps1, double eps2) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("cutoff argument " + fmt(x) + " outside [0,1]");
  }
  if (x < eps1) return 0.0;
  if (x > eps2) return 1.0;
  const double phase =
      std::numbers::pi * (2.0 * x - eps1 - eps2) / (2.0 * (eps2 - eps1));
  return 0.5 * std::sin(phase) + 0.5;
}

double evaluate_control(const ControllerSpec& spec, const SpinBasis& basis,
                        const Matrix& rho_hat) {
  const int n = spec.target;
  switch (spec.kind) {
    case ControllerKind::Zero:
      return 0.0;
    case ControllerKind::BoundaryLaw: {
      const double gap = std::max(0.0, 1.0 - rho_hat(n, n).real());
      return spec.alpha * std::pow(gap, spec.beta);
    }
    case ControllerKind::InteriorLaw: {
      const double gap = std::clamp(1.0 - rho_hat(n, n).real(), 0.0, 1.0);
      const double f = smooth_cutoff(gap, spec.eps1, spec.eps2);
      if (f == 0.0) return 0.0;
      return spec.alpha * signed_power(p_offset(basis, rho_hat, n), spec.beta) * f;
    }
    case ControllerKind::UserSupplied:
      return spec.user(basis, rho_hat);
  }
  return 0.0;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::NotFalsified: return "NOT_FALSIFIED";
    case Verdict::Falsified: return "FALSIFIED";
  }
  return "UNKNOWN";
}

const ConditionEntry& ConditionReport::at(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw DomainError("no condition named '" + name + "' in report '" + title + "'");
}

bool ConditionReport::has(const std::string& name) const {
  return std::any_of(entries.begin(), entries.end(),
                     [&](const ConditionEntry& e) { return e.name == name; });
}

bool ConditionReport::all_hold() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const ConditionEntry& e) { return e.holds(); });
}

std::string ConditionReport::to_text() const {
  std::ostringstream os;
  os << "report: " << title << "\n";
  for (const auto& [k, v] : constants) os << "const." << k << ": " << fmt(v) << "\n";
  for (const auto& e : entries) {
    os << e.name << ": ";
    if (!e.chain.empty()) {
      for (std::size_t k = 0; k < e.chain.size(); ++k) {
        if (k > 0) os << " " << e.relation << " ";
        os << fmt(e.chain[k]);
      }
      os << " ";
    }
    os << to_string(e.verdict);
    if (!e.chain.empty()) os << " (margin " << fmt(e.margin) << ")";
    os << " [" << e.method << "]";
    if (!e.detail.empty()) os << " " << e.detail;
    os << "\n";
  }
  return os.str();
}

nlohmann::ordered_json ConditionReport::to_json() const {
  nlohmann::ordered_json j;
  j["title"] = title;
  j["constants"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : constants) j["constants"][k] = v;
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json je;
    je["name"] = e.name;
    je["verdict"] = to_string(e.verdict);
    je["holds"] = e.holds();
    je["method"] = e.method;
    if (!e.chain.empty()) {
      je["relation"] = e.relation;
      je["chain"] = e.chain;
      je["margin"] = e.margin;
    }
    if (!e.detail.empty()) je["detail"] = e.detail;
    j["entries"].push_back(std::move(je));
  }
  return j;
}

// ---------------------------------------------------------------------------

ConditionReport check_hypotheses(const ControllerSpec& spec, const SpinBasis& basis,
                                 int sample_count, std::uint64_t seed) {
  spec.validate(basis);
  if (sample_count < 1) throw DomainError("sample_count must be positive");
  const int n = spec.target;
  ConditionReport rep;
  rep.title = "hypotheses(" + to_string(spec.kind) + ", target=" + std::to_string(n) + ")";

  // H0: u vanishes at the target and nowhere else among the eigenstates.
  {
    bool ok = true;
    std::ostringstream detail;
    for (int k = 0; k <= basis.max_index(); ++k) {
      const double u = evaluate_control(spec, basis, projector(basis, k).matrix());
      detail << (k ? " " : "") << "u(rho_" << k << ")=" << fmt(u);
      if (k == n ? u != 0.0 : u == 0.0) ok = false;
    }
    rep.entries.push_back(flag_entry("H0", ok, "exact", detail.str()));
  }

  const double span = level_span(basis, n);
  switch (spec.kind) {
    case ControllerKind::Zero:
      rep.entries.push_back(flag_entry("H1", true, "analytic", "u = 0"));
      rep.entries.push_back(flag_entry("H2", true, "analytic", "u = 0 everywhere"));
      break;
    case ControllerKind::BoundaryLaw:
      rep.constants["h1_c"] = spec.alpha;
      rep.constants["h1_m"] = spec.beta;
      rep.entries.push_back(flag_entry("H1", true, "analytic",
                                       "|u| <= alpha (1 - rho_nn)^beta"));
      rep.entries.push_back(flag_entry("H2", false, "analytic",
                                       "u > 0 whenever rho_nn < 1"));
      break;
    case ControllerKind::InteriorLaw:
      // |P_n(rho)| <= span (1 - rho_nn) and f <= 1.
      rep.constants["h1_c"] = spec.alpha * std::pow(span, spec.beta);
      rep.constants["h1_m"] = spec.beta;
      rep.constants["h2_xi"] = cutoff_radius(spec.eps1);
      rep.entries.push_back(flag_entry("H1", true, "analytic",
                                       "|u| <= alpha span^beta (1 - rho_nn)^beta"));
      rep.entries.push_back(flag_entry(
          "H2", true, "analytic",
          "u = 0 on the Bures ball of radius sqrt(2 - 2 sqrt(1 - eps1))"));
      break;
    case ControllerKind::UserSupplied: {
      std::mt19937_64 gen(seed);
      // H1: local power estimated along random directions from two radii.
      const int directions = std::max(1, sample_count / 2);
      double min_slope = std::numeric_limits<double>::infinity();
      double c_est = 0.0;
      int nonzero = 0;
      for (int k = 0; k < directions; ++k) {
        const Matrix sigma = random_density(basis.dim(), basis.dim(), gen()).matrix();
        Matrix target = projector(basis, n).matrix();
        double gaps[2];
        double us[2];
        const double mix[2] = {1e-2, 1e-4};
        for (int s = 0; s < 2; ++s) {
          const Matrix rho = (1.0 - mix[s]) * target + mix[s] * sigma;
          gaps[s] = 1.0 - rho(n, n).real();
          us[s] = std::abs(evaluate_control(spec, basis, rho));
        }
        if (us[0] == 0.0 && us[1] == 0.0) continue;
        ++nonzero;
        if (us[1] == 0.0 || us[0] == 0.0) continue;
        const double slope =
            (std::log(us[1]) - std::log(us[0])) / (std::log(gaps[1]) - std::log(gaps[0]));
        min_slope = std::min(min_slope, slope);
        c_est = std::max(c_est, us[0] / std::pow(gaps[0], std::max(slope, 0.5)));
      }
      ConditionEntry h1;
      h1.name = "H1";
      h1.method = "sampled(" + std::to_string(directions) + ")";
      if (nonzero == 0 || !std::isfinite(min_slope)) {
        h1.verdict = Verdict::NotFalsified;
        h1.detail = "u vanished at every sampled point near the target";
      } else {
        rep.constants["h1_m_estimate"] = min_slope;
        rep.constants["h1_c_estimate"] = c_est;
        h1.verdict = min_slope > 0.5 ? Verdict::NotFalsified : Verdict::Falsified;
        h1.detail = "smallest local power " + fmt(min_slope);
      }
      rep.entries.push_back(h1);

      // H2: largest probed radius on which u vanished at every sample.
      const double radii[] = {0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.001};
      const int per_radius = std::max(1, (sample_count - directions) / 8);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      double xi = 0.0;
      for (double r : radii) {
        bool all_zero = true;
        for (int k = 0; k < per_radius && all_zero; ++k) {
          const Matrix rho = state_near_target(basis, n, r * unit(gen), gen());
          if (evaluate_control(spec, basis, rho) != 0.0) all_zero = false;
        }
        if (all_zero) {
          xi = r;
          break;
        }
      }
      ConditionEntry h2;
      h2.name = "H2";
      h2.method = "sampled(" + std::to_string(per_radius) + " per radius)";
      if (xi > 0.0) {
        rep.constants["h2_xi_estimate"] = xi;
        h2.verdict = Verdict::NotFalsified;
        h2.detail = "u = 0 at every sample within radius " + fmt(xi);
      } else {
        h2.verdict = Verdict::Falsified;
        h2.detail = "u != 0 at some sample within every probed radius down to 0.001";
      }
      rep.entries.push_back(h2);
      break;
    }
  }
  return rep;
}

ConditionReport check_parameter_conditions(int n, const SystemParams& params, int target) {
  if (n < 2) throw InvalidDimension("N must be at least 2");
  params.validate();
  if (target < 0 || target > n - 1) {
    throw DomainError("target " + std::to_string(target) + " outside 0.." +
                      std::to_string(n - 1));
  }
  const double a = params.sqrt_eta_m();
  const double b = params.sqrt_eta_m_hat();
  const double nn = n;
  const double j = 0.5 * (n - 1);
  const bool boundary = target == 0 || target == n - 1;

  ConditionReport rep;
  rep.title = "parameter conditions(N=" + std::to_string(n) +
              ", target=" + std::to_string(target) + ")";
  rep.constants["sqrt_eta_m"] = a;
  rep.constants["sqrt_eta_m_hat"] = b;
  rep.constants["ratio"] = b / a;
  const double mismatch = std::abs(a - b);
  const double kbar = std::min(a * a, b * b);
  rep.constants["K_bar"] = kbar;
  rep.constants["C_bar"] = std::min(0.5 * a * a, 0.5 * b * b - (nn - 1) * b * mismatch);

  rep.entries.push_back(chain_entry("boundary_instability", ">",
                                    {(nn - 2) * b, (nn - 3) * a},
                                    "other eigenstates unstable for a boundary target"));
  rep.entries.push_back(chain_entry("interior_instability", ">",
                                    {(nn - 1) * a, (nn - 2) * b, (nn - 3) * a},
                                    "other eigenstates unstable for an interior target"));
  rep.entries.push_back(chain_entry("reachability_true", ">",
                                    {(nn - 1) * a, (nn - 3) * b}));
  rep.entries.push_back(chain_entry("reachability_filter", ">",
                                    {(nn - 1) * b, (nn - 3) * a}));
  const double window_hi = 0.5 + 0.5 * std::sqrt((nn + 1) / (nn - 1));
  rep.entries.push_back(chain_entry("boundary_window", "<",
                                    {(2 * nn - 2) / (2 * nn - 1), b / a, window_hi},
                                    "sqrt(eta^M^/etaM) window"));
  rep.entries.push_back(chain_entry("boundary_window_extended", "<",
                                    {(2 * nn - 2) / (2 * nn - 1), b / a,
                                     (2 * nn - 2) / (2 * nn - 3)}));

  if (!boundary) {
    const double l = 4.0 * std::abs(j - target) * std::max<double>(target, n - 1 - target);
    rep.constants["L_target"] = l;
    rep.constants["C_target"] = std::min(0.5 * a * a, 0.5 * b * b - 0.5 * b * l * mismatch);
    if (2 * target == n - 1) {
      rep.entries.push_back(chain_entry("interior_window", ">",
                                        {(nn - 1) * a, (nn - 2) * b, (nn - 3) * a},
                                        "centre level"));
    } else {
      rep.entries.push_back(chain_entry("interior_window", ">",
                                        {l / (l - 1) * a, b, l / (l + 1) * a}));
    }
  }

  const bool bw = boundary && rep.holds("boundary_window") &&
                  rep.holds("boundary_instability");
  const bool bx = boundary && rep.holds("boundary_window_extended") &&
                  rep.holds("boundary_instability");
  const bool iw = !boundary && rep.holds("interior_window");
  rep.entries.push_back(flag_entry("eligible_boundary_window", bw, "derived",
                                   boundary ? "" : "target is not a boundary level"));
  rep.entries.push_back(flag_entry("eligible_boundary_extended", bx, "derived",
                                   boundary ? "" : "target is not a boundary level"));
  rep.entries.push_back(flag_entry("eligible_interior", iw, "derived",
                                   boundary ? "target is a boundary level" : ""));
  return rep;
}

std::string to_string(TheoremId id) {
  switch (id) {
    case TheoremId::Auto: return "auto";
    case TheoremId::BoundaryWindow: return "boundary";
    case TheoremId::BoundaryExtended: return "boundary-extended";
    case TheoremId::Interior: return "interior";
  }
  return "unknown";
}

TheoremId parse_theorem_id(const std::string& name) {
  if (name == "auto") return TheoremId::Auto;
  if (name == "boundary") return TheoremId::BoundaryWindow;
  if (name == "boundary-extended") return TheoremId::BoundaryExtended;
  if (name == "interior") return TheoremId::Interior;
  throw DomainError("unknown theorem id '" + name +
                    "' (expected auto, boundary, boundary-extended or interior)");
}

ExponentBounds exponent_bounds(int n, const SystemParams& params, int target,
                               TheoremId theorem) {
  const ConditionReport rep = check_parameter_conditions(n, params, target);
  const bool boundary = target == 0 || target == n - 1;
  if (theorem == TheoremId::Auto) {
    theorem = boundary ? TheoremId::BoundaryWindow : TheoremId::Interior;
  }
  auto require = [&](const std::string& flag) {
    if (rep.holds(flag)) return;
    std::ostringstream os;
    os << "conditions for '" << to_string(theorem) << "' do not hold:\n" << rep.to_text();
    throw ConditionFailed(os.str());
  };

  const double a = params.sqrt_eta_m();
  const double b = params.sqrt_eta_m_hat();
  const double mismatch = std::abs(a - b);
  const double kbar = std::min(a * a, b * b);
  ExponentBounds out;
  out.theorem = theorem;
  out.constants = rep.constants;
  switch (theorem) {
    case TheoremId::BoundaryWindow: {
      require("eligible_boundary_window");
      const double c = 0.5 * kbar - (n - 1) * b * mismatch;
      out.nu_av = -c;
      out.nu_s = -c - 0.5 * kbar;
      out.nu_s_statement = -kbar - (n - 1) * b * mismatch;
      out.constants["C"] = c;
      break;
    }
    case TheoremId::BoundaryExtended: {
      require("eligible_boundary_extended");
      const double c = rep.constants.at("C_bar");
      out.nu_av = -c;
      out.nu_s = -c - 0.5 * kbar;
      out.nu_s_statement = out.nu_s;
      break;
    }
    case TheoremId::Interior: {
      if (boundary) throw ConditionFailed("interior theorem needs 1 <= target <= N-2");
      require("eligible_interior");
      const double c = rep.constants.at("C_target");
      out.nu_av = -c;
      out.nu_s = -c;
      out.nu_s_statement = -c;
      break;
    }
    case TheoremId::Auto:
      break;
  }
  return out;
}

Matrix sample_on_slice(const SpinBasis& basis, int target, std::uint64_t seed) {
  if (target < 1 || target > basis.max_index() - 1) {
    throw DomainError("slice sampling needs an interior target");
  }
  std::mt19937_64 gen(seed);
  const int dim = basis.dim();
  const Matrix sigma = random_density(dim, dim, gen()).matrix();
  const double ps = p_offset(basis, sigma, target);
  if (ps == 0.0) return sigma;
  // P_target(rho_k) = k - target: push tau toward a level on the other side.
  const int other = ps > 0.0 ? 0 : basis.max_index();
  const Matrix tau0 = random_density(dim, dim, gen()).matrix();
  Matrix tau;
  double pt = 0.0;
  for (double w : {0.5, 0.9, 0.99, 0.999}) {
    tau = (1.0 - w) * tau0;
    tau(other, other) += w;
    pt = p_offset(basis, tau, target);
    if ((pt > 0.0) != (ps > 0.0) && pt != 0.0) break;
  }
  const double lambda = pt / (pt - ps);
  Matrix rho = lambda * sigma + (1.0 - lambda) * tau;
  rho = 0.5 * (rho + rho.adjoint());
  return rho;
}

ConditionReport check_condition_u(const ControllerSpec& spec, const SpinBasis& basis,
                                  const SystemParams& params, int target,
                                  int sample_count, std::uint64_t seed) {
  spec.validate(basis);
  params.validate();
  if (target < 1 || target > basis.max_index() - 1) {
    throw DomainError("condition u needs 1 <= target <= 2J-1");
  }
  if (sample_count < 1) throw DomainError("sample_count must be positive");
  std::mt19937_64 gen(seed);
  const double gain = 2.0 * params.eta_hat * params.m_hat;
  double worst = std::numeric_limits<double>::infinity();
  double worst_left = 0.0;
  double worst_right = 0.0;
  int used = 0;
  for (int k = 0; k < sample_count; ++k) {
    const Matrix rho = sample_on_slice(basis, target, gen());
    if (bures_to_eigenstate(rho, target) < 1e-6) continue;
    const double left = gain * variance_z(basis, rho) * rho(target, target).real();
    const double right = evaluate_control(spec, basis, rho) * theta(basis, rho, target);
    ++used;
    if (left - right < worst) {
      worst = left - right;
      worst_left = left;
      worst_right = right;
    }
  }
  ConditionReport rep;
  rep.title = "condition u(" + to_string(spec.kind) + ", target=" + std::to_string(target) + ")";
  rep.constants["worst_margin"] = worst;
  ConditionEntry e;
  e.name = "condition_u";
  e.relation = ">";
  e.chain = {worst_left, worst_right};
  e.margin = worst;
  e.verdict = worst > 0.0 ? Verdict::NotFalsified : Verdict::Falsified;
  e.method = "sampled(" + std::to_string(used) + ")";
  if (spec.kind == ControllerKind::InteriorLaw) {
    e.detail = "u vanishes on the slice, so the condition reduces to Var_z rho_nn > 0";
  } else if (spec.kind == ControllerKind::Zero) {
    e.detail = "u = 0; holds wherever Var_z rho_nn > 0";
  }
  rep.entries.push_back(e);
  return rep;
}

}  // namespace spinsme
