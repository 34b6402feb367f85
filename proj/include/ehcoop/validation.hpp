#pragma once

// Validation suites shared by the command-line `validate` subcommand and the
// acceptance binary: finite-difference calculus, the grid oracle, solver
// cross-validation and optimality certificates.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ehcoop/model.hpp"
#include "ehcoop/newton_barrier.hpp"
#include "ehcoop/oracle.hpp"
#include "ehcoop/parallel.hpp"
#include "ehcoop/quadratic.hpp"
#include "ehcoop/strategy.hpp"

namespace ehcoop {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

template <class... Args>
std::string format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace detail

/// Perspective gradient (step 1e-6) and Hessian (step 1e-5) against central
/// differences at random interior points, plus the rank-1 identity v v^T = H.
inline CheckResult check_calculus(int points = 100, std::uint64_t seed = 2024) {
  detail::Stopwatch clock;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_gamma(std::log(1e3), std::log(3e5));
  std::uniform_real_distribution<double> t_dist(0.02, 1.0);
  std::uniform_real_distribution<double> y_dist(1e-3, 0.3);
  double worst_g = 0.0, worst_h = 0.0, worst_rank1 = 0.0;
  for (int k = 0; k < points; ++k) {
    const double gamma = std::exp(log_gamma(rng));
    const double t = t_dist(rng);
    const double y = y_dist(rng);
    const auto e = perspective_fd_check(gamma, t, y, 1e-6, 1e-5);
    worst_g = std::max(worst_g, e.gradient);
    worst_h = std::max(worst_h, e.hessian);
    const auto d = perspective_gradient(gamma, t, y);
    const Eigen::Matrix2d h = perspective_hessian(gamma, t, y);
    const Eigen::Matrix2d r1 = d.v * d.v.transpose();
    worst_rank1 = std::max(worst_rank1, (r1 - h).cwiseAbs().maxCoeff() / h.cwiseAbs().maxCoeff());
  }
  CheckResult out;
  out.name = "calculus";
  out.pass = worst_g <= 1e-6 && worst_h <= 1e-4 && worst_rank1 <= 1e-12;
  out.detail = detail::format(
      "%d points: gradient rel err %.2e (<= 1e-6), Hessian rel err %.2e (<= 1e-4), rank-1 %.2e "
      "(<= 1e-12)",
      points, worst_g, worst_h, worst_rank1);
  out.seconds = clock.seconds();
  return out;
}

/// Barrier solutions of every S3/S4 program against the exhaustive grid: the
/// solver may not be worse than the grid, and the grid may not be worse than
/// the solver by more than the grid's local resolution bound.
inline CheckResult check_oracle(const NetworkConfig& cfg = {}, double step = 1e-3) {
  detail::Stopwatch clock;
  const auto ch = derive_channels(cfg);
  CheckResult out;
  out.name = "oracle";
  out.pass = true;
  double worst_gap = 0.0, slowest = 0.0;
  for (auto s : {Scenario::S3, Scenario::S4}) {
    for (auto c : kAllCases) {
      for (auto o : {Objective::WeightedSum, Objective::CommonThroughput}) {
        detail::Stopwatch one;
        const auto p = build_problem({s, c, o, 0.0}, cfg, ch);
        const auto g = brute_force_grid(p, GridSpec{step});
        const auto nb = solve_nb(p);
        const double gap = g.best_objective - nb.objective_nats;
        const bool ok = nb.status == SolveStatus::Converged && gap >= -1e-9 &&
                        gap <= g.resolution_bound && one.seconds() < 60.0;
        if (!ok) {
          out.detail += detail::format("[%s-%s %s gap %.3e bound %.3e] ", to_string(s).c_str(),
                                       to_string(c).c_str(), to_string(o).c_str(), gap,
                                       g.resolution_bound);
        }
        out.pass = out.pass && ok;
        worst_gap = std::max(worst_gap, gap / std::max(g.resolution_bound, 1e-300));
        slowest = std::max(slowest, one.seconds());
      }
    }
  }
  out.detail += detail::format(
      "8 instances, grid step %g: largest gap/resolution bound %.3f (<= 1), slowest %.2f s (< 60 s)",
      step, worst_gap, slowest);
  out.seconds = clock.seconds();
  return out;
}

/// Every program of an energy sweep: all eight combinations, every screening
/// ratio for S1, both objectives.
inline std::vector<std::pair<ScenarioSpec, NetworkConfig>> sweep_instances(
    const NetworkConfig& base, const std::vector<double>& x1_values) {
  std::vector<std::pair<ScenarioSpec, NetworkConfig>> out;
  for (double x1 : x1_values) {
    NetworkConfig cfg = base;
    cfg.X1 = x1;
    const auto ch = derive_channels(cfg);
    for (auto o : {Objective::WeightedSum, Objective::CommonThroughput}) {
      for (auto s : kAllScenarios) {
        if (is_relay_scenario(s) && !relay_beneficial(ch)) continue;
        for (auto c : kAllCases) {
          for (const auto& spec : detail::combo_specs(s, c, o, ch, 0.1)) out.emplace_back(spec, cfg);
        }
      }
    }
  }
  return out;
}

inline std::vector<double> default_energy_values() {
  std::vector<double> v;
  for (int k = 1; k <= 12; ++k) v.push_back(25.0 * k);
  return v;
}

struct SolvedPair {
  ScenarioSpec spec;
  NetworkConfig cfg;
  SolveResult nb;
  SolveResult quad;
};

inline std::vector<SolvedPair> solve_pairs(
    const std::vector<std::pair<ScenarioSpec, NetworkConfig>>& instances, unsigned threads = 0) {
  std::vector<SolvedPair> out(instances.size());
  parallel_for(instances.size(), threads, [&](std::size_t i) {
    const auto& [spec, cfg] = instances[i];
    const auto p = build_problem(spec, cfg, derive_channels(cfg));
    out[i] = {spec, cfg, solve_nb(p), solve_iterative(p)};
  });
  return out;
}

/// Barrier solver against the iterative quadratic solver on the same programs.
inline CheckResult check_cross_validation(const std::vector<SolvedPair>& pairs) {
  detail::Stopwatch clock;
  CheckResult out;
  out.name = "cross-validation";
  double worst = 0.0;
  int max_outer = 0, failures = 0;
  for (const auto& s : pairs) {
    if (s.nb.status != SolveStatus::Converged || s.quad.status != SolveStatus::Converged) {
      ++failures;
      continue;
    }
    worst = std::max(worst, std::abs(s.nb.objective_bits - s.quad.objective_bits) /
                                std::max(1e-300, std::abs(s.nb.objective_bits)));
    max_outer = std::max(max_outer, s.quad.outer_iters);
  }
  out.pass = failures == 0 && worst <= 1e-4 && max_outer <= 10;
  out.detail = detail::format(
      "%zu programs: max relative objective gap %.2e (<= 1e-4), max outer iterations %d (<= 10), "
      "non-converged %d",
      pairs.size(), worst, max_outer, failures);
  out.seconds = clock.seconds();
  return out;
}

/// Feasibility and KKT residual of every converged solve (both solvers), and
/// barrier objective invariance to the initial barrier parameter.
inline CheckResult check_certificates(const std::vector<SolvedPair>& pairs, unsigned threads = 0) {
  detail::Stopwatch clock;
  CheckResult out;
  out.name = "certificates";
  double worst_violation = -std::numeric_limits<double>::infinity();
  double worst_kkt_nb = 0.0, worst_kkt_quad = 0.0;
  int converged = 0;
  for (const auto& s : pairs) {
    for (const SolveResult* r : {&s.nb, &s.quad}) {
      if (r->status != SolveStatus::Converged) continue;
      ++converged;
      worst_violation = std::max(worst_violation, r->max_constraint_violation);
    }
    if (s.nb.status == SolveStatus::Converged) worst_kkt_nb = std::max(worst_kkt_nb, s.nb.kkt_residual);
    if (s.quad.status == SolveStatus::Converged) {
      worst_kkt_quad = std::max(worst_kkt_quad, s.quad.kkt_residual);
    }
  }
  std::vector<double> spread(pairs.size(), 0.0);
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    const auto& s = pairs[i];
    const auto p = build_problem(s.spec, s.cfg, derive_channels(s.cfg));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double tau0 : {0.1, 1.0, 10.0}) {
      BarrierOptions o;
      o.tau0 = tau0;
      const auto r = solve_nb(p, o);
      lo = std::min(lo, r.objective_nats);
      hi = std::max(hi, r.objective_nats);
    }
    spread[i] = (hi - lo) / std::max(1e-300, std::abs(hi));
  });
  const double worst_spread = spread.empty() ? 0.0 : *std::max_element(spread.begin(), spread.end());
  out.pass = worst_violation <= 0.0 && worst_kkt_nb <= 1e-6 && worst_kkt_quad <= 1e-6 &&
             worst_spread <= 1e-6;
  out.detail = detail::format(
      "%d converged solves: max violation %.2e (<= 0), KKT barrier %.2e / quadratic %.2e (<= 1e-6), "
      "tau0 spread %.2e (<= 1e-6)",
      converged, worst_violation, worst_kkt_nb, worst_kkt_quad, worst_spread);
  out.seconds = clock.seconds();
  return out;
}

}  // namespace ehcoop
