#pragma once

// Decision layer: screening of the power-splitting ratio for S1 and selection
// of the best scenario/case combination for one configuration.

#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehcoop/model.hpp"
#include "ehcoop/newton_barrier.hpp"
#include "ehcoop/parallel.hpp"
#include "ehcoop/quadratic.hpp"

namespace ehcoop {

enum class SolverKind { NewtonBarrier, Quadratic, Both };

inline std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::NewtonBarrier: return "nb";
    case SolverKind::Quadratic: return "quad";
    case SolverKind::Both: return "both";
  }
  return "?";
}

struct StrategyOptions {
  SolverKind solver = SolverKind::NewtonBarrier;
  BarrierOptions nb;
  IterativeOptions quad;
  double rho_step = 0.1;
  double tie_rel = 1e-7;  ///< objectives closer than this are ties
  unsigned threads = 0;   ///< 0 picks hardware concurrency
};

/// One solved program. With SolverKind::Both the barrier result is reported
/// and the iterative one kept in `cross`.
struct InstanceResult {
  ScenarioSpec spec;
  SolveResult result;
  Throughputs bits;
  std::optional<SolveResult> cross;
  std::string error;  ///< empty on success

  bool ok() const { return error.empty() && result.status == SolveStatus::Converged; }
  double objective_bits() const { return result.objective_bits; }

  /// Relative objective gap between the two solvers, NaN unless both ran.
  double cross_gap() const {
    if (!cross) return std::numeric_limits<double>::quiet_NaN();
    return std::abs(cross->objective_bits - result.objective_bits) /
           std::max(1e-300, std::abs(result.objective_bits));
  }
};

inline InstanceResult solve_instance(const ScenarioSpec& spec, const NetworkConfig& cfg,
                                     const ChannelState& ch, const StrategyOptions& opts = {}) {
  InstanceResult out;
  out.spec = spec;
  const ConvexProgram p = build_problem(spec, cfg, ch);
  try {
    if (opts.solver == SolverKind::Quadratic) {
      out.result = solve_iterative(p, opts.quad);
    } else {
      out.result = solve_nb(p, opts.nb);
      if (opts.solver == SolverKind::Both) out.cross = solve_iterative(p, opts.quad);
    }
  } catch (const std::exception& e) {
    out.error = e.what();
    out.result.status = SolveStatus::Infeasible;
    return out;
  }
  if (out.result.status != SolveStatus::Converged) {
    out.error = std::string("solver stopped: ") + to_string(out.result.status);
    return out;
  }
  if (out.cross && out.cross->status != SolveStatus::Converged) {
    out.error = std::string("cross-check solver stopped: ") + to_string(out.cross->status);
    return out;
  }
  out.bits = throughputs_from_allocation(spec, cfg, ch, out.result.x_star, 1e-7);
  return out;
}

/// Screening grid {0, step, 2 step, ...} strictly below rho_max.
inline std::vector<double> rho_grid(const ChannelState& ch, double step = 0.1) {
  if (!(step > 0.0)) throw std::invalid_argument("rho_grid: step must be positive");
  const double limit = rho_max(ch);
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double rho = k * step;
    if (!(rho < limit - 1e-12)) break;
    out.push_back(rho);
  }
  return out;
}

/// All candidates tried for one scenario/case, and the best of them.
struct ComboResult {
  Scenario scenario = Scenario::S1;
  Case case_ = Case::A;
  std::vector<InstanceResult> candidates;
  std::size_t best = npos;
  std::vector<std::string> warnings;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  bool ok() const { return best != npos; }
  const InstanceResult& winner() const {
    if (!ok()) throw std::logic_error("ComboResult: no converged candidate");
    return candidates[best];
  }
  double rho_star() const { return winner().spec.rho; }
};

namespace detail {

/// Index of the largest objective among converged entries; an entry must beat
/// the incumbent by more than tie_rel to replace it, so earlier entries win ties.
inline std::size_t argmax_with_ties(const std::vector<InstanceResult>& v, double tie_rel) {
  std::size_t best = ComboResult::npos;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].ok()) continue;
    if (best == ComboResult::npos) {
      best = i;
      continue;
    }
    const double inc = v[best].objective_bits();
    if (v[i].objective_bits() > inc + tie_rel * std::max(1.0, std::abs(inc))) best = i;
  }
  return best;
}

inline void finalize(ComboResult& c, double tie_rel) {
  for (const auto& r : c.candidates) {
    if (!r.ok()) {
      c.warnings.push_back(to_string(r.spec.scenario) + "-" + to_string(r.spec.case_) +
                           " rho=" + std::to_string(r.spec.rho) + " excluded: " + r.error);
    }
  }
  c.best = argmax_with_ties(c.candidates, tie_rel);
}

inline std::vector<ScenarioSpec> combo_specs(Scenario s, Case c, Objective o,
                                             const ChannelState& ch, double rho_step) {
  if (s != Scenario::S1) return {ScenarioSpec{s, c, o, 0.0}};
  std::vector<ScenarioSpec> out;
  for (double rho : rho_grid(ch, rho_step)) out.push_back({s, c, o, rho});
  return out;
}

}  // namespace detail

/// Solves S1 at every grid ratio; ties go to the smaller ratio.
inline ComboResult screen_rho(Case c, Objective o, const NetworkConfig& cfg,
                              const StrategyOptions& opts = {}) {
  const auto ch = derive_channels(cfg);
  ComboResult out;
  out.scenario = Scenario::S1;
  out.case_ = c;
  const auto specs = detail::combo_specs(Scenario::S1, c, o, ch, opts.rho_step);
  out.candidates.resize(specs.size());
  parallel_for(specs.size(), opts.threads,
               [&](std::size_t i) { out.candidates[i] = solve_instance(specs[i], cfg, ch, opts); });
  detail::finalize(out, opts.tie_rel);
  return out;
}

struct StrategyResult {
  std::vector<ComboResult> combos;  ///< evaluated combinations, scenario-major
  std::size_t best = ComboResult::npos;
  std::vector<std::string> notes;

  bool ok() const { return best != ComboResult::npos; }
  const ComboResult& winner() const {
    if (!ok()) throw std::logic_error("StrategyResult: no converged combination");
    return combos[best];
  }
  Scenario scenario() const { return winner().scenario; }
  Case case_() const { return winner().case_; }
  double rho_star() const { return winner().rho_star(); }
  const SolveResult& result() const { return winner().winner().result; }
  double B1() const { return winner().winner().bits.B1; }
  double B2() const { return winner().winner().bits.B2; }

  /// Every candidate solved, in evaluation order.
  std::vector<const InstanceResult*> table() const {
    std::vector<const InstanceResult*> out;
    for (const auto& c : combos) {
      for (const auto& r : c.candidates) out.push_back(&r);
    }
    return out;
  }
};

/// Evaluates the eight scenario/case combinations (S1 via rho screening) and
/// picks the one with the largest objective. Earlier combinations win ties.
inline StrategyResult select_strategy(const NetworkConfig& cfg, Objective o,
                                      const StrategyOptions& opts = {},
                                      const std::vector<Scenario>& scenarios = {kAllScenarios.begin(),
                                                                                kAllScenarios.end()}) {
  cfg.validate();
  const auto ch = derive_channels(cfg);
  StrategyResult out;
  std::vector<ScenarioSpec> specs;
  std::vector<std::size_t> owner;
  for (auto s : scenarios) {
    if (is_relay_scenario(s) && !relay_beneficial(ch)) {
      out.notes.push_back(to_string(s) + " skipped: inter-user link weaker than direct link");
      continue;
    }
    for (auto c : kAllCases) {
      ComboResult combo;
      combo.scenario = s;
      combo.case_ = c;
      for (const auto& spec : detail::combo_specs(s, c, o, ch, opts.rho_step)) {
        specs.push_back(spec);
        owner.push_back(out.combos.size());
      }
      out.combos.push_back(std::move(combo));
    }
  }
  std::vector<InstanceResult> solved(specs.size());
  parallel_for(specs.size(), opts.threads,
               [&](std::size_t i) { solved[i] = solve_instance(specs[i], cfg, ch, opts); });
  for (std::size_t i = 0; i < solved.size(); ++i) {
    out.combos[owner[i]].candidates.push_back(std::move(solved[i]));
  }

  std::vector<InstanceResult> bests;
  std::vector<std::size_t> index;
  for (std::size_t k = 0; k < out.combos.size(); ++k) {
    auto& combo = out.combos[k];
    detail::finalize(combo, opts.tie_rel);
    for (const auto& w : combo.warnings) out.notes.push_back(w);
    if (combo.ok()) {
      bests.push_back(combo.winner());
      index.push_back(k);
    }
  }
  const std::size_t b = detail::argmax_with_ties(bests, opts.tie_rel);
  if (b != ComboResult::npos) out.best = index[b];
  return out;
}

}  // namespace ehcoop
