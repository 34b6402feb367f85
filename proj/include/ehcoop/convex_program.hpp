#pragma once

// Canonical convex program used by every solver:
//
//   minimize    q^T x + sum_k coeff_k * l_{gamma_k}(x[t_k], x[y_k])
//   subject to  x[aux] + sum_k coeff_k * l_{gamma_k}(x[t_k], x[y_k]) <= 0   (epigraph rows)
//               a^T x <= b                                               (linear rows)
//               x[i] >= 0 for time and energy coordinates
//
// Constraints are indexed epigraph rows first, then linear rows.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ehcoop/perspective.hpp"

namespace ehcoop {

enum class VarRole { Time, Energy, Throughput };

struct PerspectiveTerm {
  double gamma = 0.0;
  std::size_t t_index = 0;
  std::size_t y_index = 0;
  double coeff = 1.0;
};

struct EpigraphConstraint {
  std::size_t aux_index = 0;
  std::vector<PerspectiveTerm> terms;
  std::string label;
};

struct LinearConstraint {
  Eigen::VectorXd a;
  double b = 0.0;
  std::string label;
};

/// A point of a program: time fractions, energies y = P t and throughputs (nats).
struct Allocation {
  Eigen::VectorXd x;
  bool degenerate = false;  ///< some energy budget had to be floored to stay interior
};

struct ProgramValues {
  double objective = 0.0;
  Eigen::VectorXd constraints;
};

namespace detail {

inline double terms_value(const std::vector<PerspectiveTerm>& terms, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (const auto& term : terms) {
    v += term.coeff * perspective_value(term.gamma, x[term.t_index], x[term.y_index]);
  }
  return v;
}

inline void add_terms_derivatives(const std::vector<PerspectiveTerm>& terms,
                                  const Eigen::VectorXd& x, Eigen::VectorXd& g,
                                  Eigen::MatrixXd& h) {
  for (const auto& term : terms) {
    const auto d = perspective_gradient(term.gamma, x[term.t_index], x[term.y_index]);
    const std::size_t idx[2] = {term.t_index, term.y_index};
    for (int r = 0; r < 2; ++r) {
      g[idx[r]] += term.coeff * d.g[r];
      for (int c = 0; c < 2; ++c) h(idx[r], idx[c]) += term.coeff * d.v[r] * d.v[c];
    }
  }
}

}  // namespace detail

struct ConvexProgram {
  std::size_t n_vars = 0;
  std::vector<VarRole> roles;
  std::vector<std::string> names;
  Eigen::VectorXd objective_linear;
  std::vector<PerspectiveTerm> objective_terms;
  std::vector<EpigraphConstraint> epigraphs;
  std::vector<LinearConstraint> linear;
  bool floored_energy = false;  ///< a zero energy arrival rate was raised to keep an interior

  std::size_t num_vars() const { return n_vars; }
  std::size_t num_constraints() const { return epigraphs.size() + linear.size(); }
  bool constraint_is_linear(std::size_t j) const { return j >= epigraphs.size(); }
  bool barrier_bounded(std::size_t i) const { return roles[i] != VarRole::Throughput; }

  double objective(const Eigen::VectorXd& x) const {
    return objective_linear.dot(x) + detail::terms_value(objective_terms, x);
  }

  void objective_derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& g,
                             Eigen::MatrixXd& h) const {
    g = objective_linear;
    h.setZero(n_vars, n_vars);
    detail::add_terms_derivatives(objective_terms, x, g, h);
  }

  double constraint(std::size_t j, const Eigen::VectorXd& x) const {
    if (j < epigraphs.size()) {
      const auto& e = epigraphs[j];
      return x[e.aux_index] + detail::terms_value(e.terms, x);
    }
    const auto& l = linear[j - epigraphs.size()];
    return l.a.dot(x) - l.b;
  }

  void constraint_derivatives(std::size_t j, const Eigen::VectorXd& x, Eigen::VectorXd& g,
                              Eigen::MatrixXd& h) const {
    h.setZero(n_vars, n_vars);
    if (j < epigraphs.size()) {
      const auto& e = epigraphs[j];
      g.setZero(n_vars);
      g[e.aux_index] = 1.0;
      detail::add_terms_derivatives(e.terms, x, g, h);
      return;
    }
    g = linear[j - epigraphs.size()].a;
  }

  /// Structural checks: index ranges, positive gammas and constraint coefficients.
  void validate() const {
    if (roles.size() != n_vars || objective_linear.size() != static_cast<Eigen::Index>(n_vars)) {
      throw std::invalid_argument("ConvexProgram: inconsistent dimensions");
    }
    auto check_term = [&](const PerspectiveTerm& term, bool in_constraint) {
      if (term.t_index >= n_vars || term.y_index >= n_vars) {
        throw std::invalid_argument("ConvexProgram: perspective index out of range");
      }
      if (!(term.gamma > 0.0)) throw std::invalid_argument("ConvexProgram: gamma must be > 0");
      if (in_constraint && !(term.coeff > 0.0)) {
        throw std::invalid_argument("ConvexProgram: constraint perspective coefficient must be > 0");
      }
    };
    for (const auto& term : objective_terms) check_term(term, false);
    for (const auto& e : epigraphs) {
      if (e.aux_index >= n_vars) throw std::invalid_argument("ConvexProgram: aux out of range");
      for (const auto& term : e.terms) check_term(term, true);
    }
    for (const auto& l : linear) {
      if (l.a.size() != static_cast<Eigen::Index>(n_vars)) {
        throw std::invalid_argument("ConvexProgram: linear row has wrong length");
      }
    }
  }

  std::vector<std::size_t> indices_with_role(VarRole role) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n_vars; ++i) {
      if (roles[i] == role) out.push_back(i);
    }
    return out;
  }
};

inline ProgramValues eval_program(const ConvexProgram& p, const Eigen::VectorXd& x) {
  if (x.size() != static_cast<Eigen::Index>(p.n_vars)) {
    throw std::invalid_argument("eval_program: dimension mismatch");
  }
  ProgramValues out;
  out.objective = p.objective(x);
  out.constraints.resize(static_cast<Eigen::Index>(p.num_constraints()));
  for (std::size_t j = 0; j < p.num_constraints(); ++j) {
    out.constraints[static_cast<Eigen::Index>(j)] = p.constraint(j, x);
  }
  return out;
}

/// Largest value of each throughput coordinate that keeps x feasible, given
/// the time and energy coordinates. Bounds come from epigraph rows and from
/// linear rows coupling throughputs only (e.g. Bbar <= B).
inline double throughput_upper_bound(const ConvexProgram& p, const Eigen::VectorXd& x,
                                     std::size_t aux) {
  double ub = std::numeric_limits<double>::infinity();
  for (const auto& e : p.epigraphs) {
    if (e.aux_index == aux) ub = std::min(ub, -detail::terms_value(e.terms, x));
  }
  for (const auto& l : p.linear) {
    if (!(l.a[aux] > 0.0)) continue;
    double rest = 0.0;
    bool coupling_only = true;
    for (std::size_t i = 0; i < p.n_vars; ++i) {
      if (i == aux || l.a[i] == 0.0) continue;
      if (p.roles[i] != VarRole::Throughput || !std::isfinite(x[i])) {
        coupling_only = false;
        break;
      }
      rest += l.a[i] * x[i];
    }
    if (coupling_only) ub = std::min(ub, (l.b - rest) / l.a[aux]);
  }
  return ub;
}

/// Raises every throughput coordinate to its largest feasible value. Since the
/// objective decreases in every throughput, the result is the best point with
/// the same time/energy coordinates.
inline Eigen::VectorXd lift_throughputs(const ConvexProgram& p, Eigen::VectorXd x) {
  const auto aux = p.indices_with_role(VarRole::Throughput);
  for (auto a : aux) x[a] = std::numeric_limits<double>::infinity();
  for (std::size_t pass = 0; pass < aux.size(); ++pass) {
    for (auto a : aux) x[a] = throughput_upper_bound(p, x, a);
  }
  for (auto a : aux) {
    if (!std::isfinite(x[a])) throw std::domain_error("lift_throughputs: unbounded throughput");
  }
  return x;
}

/// Sets each throughput coordinate, in index order, slightly below its bound
/// so every epigraph row holds strictly. Time and energy coordinates are kept.
inline Eigen::VectorXd below_throughput_bounds(const ConvexProgram& p, Eigen::VectorXd x,
                                               double rel_margin = 1e-3) {
  const auto aux = p.indices_with_role(VarRole::Throughput);
  for (auto a : aux) x[a] = std::numeric_limits<double>::infinity();
  for (auto a : aux) {
    const double ub = throughput_upper_bound(p, x, a);
    if (!std::isfinite(ub)) throw std::domain_error("below_throughput_bounds: unbounded throughput");
    x[a] = ub - rel_margin * (1.0 + std::abs(ub));
  }
  return x;
}

/// Strictly feasible starting point: equal time fractions leaving t0 >= 0.2,
/// each energy at half its remaining budget, each throughput at 90% of its bound.
inline Allocation initial_point(const ConvexProgram& p) {
  Allocation out;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.n_vars));
  const auto times = p.indices_with_role(VarRole::Time);
  for (auto i : times) x[i] = 0.8 / static_cast<double>(times.size() + 1);

  for (auto yi : p.indices_with_role(VarRole::Energy)) {
    double budget = std::numeric_limits<double>::infinity();
    for (const auto& l : p.linear) {
      if (l.a[yi] > 0.0) budget = std::min(budget, (l.b - l.a.dot(x)) / l.a[yi]);
    }
    if (!std::isfinite(budget)) throw std::domain_error("initial_point: energy variable without budget");
    if (!(budget > 0.0)) throw std::domain_error("initial_point: empty interior (zero energy budget)");
    x[yi] = 0.5 * budget;
  }

  const auto aux = p.indices_with_role(VarRole::Throughput);
  for (auto a : aux) x[a] = std::numeric_limits<double>::infinity();
  for (auto a : aux) {
    const double ub = throughput_upper_bound(p, x, a);
    if (!std::isfinite(ub)) throw std::domain_error("initial_point: unbounded throughput");
    x[a] = ub > 0.0 ? 0.9 * ub : ub - 1e-6;
  }
  out.x = std::move(x);
  out.degenerate = p.floored_energy;
  return out;
}

inline double max_constraint_value(const ConvexProgram& p, const Eigen::VectorXd& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p.num_constraints(); ++j) worst = std::max(worst, p.constraint(j, x));
  for (std::size_t i = 0; i < p.n_vars; ++i) {
    if (p.barrier_bounded(i)) worst = std::max(worst, -x[i]);
  }
  return worst;
}

}  // namespace ehcoop
