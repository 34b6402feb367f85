#pragma once

// Iterative local quadratic approximation of the perspective terms.
//
// Around (t_k, y_k) each perspective is replaced by its second-order model
//   l(t_k, y_k) + g^T delta + 0.5 * (v^T delta)^2,   delta = [t - t_k, y - y_k],
// whose Hessian is the rank-one outer product v v^T. The resulting QP/QCQP is
// solved by a primal-dual path-following interior-point method; the outer loop
// re-expands at the new point until the iterates stop moving.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ehcoop/convex_program.hpp"
#include "ehcoop/newton_barrier.hpp"
#include "ehcoop/perspective.hpp"

namespace ehcoop {

struct QuadraticModel {
  double base_value = 0.0;
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  Eigen::Vector2d expansion_point = Eigen::Vector2d::Zero();  ///< (t_k, y_k)

  double operator()(double t, double y) const {
    const Eigen::Vector2d delta(t - expansion_point[0], y - expansion_point[1]);
    const double s = v.dot(delta);
    return base_value + g.dot(delta) + 0.5 * s * s;
  }
};

inline QuadraticModel quadratic_model(double gamma, double t, double y) {
  if (!(t > 0.0)) throw std::invalid_argument("quadratic_model: time must be positive");
  const auto d = perspective_gradient(gamma, t, y);
  QuadraticModel m;
  m.base_value = perspective_value(gamma, t, y);
  m.g = d.g;
  m.v = d.v;
  m.expansion_point = Eigen::Vector2d(t, y);
  return m;
}

/// 0.5 x^T Q x + q^T x + r.
struct QuadForm {
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
  double r = 0.0;

  static QuadForm zero(std::size_t n) {
    const auto m = static_cast<Eigen::Index>(n);
    return {Eigen::MatrixXd::Zero(m, m), Eigen::VectorXd::Zero(m), 0.0};
  }

  double value(const Eigen::VectorXd& x) const { return 0.5 * x.dot(Q * x) + q.dot(x) + r; }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return Q * x + q; }

  /// Adds coeff * model(x[ti], x[yi]) expanded in the full variable vector.
  void add_model(const QuadraticModel& m, std::size_t ti, std::size_t yi, double coeff) {
    const std::size_t idx[2] = {ti, yi};
    const double vz = m.v.dot(m.expansion_point);
    for (int a = 0; a < 2; ++a) {
      q[idx[a]] += coeff * (m.g[a] - vz * m.v[a]);
      for (int b = 0; b < 2; ++b) Q(idx[a], idx[b]) += coeff * m.v[a] * m.v[b];
    }
    r += coeff * (m.base_value - m.g.dot(m.expansion_point) + 0.5 * vz * vz);
  }
};

/// Convex QCQP: minimize objective(x) s.t. quadratic rows <= 0, linear rows,
/// x_i >= 0 on time and energy coordinates. With no quadratic rows it is a QP.
struct QuadraticSubproblem {
  std::size_t n_vars = 0;
  std::vector<VarRole> roles;
  QuadForm objective_form;
  std::vector<QuadForm> quadratic;
  std::vector<LinearConstraint> linear;

  std::size_t num_vars() const { return n_vars; }
  std::size_t num_constraints() const { return quadratic.size() + linear.size(); }
  bool constraint_is_linear(std::size_t j) const { return j >= quadratic.size(); }
  bool barrier_bounded(std::size_t i) const { return roles[i] != VarRole::Throughput; }
  bool is_qp() const { return quadratic.empty(); }

  double objective(const Eigen::VectorXd& x) const { return objective_form.value(x); }

  void objective_derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& h) const {
    g = objective_form.gradient(x);
    h = objective_form.Q;
  }

  double constraint(std::size_t j, const Eigen::VectorXd& x) const {
    if (j < quadratic.size()) return quadratic[j].value(x);
    const auto& l = linear[j - quadratic.size()];
    return l.a.dot(x) - l.b;
  }

  void constraint_derivatives(std::size_t j, const Eigen::VectorXd& x, Eigen::VectorXd& g,
                              Eigen::MatrixXd& h) const {
    if (j < quadratic.size()) {
      g = quadratic[j].gradient(x);
      h = quadratic[j].Q;
      return;
    }
    g = linear[j - quadratic.size()].a;
    h.setZero(static_cast<Eigen::Index>(n_vars), static_cast<Eigen::Index>(n_vars));
  }
};

/// Replaces every perspective term of p by its quadratic model at x_k.
inline QuadraticSubproblem quadratize(const ConvexProgram& p, const Eigen::VectorXd& x_k) {
  if (x_k.size() != static_cast<Eigen::Index>(p.n_vars)) {
    throw std::invalid_argument("quadratize: dimension mismatch");
  }
  auto add_terms = [&](QuadForm& form, const std::vector<PerspectiveTerm>& terms) {
    for (const auto& term : terms) {
      const double t = x_k[term.t_index];
      if (!(t > 0.0)) throw std::invalid_argument("quadratize: expansion time must be positive");
      form.add_model(quadratic_model(term.gamma, t, std::max(x_k[term.y_index], 0.0)), term.t_index,
                     term.y_index, term.coeff);
    }
  };
  QuadraticSubproblem q;
  q.n_vars = p.n_vars;
  q.roles = p.roles;
  q.objective_form = QuadForm::zero(p.n_vars);
  q.objective_form.q = p.objective_linear;
  add_terms(q.objective_form, p.objective_terms);
  for (const auto& e : p.epigraphs) {
    QuadForm f = QuadForm::zero(p.n_vars);
    f.q[e.aux_index] = 1.0;
    add_terms(f, e.terms);
    q.quadratic.push_back(std::move(f));
  }
  q.linear = p.linear;
  return q;
}

struct IpmOptions {
  double tol = 1e-8;
  double sigma = 0.1;         ///< centering parameter
  double fraction = 0.99;     ///< fraction-to-boundary factor
  int stall_limit = 50;
  int max_iter = 500;
};

struct SubproblemSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  ///< one per row: quadratic, linear, then coordinate bounds
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Largest alpha in (0, inf] with c + b alpha + a alpha^2 < 0 kept, for c < 0, a >= 0.
inline double first_root(double a, double b, double c) {
  if (a <= 0.0) return b > 0.0 ? -c / b : std::numeric_limits<double>::infinity();
  const double disc = std::sqrt(b * b - 4.0 * a * c);
  return b > 0.0 ? -2.0 * c / (b + disc) : (disc - b) / (2.0 * a);
}

/// Primal-dual path-following method on
///   min f0(x)  s.t.  f_i(x) <= 0,
/// where the rows are the quadratic constraints, the linear constraints and
/// -x_i <= 0 for bounded coordinates. Iterates stay strictly feasible: the
/// slacks are s = -f(x), and the step length is the closed-form largest step
/// keeping every (quadratic or linear) row negative and every multiplier
/// positive, times `fraction`. Each Newton system is reduced to the primal
/// block H + J^T D J with D = diag(lambda / s).
inline SubproblemSolution solve_subproblem(const QuadraticSubproblem& q, const Eigen::VectorXd& x_start,
                                           const IpmOptions& opts = {}) {
  const auto n = static_cast<Eigen::Index>(q.n_vars);
  if (x_start.size() != n) throw std::invalid_argument("solve_subproblem: dimension mismatch");

  std::vector<Eigen::Index> bounded;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (q.barrier_bounded(static_cast<std::size_t>(i))) bounded.push_back(i);
  }
  const auto n_quad = static_cast<Eigen::Index>(q.quadratic.size());
  const auto n_lin = static_cast<Eigen::Index>(q.linear.size());
  const Eigen::Index m = n_quad + n_lin + static_cast<Eigen::Index>(bounded.size());

  Eigen::MatrixXd J(m, n);
  J.setZero();
  for (Eigen::Index j = 0; j < n_lin; ++j) J.row(n_quad + j) = q.linear[j].a.transpose();
  for (std::size_t k = 0; k < bounded.size(); ++k) {
    J(n_quad + n_lin + static_cast<Eigen::Index>(k), bounded[k]) = -1.0;
  }
  auto rows = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd f(m);
    for (Eigen::Index j = 0; j < n_quad; ++j) f[j] = q.quadratic[j].value(x);
    for (Eigen::Index j = 0; j < n_lin; ++j) f[n_quad + j] = q.linear[j].a.dot(x) - q.linear[j].b;
    for (std::size_t k = 0; k < bounded.size(); ++k) {
      f[n_quad + n_lin + static_cast<Eigen::Index>(k)] = -x[bounded[k]];
    }
    return f;
  };

  SubproblemSolution out;
  Eigen::VectorXd x = x_start;
  Eigen::VectorXd s = -rows(x);
  if (m > 0 && !(s.minCoeff() > 0.0)) {
    throw std::invalid_argument("solve_subproblem: start must be strictly feasible");
  }
  Eigen::VectorXd lambda = Eigen::VectorXd::Ones(m);

  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int it = 0;; ++it) {
    for (Eigen::Index j = 0; j < n_quad; ++j) J.row(j) = q.quadratic[j].gradient(x).transpose();
    const Eigen::VectorXd g0 = q.objective_form.gradient(x);
    const Eigen::VectorXd rd = g0 + J.transpose() * lambda;
    const double mu = m > 0 ? s.dot(lambda) / static_cast<double>(m) : 0.0;
    const double res = std::max(rd.lpNorm<Eigen::Infinity>() / (1.0 + g0.lpNorm<Eigen::Infinity>()), mu);
    out.iterations = it;
    out.residual = res;
    if (res <= opts.tol) {
      out.converged = true;
      break;
    }
    if (it >= opts.max_iter) break;
    if (res < 0.5 * best) {
      best = res;
      since_best = 0;
    } else if (++since_best >= opts.stall_limit) {
      break;
    }

    Eigen::MatrixXd H = q.objective_form.Q;
    for (Eigen::Index j = 0; j < n_quad; ++j) H += lambda[j] * q.quadratic[j].Q;
    const Eigen::VectorXd rc =
        (s.array() * lambda.array()).matrix() - Eigen::VectorXd::Constant(m, opts.sigma * mu);
    const Eigen::VectorXd D = lambda.cwiseQuotient(s);
    const Eigen::VectorXd s_inv_rc = rc.cwiseQuotient(s);
    const Eigen::MatrixXd K = H + J.transpose() * D.asDiagonal() * J;
    const Eigen::VectorXd rhs = -rd + J.transpose() * s_inv_rc;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
    Eigen::VectorXd dx = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !dx.allFinite()) {
      const Eigen::MatrixXd Kr = K + 1e-10 * Eigen::MatrixXd::Identity(n, n);
      dx = Kr.ldlt().solve(rhs);
      if (!dx.allFinite()) break;
    }
    const Eigen::VectorXd dlambda = D.cwiseProduct(J * dx) - s_inv_rc;

    double alpha_max = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd slope = J * dx;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double curv = i < n_quad ? 0.5 * dx.dot(q.quadratic[i].Q * dx) : 0.0;
      alpha_max = std::min(alpha_max, first_root(curv, slope[i], -s[i]));
      if (dlambda[i] < 0.0) alpha_max = std::min(alpha_max, -lambda[i] / dlambda[i]);
    }
    const double alpha = std::min(1.0, opts.fraction * alpha_max);
    const Eigen::VectorXd x_next = x + alpha * dx;
    const Eigen::VectorXd s_next = -rows(x_next);
    if (m > 0 && !(s_next.minCoeff() > 0.0)) break;  // rounding at the boundary
    x = x_next;
    s = s_next;
    lambda += alpha * dlambda;
  }
  out.x = x;
  out.multipliers = lambda;
  return out;
}

struct IterativeOptions {
  double eps = 1e-6;
  int max_outer = 50;
  double line_search_tol = 1e-10;
  IpmOptions ipm;  ///< ipm.tol caps the subproblem tolerance
  /// Subproblem tolerance in round k is ipm.tol, tightened to
  /// tol_scale * ||x_k - x_{k-1}|| but not below tol_floor.
  double tol_scale = 1e-6;
  double tol_floor = 1e-11;
};

/// Repeated quadratization. Each subproblem solution x_hat is made feasible
/// for the original program by raising the throughput coordinates to their
/// bounds (the quadratic models may overestimate the concave rates), and the
/// next iterate is the best lifted point on the segment [x_k, x_hat].
/// outer_iters counts subproblem solves, including the confirming last one.
/// Observer called with (round, accepted iterate) after every outer round.
using IterativeObserver = std::function<void(int, const Eigen::VectorXd&)>;

inline SolveResult solve_iterative(const ConvexProgram& p, const IterativeOptions& opts = {},
                                   const IterativeObserver& observer = {}) {
  SolveResult result;
  Allocation start;
  try {
    start = initial_point(p);
  } catch (const std::domain_error&) {
    result.status = SolveStatus::Infeasible;
    return result;
  }
  Eigen::VectorXd x = lift_throughputs(p, start.x);
  result.status = SolveStatus::MaxIterations;

  double last_move = std::numeric_limits<double>::infinity();
  for (int k = 0; k < opts.max_outer; ++k) {
    IpmOptions ipm = opts.ipm;
    ipm.tol = std::min(ipm.tol, std::max(opts.tol_floor, opts.tol_scale * last_move));
    const QuadraticSubproblem q = quadratize(p, x);
    // At the expansion point the models equal the perspectives, so lowering
    // the throughputs gives a strictly feasible start for the subproblem.
    const SubproblemSolution sub = solve_subproblem(q, below_throughput_bounds(p, x), ipm);
    ++result.outer_iters;
    result.inner_iters += sub.iterations;
    if (!sub.converged) {
      result.status = SolveStatus::MaxIterations;
      break;
    }
    const Eigen::VectorXd x_hat = lift_throughputs(p, sub.x);
    // Convex combination form keeps tiny positive coordinates of x_hat intact.
    auto point = [&](double a) { return lift_throughputs(p, (1.0 - a) * x + a * x_hat); };
    auto phi = [&](double a) { return p.objective(point(a)); };
    double alpha = golden_section_min(phi, 0.0, 1.0, opts.line_search_tol);
    if (!(phi(alpha) < phi(1.0))) alpha = 1.0;
    const Eigen::VectorXd next = point(alpha);
    const double moved = (next - x).norm();
    last_move = moved;
    x = next;
    if (observer) observer(k, x);
    if (moved <= opts.eps) {
      result.status = SolveStatus::Converged;
      break;
    }
  }

  result.x_star.x = x;
  result.x_star.degenerate = start.degenerate;
  result.objective_nats = p.objective(x);
  result.objective_bits = -result.objective_nats / std::numbers::ln2;
  result.max_constraint_violation = max_constraint_value(p, x);
  result.kkt_residual = kkt_certificate(p, x).residual();
  return result;
}

}  // namespace ehcoop
