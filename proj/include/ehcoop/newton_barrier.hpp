#pragma once

// Newton barrier method with a three-stage line search:
//   1. closed-form step limit from linear constraints and positivity bounds,
//   2. bisection for the first zero crossing of each nonlinear constraint,
//   3. golden-section minimization along the resulting feasible segment.
//
// Barrier function, for barrier parameter tau:
//   F_tau(x) = f(x) - (1/tau) * ( sum_j log(-c_j(x)) + sum_{bounded i} log(x_i) )

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "ehcoop/convex_program.hpp"
#include "ehcoop/kkt.hpp"
#include "ehcoop/smooth_problem.hpp"

namespace ehcoop {

struct BarrierOptions {
  double tau0 = 1.0;
  double mu = 10.0;
  double tau_max = 1e8;
  double eps = 1e-6;
  int max_inner = 200;
  double shrink = 0.99;
  double bisection_tol = 1e-9;
  double golden_tol = 1e-8;

  void validate() const {
    if (!(tau0 > 0.0 && mu > 1.0 && eps > 0.0 && shrink > 0.0 && shrink < 1.0 && max_inner > 0)) {
      throw std::invalid_argument("BarrierOptions: invalid parameters");
    }
  }
};

enum class SolveStatus { Converged, MaxIterations, Infeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

struct SolveResult {
  Allocation x_star;
  double objective_nats = 0.0;  ///< f(x*) in the minimization convention
  double objective_bits = 0.0;  ///< maximized throughput objective, -f(x*) / ln 2
  int outer_iters = 0;
  int inner_iters = 0;
  double max_constraint_violation = 0.0;
  double kkt_residual = 0.0;  ///< kkt_certificate residual at x_star
  bool regularized = false;  ///< some Newton system needed a diagonal shift
  SolveStatus status = SolveStatus::Infeasible;
};

/// Snapshot passed to an optional observer after each accepted inner step.
struct BarrierIterate {
  double tau = 0.0;
  int inner = 0;
  const Eigen::VectorXd* x = nullptr;
  double barrier_before = 0.0;
  double barrier_after = 0.0;
  double alpha = 0.0;
};

using BarrierObserver = std::function<void(const BarrierIterate&)>;

inline constexpr double kAlphaCap = 1e12;

template <SmoothConvexProblem P>
bool strictly_interior(const P& p, const Eigen::VectorXd& x) {
  for (std::size_t i = 0; i < p.num_vars(); ++i) {
    if (p.barrier_bounded(i) && !(x[static_cast<Eigen::Index>(i)] > 0.0)) return false;
  }
  for (std::size_t j = 0; j < p.num_constraints(); ++j) {
    if (!(p.constraint(j, x) < 0.0)) return false;
  }
  return true;
}

/// F_tau(x); +infinity outside the strict interior.
template <SmoothConvexProblem P>
double barrier_value(const P& p, double tau, const Eigen::VectorXd& x) {
  double logs = 0.0;
  for (std::size_t i = 0; i < p.num_vars(); ++i) {
    if (!p.barrier_bounded(i)) continue;
    const double xi = x[static_cast<Eigen::Index>(i)];
    if (!(xi > 0.0)) return std::numeric_limits<double>::infinity();
    logs += std::log(xi);
  }
  for (std::size_t j = 0; j < p.num_constraints(); ++j) {
    const double c = p.constraint(j, x);
    if (!(c < 0.0)) return std::numeric_limits<double>::infinity();
    logs += std::log(-c);
  }
  return p.objective(x) - logs / tau;
}

template <SmoothConvexProblem P>
void barrier_derivatives(const P& p, double tau, const Eigen::VectorXd& x, Eigen::VectorXd& g,
                         Eigen::MatrixXd& h) {
  p.objective_derivatives(x, g, h);
  Eigen::VectorXd gc;
  Eigen::MatrixXd hc;
  for (std::size_t j = 0; j < p.num_constraints(); ++j) {
    const double c = p.constraint(j, x);
    p.constraint_derivatives(j, x, gc, hc);
    // d/dx [-log(-c)/tau] = -gc / (tau c);  Hessian: gc gc^T / (tau c^2) - hc / (tau c)
    g -= gc / (tau * c);
    h += (gc * gc.transpose()) / (tau * c * c) - hc / (tau * c);
  }
  for (std::size_t i = 0; i < p.num_vars(); ++i) {
    if (!p.barrier_bounded(i)) continue;
    const auto ii = static_cast<Eigen::Index>(i);
    g[ii] -= 1.0 / (tau * x[ii]);
    h(ii, ii) += 1.0 / (tau * x[ii] * x[ii]);
  }
}

struct NewtonStep {
  Eigen::VectorXd d;
  bool regularized = false;
};

/// Solves H d = -g for the barrier Hessian. Falls back to H + lambda I when
/// the Cholesky factorization fails.
template <SmoothConvexProblem P>
NewtonStep newton_direction(const P& p, double tau, const Eigen::VectorXd& x) {
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  barrier_derivatives(p, tau, x, g, h);
  NewtonStep step;
  if (g.isZero(0.0)) {
    step.d = Eigen::VectorXd::Zero(g.size());
    return step;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() == Eigen::Success) {
    step.d = -llt.solve(g);
    if (step.d.allFinite()) return step;
  }
  step.regularized = true;
  const Eigen::Index n = h.rows();
  for (double lambda = 1e-10; lambda < 1e10; lambda *= 100.0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h + lambda * Eigen::MatrixXd::Identity(n, n));
    step.d = -ldlt.solve(g);
    if (ldlt.info() == Eigen::Success && step.d.allFinite() && g.dot(step.d) < 0.0) return step;
  }
  step.d = -g;
  return step;
}

/// Largest step keeping every linear constraint and every positivity bound
/// strictly satisfied, times `shrink`.
template <SmoothConvexProblem P>
double alpha_linear(const P& p, const Eigen::VectorXd& x, const Eigen::VectorXd& d,
                    double shrink) {
  double alpha = kAlphaCap;
  Eigen::VectorXd gc;
  Eigen::MatrixXd hc;
  for (std::size_t j = 0; j < p.num_constraints(); ++j) {
    if (!p.constraint_is_linear(j)) continue;
    p.constraint_derivatives(j, x, gc, hc);
    const double slope = gc.dot(d);
    if (slope > 0.0) alpha = std::min(alpha, -p.constraint(j, x) / slope);
  }
  for (std::size_t i = 0; i < p.num_vars(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (p.barrier_bounded(i) && d[ii] < 0.0) alpha = std::min(alpha, -x[ii] / d[ii]);
  }
  return shrink * alpha;
}

/// Zero crossing of a function that is negative at 0 and nonnegative at hi.
inline double bisect_crossing(const std::function<double(double)>& c, double hi, double tol) {
  double lo = 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at double resolution
    if (c(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

/// Restricts [0, alpha_I] so that every nonlinear constraint stays strictly
/// negative. Convexity along the ray gives at most one crossing per constraint.
template <SmoothConvexProblem P>
double alpha_log_bisection(const P& p, const Eigen::VectorXd& x, const Eigen::VectorXd& d,
                           double alpha_I, double shrink, double tol) {
  double alpha = alpha_I;
  for (std::size_t j = 0; j < p.num_constraints(); ++j) {
    if (p.constraint_is_linear(j)) continue;
    auto c = [&](double a) { return p.constraint(j, x + a * d); };
    if (c(alpha_I) < 0.0) continue;
    alpha = std::min(alpha, bisect_crossing(c, alpha_I, tol));
  }
  return shrink * alpha;
}

/// Golden-section search for the minimizer of a unimodal function on [lo, hi].
/// The returned point is the best of the final bracket and the two endpoints.
template <class F>
double golden_section_min(F&& f, double lo, double hi, double tol) {
  constexpr double inv_phi = 0.6180339887498949;  // 1 / golden ratio
  const double a0 = lo;
  const double b0 = hi;
  double a = lo;
  double b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  // The second test stops a wide bracket from shrinking below double spacing.
  while (b - a > tol && b - a > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(b)) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  double best = f1 <= f2 ? x1 : x2;
  double fbest = std::min(f1, f2);
  for (double e : {a0, b0}) {
    const double fe = f(e);
    if (fe < fbest) {
      fbest = fe;
      best = e;
    }
  }
  return best;
}

/// Scaled stationarity residual of the barrier subproblem at x:
/// ||grad f + sum lambda_j grad c_j - sum mu_i e_i||_inf / (1 + ||grad f||_inf),
/// with the barrier multipliers lambda_j = 1/(tau (-c_j)), mu_i = 1/(tau x_i).
template <SmoothConvexProblem P>
double kkt_residual(const P& p, double tau, const Eigen::VectorXd& x) {
  Eigen::VectorXd g, gf;
  Eigen::MatrixXd h;
  barrier_derivatives(p, tau, x, g, h);
  p.objective_derivatives(x, gf, h);
  return g.lpNorm<Eigen::Infinity>() / (1.0 + gf.lpNorm<Eigen::Infinity>());
}

template <SmoothConvexProblem P>
double max_violation(const P& p, const Eigen::VectorXd& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p.num_constraints(); ++j) worst = std::max(worst, p.constraint(j, x));
  for (std::size_t i = 0; i < p.num_vars(); ++i) {
    if (p.barrier_bounded(i)) worst = std::max(worst, -x[static_cast<Eigen::Index>(i)]);
  }
  return worst;
}

/// Extra Newton steps at a fixed tau, taken after the step-length test has
/// stopped the inner loop. They bring the iterate onto the central path to
/// rounding accuracy so the barrier multipliers certify stationarity. Steps
/// are full (clipped to the feasible segment) and kept only while they reduce
/// the barrier gradient.
template <SmoothConvexProblem P>
Eigen::VectorXd polish_center(const P& p, double tau, Eigen::VectorXd x, const BarrierOptions& opts,
                              int max_steps = 50) {
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  barrier_derivatives(p, tau, x, g, h);
  double best = g.lpNorm<Eigen::Infinity>();
  Eigen::VectorXd best_x = x;
  int stalled = 0;
  for (int k = 0; k < max_steps && stalled < 3; ++k) {
    const NewtonStep step = newton_direction(p, tau, x);
    if (step.d.isZero(0.0)) break;
    const double alpha_I = alpha_linear(p, x, step.d, opts.shrink);
    const double alpha_II = alpha_log_bisection(p, x, step.d, alpha_I, opts.shrink, opts.bisection_tol);
    x += std::min(1.0, alpha_II) * step.d;
    if (!strictly_interior(p, x)) break;
    barrier_derivatives(p, tau, x, g, h);
    const double gn = g.lpNorm<Eigen::Infinity>();
    if (gn < best) {
      best = gn;
      best_x = x;
      stalled = 0;
    } else {
      ++stalled;
    }
  }
  return best_x;
}

/// Newton barrier solve from a strictly feasible start.
template <SmoothConvexProblem P>
SolveResult solve_nb_from(const P& p, const BarrierOptions& opts, Eigen::VectorXd x,
                     const BarrierObserver& observer = {}) {
  opts.validate();
  SolveResult result;
  if (!strictly_interior(p, x)) {
    result.status = SolveStatus::Infeasible;
    result.x_star.x = std::move(x);
    return result;
  }

  double tau = opts.tau0;
  double last_tau = tau;
  bool capped = false;
  while (tau < opts.tau_max) {
    capped = true;
    for (int k = 0; k < opts.max_inner; ++k) {
      const NewtonStep step = newton_direction(p, tau, x);
      result.regularized = result.regularized || step.regularized;
      ++result.inner_iters;
      const Eigen::VectorXd& d = step.d;
      if (d.isZero(0.0)) {
        capped = false;
        break;
      }

      const double alpha_I = alpha_linear(p, x, d, opts.shrink);
      const double alpha_II =
          alpha_log_bisection(p, x, d, alpha_I, opts.shrink, opts.bisection_tol);
      const double f_before = barrier_value(p, tau, x);

      auto along_f = [&](double a) { return p.objective(x + a * d); };
      auto along_F = [&](double a) { return barrier_value(p, tau, x + a * d); };
      double alpha = golden_section_min(along_f, 0.0, alpha_II, opts.golden_tol);
      if (!(along_F(alpha) < f_before)) {
        alpha = golden_section_min(along_F, 0.0, alpha_II, opts.golden_tol);
        if (!(along_F(alpha) <= f_before)) alpha = 0.0;
      }

      const Eigen::VectorXd next = x + alpha * d;
      const double moved = (next - x).norm();
      const double f_after = barrier_value(p, tau, next);
      x = next;
      if (observer) observer({tau, k, &x, f_before, f_after, alpha});
      if (moved <= opts.eps) {
        capped = false;
        break;
      }
    }
    ++result.outer_iters;
    last_tau = tau;
    tau *= opts.mu;
  }

  if (result.outer_iters > 0) x = polish_center(p, last_tau, std::move(x), opts);

  result.x_star.x = x;
  result.objective_nats = p.objective(x);
  result.objective_bits = -result.objective_nats / std::numbers::ln2;
  result.max_constraint_violation = max_violation(p, x);
  result.kkt_residual = kkt_certificate(p, x).residual();
  result.status = capped ? SolveStatus::MaxIterations : SolveStatus::Converged;
  return result;
}

/// Newton barrier solve of a program, started from initial_point().
inline SolveResult solve_nb(const ConvexProgram& p, const BarrierOptions& opts = {},
                            const BarrierObserver& observer = {}) {
  Allocation start;
  try {
    start = initial_point(p);
  } catch (const std::domain_error&) {
    SolveResult r;
    r.status = SolveStatus::Infeasible;
    return r;
  }
  SolveResult r = solve_nb_from(p, opts, start.x, observer);
  r.x_star.degenerate = start.degenerate;
  return r;
}

}  // namespace ehcoop
