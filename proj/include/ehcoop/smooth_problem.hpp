#pragma once

#include <concepts>
#include <cstddef>

#include <Eigen/Dense>

namespace ehcoop {

/// Interface shared by every smooth convex program the solvers accept.
///
///   minimize f(x)  s.t.  c_j(x) <= 0,  x_i > 0 for every barrier-bounded i.
///
/// Constraints flagged linear are handled by closed-form ratio tests in the
/// barrier line search; the others by bisection.
template <class P>
concept SmoothConvexProblem =
    requires(const P& p, const Eigen::VectorXd& x, std::size_t j, Eigen::VectorXd& g,
             Eigen::MatrixXd& h) {
      { p.num_vars() } -> std::convertible_to<std::size_t>;
      { p.num_constraints() } -> std::convertible_to<std::size_t>;
      { p.objective(x) } -> std::convertible_to<double>;
      p.objective_derivatives(x, g, h);
      { p.constraint(j, x) } -> std::convertible_to<double>;
      p.constraint_derivatives(j, x, g, h);
      { p.constraint_is_linear(j) } -> std::convertible_to<bool>;
      { p.barrier_bounded(j) } -> std::convertible_to<bool>;
    };

}  // namespace ehcoop
