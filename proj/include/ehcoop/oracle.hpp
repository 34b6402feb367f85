#pragma once

// Independent oracles for validating the solvers on small instances:
// an exhaustive grid over the time fractions of S3/S4 programs and central
// finite differences of the perspective and of the barrier function.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "ehcoop/convex_program.hpp"
#include "ehcoop/newton_barrier.hpp"
#include "ehcoop/perspective.hpp"

namespace ehcoop {

struct GridSpec {
  double step = 1e-3;  ///< spacing on every time fraction
  double max_points = 1e8;
  unsigned threads = 0;  ///< 0 picks hardware concurrency

  void validate() const {
    if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("GridSpec: step must be in (0, 1]");
  }
};

struct GridResult {
  Eigen::VectorXd best_x;
  double best_objective = std::numeric_limits<double>::infinity();
  std::size_t points = 0;
  /// Sum over time coordinates of the largest objective change to a grid
  /// neighbour of best_x: bounds the distance to the continuous optimum.
  double resolution_bound = 0.0;
};

namespace detail {

/// Energies in index order at the largest value their budget rows allow, then
/// throughputs lifted. Rounding is undone so every row holds as evaluated.
inline Eigen::VectorXd complete_from_times(const ConvexProgram& p, Eigen::VectorXd x) {
  const auto energies = p.indices_with_role(VarRole::Energy);
  for (auto yi : energies) x[yi] = 0.0;
  for (auto yi : energies) {
    double budget = std::numeric_limits<double>::infinity();
    for (const auto& l : p.linear) {
      if (l.a[yi] > 0.0) budget = std::min(budget, (l.b - l.a.dot(x)) / l.a[yi]);
    }
    double y = std::max(budget, 0.0);
    for (;;) {
      x[yi] = y;
      bool ok = true;
      for (const auto& l : p.linear) {
        if (l.a[yi] > 0.0 && l.a.dot(x) - l.b > 0.0) ok = false;
      }
      if (ok || y == 0.0) break;
      y = std::nextafter(y, 0.0);
    }
  }
  return lift_throughputs(p, x);
}

inline bool grid_feasible(const ConvexProgram& p, const Eigen::VectorXd& x) {
  for (std::size_t j = 0; j < p.num_constraints(); ++j) {
    if (p.constraint(j, x) > 0.0) return false;
  }
  for (std::size_t i = 0; i < p.n_vars; ++i) {
    if (p.barrier_bounded(i) && x[static_cast<Eigen::Index>(i)] < 0.0) return false;
  }
  return true;
}

}  // namespace detail

/// Exhaustive scan of the two time fractions of an S3/S4 program on a square
/// grid with t1 + t2 <= 1. Energies sit at their budgets, which is optimal
/// because each one feeds a single increasing rate term.
inline GridResult brute_force_grid(const ConvexProgram& p, const GridSpec& grid = {}) {
  grid.validate();
  const auto times = p.indices_with_role(VarRole::Time);
  if (times.size() != 2) {
    throw std::invalid_argument("brute_force_grid: only two-slot (S3/S4) programs are supported");
  }
  const auto n = static_cast<long>(std::floor(1.0 / grid.step + 1e-9));
  const double points = 0.5 * static_cast<double>(n + 1) * static_cast<double>(n + 2);
  if (points > grid.max_points) throw std::length_error("brute_force_grid: grid exceeds point guard");

  auto point = [&](long i, long j) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.n_vars));
    x[times[0]] = std::min(1.0, static_cast<double>(i) * grid.step);
    x[times[1]] = std::min(1.0 - x[times[0]], static_cast<double>(j) * grid.step);
    return detail::complete_from_times(p, x);
  };

  struct Best {
    double f = std::numeric_limits<double>::infinity();
    long i = -1, j = -1;
    std::size_t count = 0;
  };
  unsigned workers = grid.threads ? grid.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<long>(workers, n + 1));
  std::vector<Best> partial(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      Best& b = partial[w];
      for (long i = w; i <= n; i += workers) {
        for (long j = 0; i + j <= n; ++j) {
          const Eigen::VectorXd x = point(i, j);
          ++b.count;
          if (!detail::grid_feasible(p, x)) continue;
          const double f = p.objective(x);
          if (f < b.f || (f == b.f && (i < b.i || (i == b.i && j < b.j)))) b = {f, i, j, b.count};
        }
      }
    });
  }
  for (auto& t : pool) t.join();

  Best best;
  std::size_t count = 0;
  for (const auto& b : partial) {
    count += b.count;
    if (b.i < 0) continue;
    if (b.f < best.f || (b.f == best.f && (b.i < best.i || (b.i == best.i && b.j < best.j)))) {
      best = b;
    }
  }
  if (best.i < 0) throw std::domain_error("brute_force_grid: no feasible grid point");

  GridResult out;
  out.best_x = point(best.i, best.j);
  out.best_objective = best.f;
  out.points = count;
  for (int d = 0; d < 2; ++d) {
    double worst = 0.0;
    for (int s : {-1, 1}) {
      const long i = best.i + (d == 0 ? s : 0);
      const long j = best.j + (d == 1 ? s : 0);
      if (i < 0 || j < 0 || i + j > n) continue;
      const Eigen::VectorXd x = point(i, j);
      if (detail::grid_feasible(p, x)) worst = std::max(worst, std::abs(p.objective(x) - best.f));
    }
    out.resolution_bound += worst;
  }
  return out;
}

struct FdErrors {
  double gradient = 0.0;  ///< max |fd - analytic| / max |analytic|
  double hessian = 0.0;

  double max() const { return std::max(gradient, hessian); }
};

namespace detail {

template <class F>
FdErrors central_differences(F&& f, const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                             const Eigen::MatrixXd& h, double grad_step, double hess_step) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd gf(n);
  Eigen::MatrixXd hf(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += grad_step;
    b[i] -= grad_step;
    gf[i] = (f(a) - f(b)) / (2.0 * grad_step);
  }
  const double e = hess_step;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      auto at = [&](double si, double sj) {
        Eigen::VectorXd z = x;
        z[i] += si * e;
        z[j] += sj * e;
        return f(z);
      };
      hf(i, j) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * e * e);
      hf(j, i) = hf(i, j);
    }
  }
  FdErrors out;
  const double gs = g.cwiseAbs().maxCoeff();
  const double hs = h.cwiseAbs().maxCoeff();
  out.gradient = (gf - g).cwiseAbs().maxCoeff() / (gs > 0.0 ? gs : 1.0);
  out.hessian = (hf - h).cwiseAbs().maxCoeff() / (hs > 0.0 ? hs : 1.0);
  return out;
}

}  // namespace detail

/// Finite-difference check of the perspective gradient and of v v^T.
inline FdErrors perspective_fd_check(double gamma, double t, double y, double grad_step = 1e-6,
                                     double hess_step = 1e-5) {
  if (!(t > hess_step && y > hess_step)) {
    throw std::invalid_argument("perspective_fd_check: step must be below both coordinates");
  }
  const auto d = perspective_gradient(gamma, t, y);
  const Eigen::VectorXd x = Eigen::Vector2d(t, y);
  const Eigen::MatrixXd h = d.v * d.v.transpose();
  return detail::central_differences(
      [gamma](const Eigen::VectorXd& z) { return perspective_value(gamma, z[0], z[1]); }, x,
      Eigen::VectorXd(d.g), h, grad_step, hess_step);
}

struct FdReport {
  FdErrors barrier;           ///< F_tau
  FdErrors worst_term;        ///< worst perspective term of the program
  double linear_gradient = 0.0;  ///< worst linear-row gradient error

  double max() const { return std::max({barrier.max(), worst_term.max(), linear_gradient}); }
};

/// Compares the analytic gradient and Hessian of F_tau, of every perspective
/// term and of every linear row at a strictly interior x with central differences.
inline FdReport finite_diff_check(const ConvexProgram& p, const Eigen::VectorXd& x, double tau,
                                  double grad_step = 1e-6, double hess_step = 1e-5) {
  if (!strictly_interior(p, x)) throw std::invalid_argument("finite_diff_check: x not interior");
  FdReport out;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  barrier_derivatives(p, tau, x, g, h);
  out.barrier = detail::central_differences(
      [&](const Eigen::VectorXd& z) { return barrier_value(p, tau, z); }, x, g, h, grad_step,
      hess_step);

  auto check_terms = [&](const std::vector<PerspectiveTerm>& terms) {
    for (const auto& term : terms) {
      const auto e = perspective_fd_check(term.gamma, x[term.t_index], x[term.y_index], grad_step,
                                          hess_step);
      out.worst_term.gradient = std::max(out.worst_term.gradient, e.gradient);
      out.worst_term.hessian = std::max(out.worst_term.hessian, e.hessian);
    }
  };
  check_terms(p.objective_terms);
  for (const auto& e : p.epigraphs) check_terms(e.terms);

  // Linear rows have no domain, so a unit step removes the cancellation error.
  for (std::size_t j = p.epigraphs.size(); j < p.num_constraints(); ++j) {
    p.constraint_derivatives(j, x, g, h);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Eigen::VectorXd a = x, b = x;
      a[i] += 1.0;
      b[i] -= 1.0;
      const double fd = 0.5 * (p.constraint(j, a) - p.constraint(j, b));
      const double scale = std::max(1.0, std::abs(g[i]));
      out.linear_gradient = std::max(out.linear_gradient, std::abs(fd - g[i]) / scale);
    }
  }
  return out;
}

}  // namespace ehcoop
