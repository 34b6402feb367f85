#pragma once

// Solver-independent optimality certificate: the smallest KKT residual over
// nonnegative multipliers, found by nonnegative least squares on
//
//   [ grad c_1 ... grad c_m ]           [ -grad f ]
//   [ diag(c_1, ..., c_m)   ] lambda  ~ [    0    ],   lambda >= 0,
//
// where the rows c include -x_i <= 0 for bounded coordinates.

#include <algorithm>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "ehcoop/smooth_problem.hpp"

namespace ehcoop {

/// Lawson-Hanson active-set method for min ||A x - b|| subject to x >= 0.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const Eigen::Index n = A.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-14 * (1.0 + A.norm() * b.norm());
  const int cap = 3 * static_cast<int>(n) + 10;
  for (int outer = 0; outer < cap; ++outer) {
    const Eigen::VectorXd w = A.transpose() * (b - A * x);
    Eigen::Index enter = -1;
    double best = tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!passive[static_cast<std::size_t>(i)] && w[i] > best) {
        best = w[i];
        enter = i;
      }
    }
    if (enter < 0) break;
    passive[static_cast<std::size_t>(enter)] = true;
    for (int inner = 0; inner < cap; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
      }
      Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
      const Eigen::VectorXd zp = Ap.completeOrthogonalDecomposition().solve(b);
      Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
      bool positive = true;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        z[idx[k]] = zp[static_cast<Eigen::Index>(k)];
        positive = positive && z[idx[k]] > 0.0;
      }
      if (positive) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (auto i : idx) {
        if (z[i] <= 0.0) alpha = std::min(alpha, x[i] / (x[i] - z[i]));
      }
      x += alpha * (z - x);
      for (auto i : idx) {
        if (x[i] <= 0.0) {
          passive[static_cast<std::size_t>(i)] = false;
          x[i] = 0.0;
        }
      }
    }
  }
  return x;
}

struct KktCertificate {
  double stationarity = 0.0;     ///< ||grad f + sum lambda_j grad c_j||_inf / (1 + ||grad f||_inf)
  double complementarity = 0.0;  ///< max lambda_j |c_j|, same scaling
  Eigen::VectorXd multipliers;   ///< rows, then bounded coordinates

  double residual() const { return std::max(stationarity, complementarity); }
};

template <SmoothConvexProblem P>
KktCertificate kkt_certificate(const P& p, const Eigen::VectorXd& x) {
  const auto n = static_cast<Eigen::Index>(p.num_vars());
  Eigen::VectorXd gf, gc;
  Eigen::MatrixXd h;
  p.objective_derivatives(x, gf, h);
  std::vector<Eigen::VectorXd> grads;
  std::vector<double> values;
  for (std::size_t j = 0; j < p.num_constraints(); ++j) {
    p.constraint_derivatives(j, x, gc, h);
    grads.push_back(gc);
    values.push_back(p.constraint(j, x));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!p.barrier_bounded(static_cast<std::size_t>(i))) continue;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[i] = -1.0;
    grads.push_back(e);
    values.push_back(-x[i]);
  }
  const auto m = static_cast<Eigen::Index>(grads.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + m);
  for (Eigen::Index k = 0; k < m; ++k) {
    A.block(0, k, n, 1) = grads[static_cast<std::size_t>(k)];
    A(n + k, k) = values[static_cast<std::size_t>(k)];
  }
  b.head(n) = -gf;

  KktCertificate out;
  out.multipliers = nnls(A, b);
  const double scale = 1.0 + gf.lpNorm<Eigen::Infinity>();
  const Eigen::VectorXd r = A * out.multipliers - b;
  out.stationarity = r.head(n).lpNorm<Eigen::Infinity>() / scale;
  out.complementarity = m > 0 ? r.tail(m).lpNorm<Eigen::Infinity>() / scale : 0.0;
  return out;
}

}  // namespace ehcoop
