#pragma once

// Calculus of the logarithmic perspective l(t, y) = -t * ln(1 + gamma * y / t).
//
// The function is the perspective of the convex map y -> -ln(1 + gamma * y),
// hence jointly convex in (t, y) for t > 0. Its Hessian is rank one:
//
//   H = v v^T,  v = [ gamma*y / (sqrt(t) (t + gamma*y)),  -gamma*sqrt(t) / (t + gamma*y) ]
//
// All values are in nats.

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace ehcoop {

/// Gradient and rank-1 Hessian factor of the perspective at a point.
struct PerspectiveDerivatives {
  Eigen::Vector2d g;  ///< [dl/dt, dl/dy]
  Eigen::Vector2d v;  ///< Hessian = v * v^T
};

/// -t ln(1 + gamma y / t). Defined as 0 on the edge t = 0.
inline double perspective_value(double gamma, double t, double y) {
  if (t < 0.0 || y < 0.0) {
    throw std::invalid_argument("perspective_value: negative time or energy");
  }
  if (t == 0.0 || y == 0.0) return 0.0;
  return -t * std::log1p(gamma * y / t);
}

inline PerspectiveDerivatives perspective_gradient(double gamma, double t, double y) {
  if (!(t > 0.0)) {
    throw std::invalid_argument("perspective_gradient: time must be positive");
  }
  const double s = t + gamma * y;
  const double sqrt_t = std::sqrt(t);
  PerspectiveDerivatives d;
  d.g << -std::log1p(gamma * y / t) + gamma * y / s, -gamma * t / s;
  d.v << gamma * y / (sqrt_t * s), -gamma * sqrt_t / s;
  return d;
}

/// Closed-form Hessian, written out entrywise. Used to cross-check v v^T.
inline Eigen::Matrix2d perspective_hessian(double gamma, double t, double y) {
  if (!(t > 0.0)) {
    throw std::invalid_argument("perspective_hessian: time must be positive");
  }
  const double s = t + gamma * y;
  const double s2 = s * s;
  Eigen::Matrix2d h;
  h(0, 0) = gamma * gamma * y * y / (t * s2);
  h(0, 1) = -gamma * gamma * y / s2;
  h(1, 0) = h(0, 1);
  h(1, 1) = gamma * gamma * t / s2;
  return h;
}

}  // namespace ehcoop
