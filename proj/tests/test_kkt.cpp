#include <gtest/gtest.h>

#include "ehcoop/kkt.hpp"
#include "ehcoop/model.hpp"
#include "ehcoop/newton_barrier.hpp"

using namespace ehcoop;

TEST(Nnls, InteriorSolutionIsLeastSquares) {
  Eigen::MatrixXd A(3, 2);
  A << 1, 0, 0, 1, 1, 1;
  const Eigen::VectorXd b = Eigen::Vector3d(1, 2, 3);
  const auto x = nnls(A, b);
  EXPECT_NEAR(x[0], 1.0, 1e-12);
  EXPECT_NEAR(x[1], 2.0, 1e-12);
}

TEST(Nnls, ClampsNegativeComponents) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::VectorXd b = Eigen::Vector2d(-1.0, 0.5);
  const auto x = nnls(A, b);
  EXPECT_EQ(x[0], 0.0);
  EXPECT_NEAR(x[1], 0.5, 1e-14);
}

TEST(Nnls, MatchesBruteForceOnSmallProblem) {
  // min ||A x - b|| over x >= 0 where the unconstrained optimum has x1 < 0.
  Eigen::MatrixXd A(3, 2);
  A << 1, 2, 3, 4, 5, 6;
  const Eigen::VectorXd b = Eigen::Vector3d(1, 1, 2);
  const auto x = nnls(A, b);
  double best = 1e300;
  for (int i = 0; i <= 2000; ++i) {
    for (int j = 0; j <= 2000; ++j) {
      const Eigen::Vector2d z(i * 5e-4, j * 5e-4);
      best = std::min(best, (A * z - b).squaredNorm());
    }
  }
  EXPECT_LE((A * x - b).squaredNorm(), best + 1e-12);
  EXPECT_GE(x.minCoeff(), 0.0);
}

TEST(KktCertificate, ZeroAtOptimumOfLinearProgram) {
  ConvexProgram p;
  p.n_vars = 2;
  p.roles = {VarRole::Time, VarRole::Time};
  p.objective_linear = Eigen::Vector2d(-1.0, -2.0);
  p.linear.push_back({Eigen::Vector2d(1, 1), 1.5, "x0 + x1 <= 1.5"});
  const auto at_opt = kkt_certificate(p, Eigen::Vector2d(0.0, 1.5));
  EXPECT_LE(at_opt.residual(), 1e-14);
  EXPECT_NEAR(at_opt.multipliers[0], 2.0, 1e-12);  // budget row
  EXPECT_NEAR(at_opt.multipliers[1], 1.0, 1e-12);  // x0 >= 0
  EXPECT_GT(kkt_certificate(p, Eigen::Vector2d(0.5, 1.0)).residual(), 0.1);
  EXPECT_GT(kkt_certificate(p, Eigen::Vector2d(0.1, 0.1)).residual(), 0.1);
}

TEST(KktCertificate, SmallAtBarrierSolution) {
  const NetworkConfig cfg;
  const auto p = build_problem({Scenario::S1, Case::A, Objective::CommonThroughput, 0.3}, cfg,
                               derive_channels(cfg));
  const auto r = solve_nb(p);
  const auto c = kkt_certificate(p, r.x_star.x);
  EXPECT_LE(c.residual(), 1e-6);
  EXPECT_GT(kkt_certificate(p, initial_point(p).x).residual(), 1e-3);
}
