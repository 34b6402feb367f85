#include <cmath>
#include <cstdio>
#include <random>

#include <gtest/gtest.h>

#include "ehcoop/model.hpp"
#include "ehcoop/newton_barrier.hpp"
#include "ehcoop/oracle.hpp"

using namespace ehcoop;

namespace {

ConvexProgram program(Scenario s, Case c, Objective o, const NetworkConfig& cfg = {}) {
  return build_problem({s, c, o, 0.0}, cfg, derive_channels(cfg));
}

}  // namespace

TEST(BruteForceGrid, AgreesWithBarrierSolver) {
  for (auto s : {Scenario::S3, Scenario::S4}) {
    for (auto c : kAllCases) {
      for (auto o : {Objective::WeightedSum, Objective::CommonThroughput}) {
        const auto p = program(s, c, o);
        const auto g = brute_force_grid(p);
        const auto nb = solve_nb(p);
        ASSERT_EQ(nb.status, SolveStatus::Converged);
        std::printf("%s-%s %-6s grid %.9f  nb %.9f  bound %.2e\n", to_string(s).c_str(),
                    to_string(c).c_str(), to_string(o).c_str(), g.best_objective,
                    nb.objective_nats, g.resolution_bound);
        EXPECT_LE(nb.objective_nats, g.best_objective + 1e-9);
        EXPECT_LE(g.best_objective - nb.objective_nats, g.resolution_bound);
      }
    }
  }
}

TEST(BruteForceGrid, BestPointIsFeasibleAsEvaluated) {
  const auto p = program(Scenario::S3, Case::A, Objective::CommonThroughput);
  const auto g = brute_force_grid(p, GridSpec{0.01});
  for (std::size_t j = 0; j < p.num_constraints(); ++j) EXPECT_LE(p.constraint(j, g.best_x), 0.0);
  EXPECT_EQ(p.objective(g.best_x), g.best_objective);
}

TEST(BruteForceGrid, ZeroArrivalsGiveZeroThroughput) {
  NetworkConfig cfg;
  cfg.X1 = 0.0;
  cfg.X2 = 0.0;
  const auto g = brute_force_grid(program(Scenario::S4, Case::A, Objective::WeightedSum, cfg),
                                  GridSpec{0.01});
  EXPECT_NEAR(g.best_objective, 0.0, 1e-6);
}

TEST(BruteForceGrid, EnergyCooperationNeverHurts) {
  for (auto o : {Objective::WeightedSum, Objective::CommonThroughput}) {
    const auto s3 = brute_force_grid(program(Scenario::S3, Case::A, o), GridSpec{0.005});
    const auto s4 = brute_force_grid(program(Scenario::S4, Case::A, o), GridSpec{0.005});
    EXPECT_LE(s3.best_objective, s4.best_objective);
  }
}

TEST(BruteForceGrid, RefinementNeverWorsens) {
  const auto p = program(Scenario::S4, Case::B, Objective::WeightedSum);
  const auto coarse = brute_force_grid(p, GridSpec{0.01});
  const auto fine = brute_force_grid(p, GridSpec{0.005});
  EXPECT_LE(fine.best_objective, coarse.best_objective);
  EXPECT_GE(fine.best_objective, coarse.best_objective - coarse.resolution_bound);
}

TEST(BruteForceGrid, ThreadCountDoesNotChangeResult) {
  const auto p = program(Scenario::S3, Case::B, Objective::WeightedSum);
  const auto a = brute_force_grid(p, GridSpec{0.01, 1e8, 1});
  const auto b = brute_force_grid(p, GridSpec{0.01, 1e8, 3});
  EXPECT_EQ(a.best_objective, b.best_objective);
  EXPECT_EQ(a.best_x, b.best_x);
  EXPECT_EQ(a.points, b.points);
}

TEST(BruteForceGrid, Rejections) {
  const auto p = program(Scenario::S4, Case::A, Objective::WeightedSum);
  EXPECT_THROW(brute_force_grid(p, GridSpec{1e-5}), std::length_error);
  EXPECT_THROW(brute_force_grid(p, GridSpec{0.0}), std::invalid_argument);
  const auto relay = build_problem({Scenario::S2, Case::A}, NetworkConfig{}, derive_channels({}));
  EXPECT_THROW(brute_force_grid(relay), std::invalid_argument);
}

TEST(FiniteDifferences, PerspectiveAtReferencePoint) {
  const auto e = perspective_fd_check(1e4, 0.5, 0.05);
  EXPECT_LE(e.gradient, 1e-6);
  EXPECT_LE(e.hessian, 1e-4);
}

TEST(FiniteDifferences, PerspectiveAtRandomPoints) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> log_gamma(std::log(1e3), std::log(3e5));
  std::uniform_real_distribution<double> t(0.02, 1.0);
  std::uniform_real_distribution<double> y(1e-3, 0.3);
  double worst_g = 0.0, worst_h = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto e = perspective_fd_check(std::exp(log_gamma(rng)), t(rng), y(rng));
    worst_g = std::max(worst_g, e.gradient);
    worst_h = std::max(worst_h, e.hessian);
  }
  std::printf("worst gradient %.2e  worst Hessian %.2e\n", worst_g, worst_h);
  EXPECT_LE(worst_g, 1e-6);
  EXPECT_LE(worst_h, 1e-4);
}

TEST(FiniteDifferences, BarrierOnRelayProgram) {
  const NetworkConfig cfg;
  const auto p = build_problem({Scenario::S1, Case::A, Objective::WeightedSum, 0.3}, cfg,
                               derive_channels(cfg));
  const auto x0 = initial_point(p).x;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> scale(0.3, 1.0);
  int checked = 0;
  while (checked < 20) {
    Eigen::VectorXd x = x0;
    for (std::size_t i = 0; i < p.n_vars; ++i) {
      if (p.barrier_bounded(i)) x[static_cast<Eigen::Index>(i)] *= scale(rng);
    }
    x = below_throughput_bounds(p, x, 0.2);
    if (!strictly_interior(p, x)) continue;
    const auto r = finite_diff_check(p, x, 10.0);
    EXPECT_LE(r.barrier.gradient, 1e-6);
    EXPECT_LE(r.barrier.hessian, 1e-4);
    EXPECT_LE(r.worst_term.gradient, 1e-6);
    EXPECT_LE(r.worst_term.hessian, 1e-4);
    EXPECT_LE(r.linear_gradient, 1e-14);
    ++checked;
  }
}

TEST(FiniteDifferences, RejectsBoundaryPoint) {
  const auto p = program(Scenario::S4, Case::A, Objective::WeightedSum);
  Eigen::VectorXd x = initial_point(p).x;
  x[0] = 0.0;
  EXPECT_THROW(finite_diff_check(p, x, 1.0), std::invalid_argument);
  EXPECT_THROW(perspective_fd_check(1e4, 1e-6, 0.1), std::invalid_argument);
}
