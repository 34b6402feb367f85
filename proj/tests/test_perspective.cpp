#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ehcoop/perspective.hpp"

using namespace ehcoop;

TEST(Perspective, ValueAtReferencePoint) {
  EXPECT_NEAR(perspective_value(1e4, 0.5, 0.05), -0.5 * std::log(1001.0), 1e-12);
  EXPECT_NEAR(perspective_value(1e4, 0.5, 0.05), -3.4543, 1e-4);
}

TEST(Perspective, ZeroOnEdges) {
  EXPECT_EQ(perspective_value(7.0, 1.0, 0.0), 0.0);
  EXPECT_EQ(perspective_value(7.0, 0.0, 1.0), 0.0);
  EXPECT_EQ(perspective_value(7.0, 0.0, 0.0), 0.0);
}

TEST(Perspective, RejectsNegativeInputs) {
  EXPECT_THROW(perspective_value(1.0, -0.1, 0.1), std::invalid_argument);
  EXPECT_THROW(perspective_value(1.0, 0.1, -0.1), std::invalid_argument);
  EXPECT_THROW(perspective_gradient(1.0, 0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(perspective_hessian(1.0, -1.0, 0.1), std::invalid_argument);
}

TEST(Perspective, GradientAtUnitPoint) {
  const auto d = perspective_gradient(1.0, 1.0, 1.0);
  EXPECT_NEAR(d.g[0], -std::log(2.0) + 0.5, 1e-15);
  EXPECT_NEAR(d.g[0], -0.19315, 1e-5);
  EXPECT_NEAR(d.g[1], -0.5, 1e-15);
  EXPECT_NEAR(d.v[0], 0.5, 1e-15);
  EXPECT_NEAR(d.v[1], -0.5, 1e-15);
}

TEST(Perspective, GradientWithoutEnergy) {
  const double gamma = 3.0, t = 0.25;
  const auto d = perspective_gradient(gamma, t, 0.0);
  EXPECT_EQ(d.g[0], 0.0);
  EXPECT_DOUBLE_EQ(d.g[1], -gamma);
  EXPECT_EQ(d.v[0], 0.0);
  EXPECT_DOUBLE_EQ(d.v[1], -gamma * std::sqrt(t) / t);
}

TEST(Perspective, CentralDifferenceGradient) {
  const double gamma = 1e4, t = 0.5, y = 0.05, h = 1e-6;
  const auto d = perspective_gradient(gamma, t, y);
  const double gt = (perspective_value(gamma, t + h, y) - perspective_value(gamma, t - h, y)) / (2 * h);
  const double gy = (perspective_value(gamma, t, y + h) - perspective_value(gamma, t, y - h)) / (2 * h);
  EXPECT_LE(std::abs(gt - d.g[0]) / std::abs(d.g[0]), 1e-6);
  EXPECT_LE(std::abs(gy - d.g[1]) / std::abs(d.g[1]), 1e-6);
}

TEST(Perspective, RankOneFactorMatchesHessian) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lg(-2.0, 5.0), ut(0.01, 1.0), uy(0.0, 0.2);
  for (int i = 0; i < 200; ++i) {
    const double gamma = std::pow(10.0, lg(rng)), t = ut(rng), y = uy(rng);
    const auto d = perspective_gradient(gamma, t, y);
    const Eigen::Matrix2d vv = d.v * d.v.transpose();
    const Eigen::Matrix2d h = perspective_hessian(gamma, t, y);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        EXPECT_NEAR(vv(r, c), h(r, c), 1e-12 * std::max(1.0, std::abs(h(r, c))));
      }
    }
  }
}

TEST(Perspective, PositivelyHomogeneous) {
  for (double s : {0.1, 0.5, 3.0, 40.0}) {
    EXPECT_NEAR(perspective_value(250.0, s * 0.3, s * 0.02), s * perspective_value(250.0, 0.3, 0.02),
                1e-12 * s);
  }
}

TEST(Perspective, ConvexAlongSegments) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(0.01, 1.0), uy(0.0, 0.1), ul(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double t1 = ut(rng), y1 = uy(rng), t2 = ut(rng), y2 = uy(rng), l = ul(rng);
    const double mid = perspective_value(1e4, l * t1 + (1 - l) * t2, l * y1 + (1 - l) * y2);
    const double chord = l * perspective_value(1e4, t1, y1) + (1 - l) * perspective_value(1e4, t2, y2);
    EXPECT_LE(mid, chord + 1e-10);
  }
}
