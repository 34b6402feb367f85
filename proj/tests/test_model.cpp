#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "ehcoop/model.hpp"

using namespace ehcoop;

namespace {

bool same_program(const ConvexProgram& a, const ConvexProgram& b) {
  if (a.n_vars != b.n_vars || a.roles != b.roles) return false;
  if (a.objective_linear != b.objective_linear) return false;
  auto same_terms = [](const std::vector<PerspectiveTerm>& x, const std::vector<PerspectiveTerm>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].gamma != y[i].gamma || x[i].t_index != y[i].t_index ||
          x[i].y_index != y[i].y_index || x[i].coeff != y[i].coeff) {
        return false;
      }
    }
    return true;
  };
  if (!same_terms(a.objective_terms, b.objective_terms)) return false;
  if (a.epigraphs.size() != b.epigraphs.size() || a.linear.size() != b.linear.size()) return false;
  for (std::size_t i = 0; i < a.epigraphs.size(); ++i) {
    if (a.epigraphs[i].aux_index != b.epigraphs[i].aux_index) return false;
    if (!same_terms(a.epigraphs[i].terms, b.epigraphs[i].terms)) return false;
  }
  for (std::size_t i = 0; i < a.linear.size(); ++i) {
    if (a.linear[i].a != b.linear[i].a || a.linear[i].b != b.linear[i].b) return false;
  }
  return true;
}

}  // namespace

TEST(Channels, DefaultGeometry) {
  const auto ch = derive_channels(NetworkConfig{});
  EXPECT_DOUBLE_EQ(ch.h1, 1.0);
  EXPECT_DOUBLE_EQ(ch.h2, 0.25);
  EXPECT_DOUBLE_EQ(ch.hu, 1.0);
  EXPECT_DOUBLE_EQ(ch.gamma1, 1e4);
  EXPECT_DOUBLE_EQ(ch.gamma2, 2.5e3);
  EXPECT_DOUBLE_EQ(ch.gammaU, 1e4);
}

TEST(Channels, UnitDistanceAnyExponent) {
  for (double alpha : {1.0, 2.0, 3.7}) {
    NetworkConfig cfg;
    cfg.alpha = alpha;
    EXPECT_DOUBLE_EQ(derive_channels(cfg).h1, 1.0);
  }
}

TEST(Channels, HalfDistance) {
  NetworkConfig cfg;
  cfg.d1 = 0.5;
  EXPECT_DOUBLE_EQ(derive_channels(cfg).h1, 4.0);
}

TEST(Channels, RejectsBadInputs) {
  NetworkConfig cfg;
  cfg.du = 0.0;
  EXPECT_THROW(derive_channels(cfg), std::invalid_argument);
  cfg = NetworkConfig{};
  cfg.sigma2_D = 0.0;
  EXPECT_THROW(derive_channels(cfg), std::invalid_argument);
  cfg = NetworkConfig{};
  cfg.d1 = 2.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = NetworkConfig{};
  cfg.w1 = cfg.w2 = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(RhoMax, Values) {
  EXPECT_DOUBLE_EQ(rho_max(derive_channels(NetworkConfig{})), 0.75);
  ChannelState ch;
  ch.gamma2 = 0.0;
  ch.gammaU = 5.0;
  EXPECT_DOUBLE_EQ(rho_max(ch), 1.0);
  ch.gamma2 = 5.0;
  EXPECT_THROW(rho_max(ch), RelayNotBeneficial);
}

TEST(HarvestedEnergy, Values) {
  EXPECT_DOUBLE_EQ(harvested_rf_energy(100.0, 1.0, 1.0, 0.75, 0.5), 37.5);
  EXPECT_EQ(harvested_rf_energy(100.0, 1.0, 0.0, 0.75, 0.5), 0.0);
  EXPECT_EQ(harvested_rf_energy(100.0, 1.0, 0.4, 0.75, 0.0), 0.0);
  EXPECT_THROW(harvested_rf_energy(100.0, 1.0, 1.5, 0.75, 0.5), std::invalid_argument);
}

TEST(BuildProblem, RelayLayout) {
  const NetworkConfig cfg;
  const auto ch = derive_channels(cfg);
  const auto p = build_problem({Scenario::S1, Case::A, Objective::WeightedSum, 0.3}, cfg, ch);
  EXPECT_EQ(p.n_vars, 7u);
  EXPECT_EQ(p.epigraphs.size(), 2u);
  EXPECT_EQ(p.linear.size(), 4u);
  EXPECT_EQ(p.indices_with_role(VarRole::Time).size(), 3u);
  EXPECT_EQ(p.indices_with_role(VarRole::Energy).size(), 3u);
  EXPECT_EQ(p.indices_with_role(VarRole::Throughput).size(), 1u);
  // The U2 -> U1 hop sees only the information-decoding share of the signal.
  EXPECT_DOUBLE_EQ(p.epigraphs[1].terms[0].gamma, 0.7 * ch.gammaU);
}

TEST(BuildProblem, CommonThroughputAddsFairnessVariable) {
  const NetworkConfig cfg;
  const auto ch = derive_channels(cfg);
  const auto p = build_problem({Scenario::S1, Case::B, Objective::CommonThroughput, 0.2}, cfg, ch);
  EXPECT_EQ(p.n_vars, 8u);
  EXPECT_EQ(p.epigraphs.size(), 3u);
  EXPECT_EQ(p.linear.size(), 5u);
  const auto q = build_problem({Scenario::S3, Case::A, Objective::CommonThroughput, 0.0}, cfg, ch);
  EXPECT_EQ(q.n_vars, 5u);
  EXPECT_EQ(q.epigraphs.size(), 2u);
  EXPECT_TRUE(q.objective_terms.empty());
}

TEST(BuildProblem, NoHarvestBudgetsForS4A) {
  const NetworkConfig cfg;
  const auto p = build_problem({Scenario::S4, Case::A}, cfg, derive_channels(cfg));
  ASSERT_EQ(p.n_vars, 4u);
  ASSERT_EQ(p.linear.size(), 3u);
  // y1 <= X1 (1 - t1 - t2),  y2 <= X2 (1 - t2), energies in J
  Eigen::VectorXd a1(4), a2(4);
  a1 << 0.1, 0.1, 1.0, 0.0;
  a2 << 0.0, 0.1, 0.0, 1.0;
  EXPECT_TRUE(p.linear[0].a.isApprox(a1));
  EXPECT_DOUBLE_EQ(p.linear[0].b, 0.1);
  EXPECT_TRUE(p.linear[1].a.isApprox(a2));
  EXPECT_DOUBLE_EQ(p.linear[1].b, 0.1);
}

TEST(BuildProblem, SubstitutionIdentities) {
  NetworkConfig cfg;
  NetworkConfig no_eh = cfg;
  no_eh.eta = 0.0;
  const auto ch = derive_channels(cfg);
  for (auto c : kAllCases) {
    for (auto obj : {Objective::WeightedSum, Objective::CommonThroughput}) {
      EXPECT_TRUE(same_program(build_problem({Scenario::S2, c, obj}, cfg, ch),
                               build_problem({Scenario::S1, c, obj, 0.0}, no_eh, ch)));
      EXPECT_TRUE(same_program(build_problem({Scenario::S4, c, obj}, cfg, ch),
                               build_problem({Scenario::S3, c, obj}, no_eh, ch)));
    }
  }
}

TEST(BuildProblem, SingleInterUserGain) {
  NetworkConfig cfg;
  cfg.du = 0.8;
  const auto ch = derive_channels(cfg);
  const double rho = 0.4;
  const auto p = build_problem({Scenario::S1, Case::B, Objective::WeightedSum, rho}, cfg, ch);
  for (const auto& e : p.epigraphs) {
    for (const auto& t : e.terms) {
      EXPECT_TRUE(t.gamma == ch.gamma1 || t.gamma == ch.gamma2 || t.gamma == (1 - rho) * ch.gammaU);
    }
  }
  for (const auto& l : p.linear) {
    for (Eigen::Index i = 3; i < 6; ++i) {
      const double a = l.a[i];
      EXPECT_TRUE(a == 0.0 || a == 1.0 || a == -cfg.eta * rho * ch.hu) << a;
    }
  }
}

TEST(BuildProblem, Rejections) {
  NetworkConfig cfg;
  const auto ch = derive_channels(cfg);
  EXPECT_THROW(build_problem({Scenario::S3, Case::A, Objective::WeightedSum, 0.2}, cfg, ch),
               std::invalid_argument);
  EXPECT_THROW(build_problem({Scenario::S1, Case::A, Objective::WeightedSum, 0.75}, cfg, ch),
               std::invalid_argument);
  cfg.du = 2.5;  // inter-user link weaker than the far user's direct link
  const auto weak = derive_channels(cfg);
  EXPECT_THROW(build_problem({Scenario::S1, Case::A}, cfg, weak), RelayNotBeneficial);
  EXPECT_THROW(build_problem({Scenario::S2, Case::B}, cfg, weak), RelayNotBeneficial);
  EXPECT_NO_THROW(build_problem({Scenario::S3, Case::B}, cfg, weak));
}

TEST(Throughputs, DirectUserReference) {
  const NetworkConfig cfg;
  const auto ch = derive_channels(cfg);
  const ScenarioSpec spec{Scenario::S4, Case::A};
  Allocation a;
  a.x = Eigen::Vector4d(0.5, 0.0, 0.05, 0.0);
  const auto b = throughputs_from_allocation(spec, cfg, ch, a);
  EXPECT_NEAR(b.B1, 0.5 * std::log2(1001.0), 1e-12);
  EXPECT_NEAR(b.B1, 4.98361, 1e-5);
  EXPECT_EQ(b.B2, 0.0);
}

TEST(Throughputs, NoEnergyNoBits) {
  const NetworkConfig cfg;
  const auto ch = derive_channels(cfg);
  for (auto s : kAllScenarios) {
    const ScenarioSpec spec{s, Case::B};
    const auto p = build_problem(spec, cfg, ch);
    Allocation a;
    a.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.n_vars));
    for (auto i : p.indices_with_role(VarRole::Time)) a.x[i] = 0.2;
    const auto b = throughputs_from_allocation(spec, cfg, ch, a);
    EXPECT_EQ(b.B1, 0.0);
    EXPECT_EQ(b.B2, 0.0);
  }
}

TEST(Throughputs, DirectLinkBindsForRelayedUser) {
  const NetworkConfig cfg;
  const auto ch = derive_channels(cfg);
  const ScenarioSpec spec{Scenario::S1, Case::A, Objective::WeightedSum, 0.0};
  Allocation a;
  a.x.resize(7);
  a.x << 0.2, 0.3, 0.0, 0.01, 0.02, 0.0, 0.0;
  const auto b = throughputs_from_allocation(spec, cfg, ch, a);
  EXPECT_NEAR(b.B2, 0.3 * std::log2(1.0 + ch.gamma2 * 0.02 / 0.3), 1e-12);
  EXPECT_NEAR(b.B1, 0.2 * std::log2(1.0 + ch.gamma1 * 0.01 / 0.2), 1e-12);
}

TEST(Throughputs, MonotoneInEnergy) {
  const NetworkConfig cfg;
  const auto ch = derive_channels(cfg);
  const ScenarioSpec spec{Scenario::S1, Case::A, Objective::WeightedSum, 0.3};
  Allocation a;
  a.x.resize(7);
  a.x << 0.2, 0.2, 0.2, 0.005, 0.005, 0.005, 0.0;
  auto prev = throughputs_from_allocation(spec, cfg, ch, a);
  for (int k = 0; k < 10; ++k) {
    a.x[3 + k % 3] += 0.001;
    const auto cur = throughputs_from_allocation(spec, cfg, ch, a);
    EXPECT_GE(cur.B1, prev.B1);
    EXPECT_GE(cur.B2, prev.B2);
    prev = cur;
  }
}

TEST(Throughputs, RejectsInfeasibleAllocation) {
  const NetworkConfig cfg;
  const auto ch = derive_channels(cfg);
  Allocation a;
  a.x = Eigen::Vector4d(0.5, 0.3, 0.05, 0.0);  // U1 spends more than it stores
  EXPECT_THROW(throughputs_from_allocation({Scenario::S4, Case::A}, cfg, ch, a), InfeasibleAllocation);
  a.x = Eigen::Vector4d(0.5, -0.1, 0.01, 0.0);
  EXPECT_THROW(throughputs_from_allocation({Scenario::S4, Case::A}, cfg, ch, a), InfeasibleAllocation);
}
