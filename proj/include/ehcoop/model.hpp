#pragma once

// Physical model of the two-user energy-harvesting network and the builder
// that turns a (scenario, case, objective, rho) choice into a ConvexProgram.
//
// Scenarios:  S1 data + energy cooperation, S2 data only, S3 energy only, S4 none.
// Cases:      A = near user U1 transmits first, B = far user U2 transmits first.
//
// Variable layouts
//   S1/S2: (t1, t2, t3, y1, y2, y3, B)      [+ Bbar for common throughput]
//   S3/S4: (t1, t2, y1, y2)                 [+ Bbar for common throughput]
// with y = P t the energy spent in each interval and t0 = 1 - sum(t).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "ehcoop/convex_program.hpp"

namespace ehcoop {

enum class Scenario { S1, S2, S3, S4 };
enum class Case { A, B };
enum class Objective { WeightedSum, CommonThroughput };

inline constexpr std::array<Scenario, 4> kAllScenarios = {Scenario::S1, Scenario::S2,
                                                          Scenario::S3, Scenario::S4};
inline constexpr std::array<Case, 2> kAllCases = {Case::A, Case::B};

/// Energy arrival rates below this (mW) are treated as empty budgets and
/// floored so the program keeps a strict interior.
inline constexpr double kEnergyFloorMilliwatt = 1e-9;

/// Raised when the inter-user channel is not better than the far user's direct link.
class RelayNotBeneficial : public std::domain_error {
 public:
  RelayNotBeneficial() : std::domain_error("relay not beneficial: gammaU <= gamma2") {}
};

class InfeasibleAllocation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::S1: return "S1";
    case Scenario::S2: return "S2";
    case Scenario::S3: return "S3";
    case Scenario::S4: return "S4";
  }
  return "?";
}

inline std::string to_string(Case c) { return c == Case::A ? "A" : "B"; }

inline std::string to_string(Objective o) {
  return o == Objective::WeightedSum ? "sum" : "common";
}

/// Physical scenario. Distances are dimensionless, noise powers in W, energy
/// arrival rates in mW (mJ per unit-length block).
struct NetworkConfig {
  double d1 = 1.0;
  double d2 = 2.0;
  double du = 1.0;
  double alpha = 2.0;
  double lambda = 1.0;
  double sigma2_D = 1e-4;
  double sigma2_U1 = 1e-4;
  double sigma2_U2 = 1e-4;
  double eta = 0.75;
  double X1 = 100.0;
  double X2 = 100.0;
  double w1 = 1.0;
  double w2 = 1.0;

  void validate() const {
    if (!(d1 > 0.0 && d2 > 0.0 && du > 0.0)) {
      throw std::invalid_argument("NetworkConfig: distances must be positive");
    }
    if (!(d1 < d2)) throw std::invalid_argument("NetworkConfig: requires d1 < d2");
    if (!(sigma2_D > 0.0 && sigma2_U1 > 0.0 && sigma2_U2 > 0.0)) {
      throw std::invalid_argument("NetworkConfig: noise powers must be positive");
    }
    if (!(lambda > 0.0)) throw std::invalid_argument("NetworkConfig: lambda must be positive");
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("NetworkConfig: eta outside [0,1]");
    if (!(X1 >= 0.0 && X2 >= 0.0)) {
      throw std::invalid_argument("NetworkConfig: energy arrival rates must be >= 0");
    }
    if (!(w1 >= 0.0 && w2 >= 0.0) || (w1 == 0.0 && w2 == 0.0)) {
      throw std::invalid_argument("NetworkConfig: weights must be >= 0 and not both zero");
    }
  }
};

struct ChannelState {
  double h1 = 0.0;
  double h2 = 0.0;
  double hu = 0.0;  ///< reciprocal inter-user gain, h12 = h21
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gammaU = 0.0;
};

struct ScenarioSpec {
  Scenario scenario = Scenario::S1;
  Case case_ = Case::A;
  Objective objective = Objective::WeightedSum;
  double rho = 0.0;  ///< power-splitting ratio at U1; only meaningful for S1
};

inline ChannelState derive_channels(const NetworkConfig& cfg) {
  if (!(cfg.d1 > 0.0 && cfg.d2 > 0.0 && cfg.du > 0.0)) {
    throw std::invalid_argument("derive_channels: distances must be positive");
  }
  if (!(cfg.sigma2_D > 0.0 && cfg.sigma2_U1 > 0.0)) {
    throw std::invalid_argument("derive_channels: noise powers must be positive");
  }
  ChannelState ch;
  ch.h1 = cfg.lambda * std::pow(cfg.d1, -cfg.alpha);
  ch.h2 = cfg.lambda * std::pow(cfg.d2, -cfg.alpha);
  ch.hu = cfg.lambda * std::pow(cfg.du, -cfg.alpha);
  ch.gamma1 = ch.h1 / cfg.sigma2_D;
  ch.gamma2 = ch.h2 / cfg.sigma2_D;
  ch.gammaU = ch.hu / cfg.sigma2_U1;
  return ch;
}

/// Upper limit (exclusive) on rho for which relaying still beats the direct link.
inline double rho_max(const ChannelState& ch) {
  if (!(ch.gammaU > ch.gamma2)) throw RelayNotBeneficial();
  return 1.0 - ch.gamma2 / ch.gammaU;
}

inline bool relay_beneficial(const ChannelState& ch) { return ch.gammaU > ch.gamma2; }

/// Energy harvested from an RF signal of power P over duration t.
inline double harvested_rf_energy(double power, double gain, double rho, double eta,
                                  double duration) {
  if (power < 0.0 || gain < 0.0 || rho < 0.0 || eta < 0.0 || duration < 0.0 || rho > 1.0 ||
      eta > 1.0) {
    throw std::invalid_argument("harvested_rf_energy: argument out of range");
  }
  return eta * rho * power * gain * duration;
}

inline bool is_relay_scenario(Scenario s) { return s == Scenario::S1 || s == Scenario::S2; }

namespace detail {

struct Coefficients {
  double X1 = 0.0;  // J per block
  double X2 = 0.0;
  double eta = 0.0;
  double rho = 0.0;
  bool floored = false;
};

inline Coefficients effective_coefficients(const ScenarioSpec& spec, const NetworkConfig& cfg) {
  Coefficients c;
  const double x1 = std::max(cfg.X1, kEnergyFloorMilliwatt);
  const double x2 = std::max(cfg.X2, kEnergyFloorMilliwatt);
  c.floored = x1 != cfg.X1 || x2 != cfg.X2;
  c.X1 = x1 * 1e-3;
  c.X2 = x2 * 1e-3;
  c.eta = (spec.scenario == Scenario::S2 || spec.scenario == Scenario::S4) ? 0.0 : cfg.eta;
  c.rho = spec.scenario == Scenario::S1 ? spec.rho : 0.0;
  return c;
}

inline Eigen::VectorXd row(std::initializer_list<double> v, std::size_t n) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::Index i = 0;
  for (double e : v) r[i++] = e;
  return r;
}

}  // namespace detail

/// Builds the convex program for one scenario/case/objective/rho combination.
/// The objective is in nats and follows the minimization convention.
inline ConvexProgram build_problem(const ScenarioSpec& spec, const NetworkConfig& cfg,
                                   const ChannelState& ch) {
  cfg.validate();
  if (spec.scenario != Scenario::S1 && spec.rho != 0.0) {
    throw std::invalid_argument("build_problem: rho must be 0 outside S1");
  }
  if (is_relay_scenario(spec.scenario)) {
    const double limit = rho_max(ch);  // throws when relaying is useless
    if (!(spec.rho >= 0.0 && spec.rho < limit)) {
      throw std::invalid_argument("build_problem: rho outside [0, rho_max)");
    }
  }

  const auto k = detail::effective_coefficients(spec, cfg);
  const bool common = spec.objective == Objective::CommonThroughput;
  ConvexProgram p;
  p.floored_energy = k.floored;

  if (is_relay_scenario(spec.scenario)) {
    p.n_vars = common ? 8 : 7;
    p.roles = {VarRole::Time,   VarRole::Time,   VarRole::Time,      VarRole::Energy,
               VarRole::Energy, VarRole::Energy, VarRole::Throughput};
    p.names = {"t1", "t2", "t3", "y1", "y2", "y3", "B"};
    const std::size_t n = p.n_vars;
    constexpr std::size_t B = 6;
    const double relay_gamma = (1.0 - k.rho) * ch.gammaU;
    const double ps_harvest = k.eta * k.rho * ch.hu;

    PerspectiveTerm own;  // U1's own message
    if (spec.case_ == Case::A) {
      own = {ch.gamma1, 0, 3, 1.0};
      p.epigraphs.push_back({B, {{ch.gamma2, 1, 4, 1.0}, {ch.gamma1, 2, 5, 1.0}}, "B <= direct + relayed"});
      p.epigraphs.push_back({B, {{relay_gamma, 1, 4, 1.0}}, "B <= U2->U1 link"});
      // U2 harvests everything U1 radiates during t1; U1 splits U2's signal with rho.
      p.linear.push_back({detail::row({k.X1, k.X1, k.X1, 1.0, 0, 0, 0}, n), k.X1, "U1 budget t1"});
      p.linear.push_back({detail::row({0, k.X2, k.X2, -k.eta * ch.hu, 1.0, 0, 0}, n), k.X2, "U2 budget t2"});
      p.linear.push_back({detail::row({0, 0, k.X1, 1.0, -ps_harvest, 1.0, 0}, n), k.X1, "U1 budget t3"});
    } else {
      own = {ch.gamma1, 2, 5, 1.0};
      p.epigraphs.push_back({B, {{ch.gamma2, 0, 3, 1.0}, {ch.gamma1, 1, 4, 1.0}}, "B <= direct + relayed"});
      p.epigraphs.push_back({B, {{relay_gamma, 0, 3, 1.0}}, "B <= U2->U1 link"});
      p.linear.push_back({detail::row({k.X2, k.X2, k.X2, 1.0, 0, 0, 0}, n), k.X2, "U2 budget t1"});
      p.linear.push_back({detail::row({0, k.X1, k.X1, -ps_harvest, 1.0, 0, 0}, n), k.X1, "U1 budget t2"});
      p.linear.push_back({detail::row({0, 0, k.X1, -ps_harvest, 1.0, 1.0, 0}, n), k.X1, "U1 budget t3"});
    }
    p.linear.push_back({detail::row({1.0, 1.0, 1.0, 0, 0, 0, 0}, n), 1.0, "sum t <= 1"});

    p.objective_linear = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    if (common) {
      p.roles.push_back(VarRole::Throughput);
      p.names.push_back("Bbar");
      constexpr std::size_t Bbar = 7;
      p.objective_linear[Bbar] = -1.0;
      p.epigraphs.push_back({Bbar, {own}, "Bbar <= B1"});
      Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      a[Bbar] = 1.0;
      a[B] = -1.0;
      p.linear.push_back({a, 0.0, "Bbar <= B2"});
    } else {
      own.coeff = cfg.w1;
      if (cfg.w1 != 0.0) p.objective_terms.push_back(own);
      p.objective_linear[B] = -cfg.w2;
      if (cfg.w2 == 0.0) {
        // Without an objective pull, B would be unbounded below under the barrier.
        Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        a[B] = -1.0;
        p.linear.push_back({a, 0.0, "B >= 0"});
      }
    }
  } else {
    p.n_vars = common ? 5 : 4;
    p.roles = {VarRole::Time, VarRole::Time, VarRole::Energy, VarRole::Energy};
    p.names = {"t1", "t2", "y1", "y2"};
    const std::size_t n = p.n_vars;
    PerspectiveTerm u1, u2;
    if (spec.case_ == Case::A) {
      u1 = {ch.gamma1, 0, 2, 1.0};
      u2 = {ch.gamma2, 1, 3, 1.0};
      p.linear.push_back({detail::row({k.X1, k.X1, 1.0, 0}, n), k.X1, "U1 budget t1"});
      p.linear.push_back({detail::row({0, k.X2, -k.eta * ch.hu, 1.0}, n), k.X2, "U2 budget t2"});
    } else {
      u2 = {ch.gamma2, 0, 2, 1.0};
      u1 = {ch.gamma1, 1, 3, 1.0};
      p.linear.push_back({detail::row({k.X2, k.X2, 1.0, 0}, n), k.X2, "U2 budget t1"});
      p.linear.push_back({detail::row({0, k.X1, -k.eta * ch.hu, 1.0}, n), k.X1, "U1 budget t2"});
    }
    p.linear.push_back({detail::row({1.0, 1.0, 0, 0}, n), 1.0, "sum t <= 1"});
    p.objective_linear = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    if (common) {
      p.roles.push_back(VarRole::Throughput);
      p.names.push_back("Bbar");
      p.objective_linear[4] = -1.0;
      p.epigraphs.push_back({4, {u1}, "Bbar <= B1"});
      p.epigraphs.push_back({4, {u2}, "Bbar <= B2"});
    } else {
      u1.coeff = cfg.w1;
      u2.coeff = cfg.w2;
      if (cfg.w1 != 0.0) p.objective_terms.push_back(u1);
      if (cfg.w2 != 0.0) p.objective_terms.push_back(u2);
    }
  }
  p.validate();
  return p;
}

/// Human-readable view of an allocation.
struct AllocationView {
  double t0 = 0.0;
  std::array<double, 3> t{};  ///< t1..t3 (t3 = 0 for S3/S4)
  std::array<double, 3> y{};
  std::array<double, 3> power{};  ///< P = y / t (0 where t = 0)
};

inline AllocationView view_allocation(const ScenarioSpec& spec, const Allocation& alloc) {
  AllocationView v;
  const std::size_t m = is_relay_scenario(spec.scenario) ? 3 : 2;
  double sum_t = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    v.t[i] = alloc.x[static_cast<Eigen::Index>(i)];
    v.y[i] = alloc.x[static_cast<Eigen::Index>(m + i)];
    v.power[i] = v.t[i] > 0.0 ? v.y[i] / v.t[i] : 0.0;
    sum_t += v.t[i];
  }
  v.t0 = 1.0 - sum_t;
  return v;
}

struct Throughputs {
  double B1 = 0.0;  ///< bits per block
  double B2 = 0.0;
};

/// Per-user bits over one block, computed from the time/energy coordinates
/// with the physical rate expressions (relayed user: min of the two hops).
/// Rejects allocations violating any linear or sign constraint by more than tol.
inline Throughputs throughputs_from_allocation(const ScenarioSpec& spec, const NetworkConfig& cfg,
                                               const ChannelState& ch, const Allocation& alloc,
                                               double tol = 1e-9) {
  const ConvexProgram p = build_problem(spec, cfg, ch);
  if (alloc.x.size() != static_cast<Eigen::Index>(p.n_vars)) {
    throw std::invalid_argument("throughputs_from_allocation: dimension mismatch");
  }
  for (std::size_t i = 0; i < p.n_vars; ++i) {
    if (p.barrier_bounded(i) && alloc.x[static_cast<Eigen::Index>(i)] < -tol) {
      throw InfeasibleAllocation("negative time or energy in allocation");
    }
  }
  for (const auto& l : p.linear) {
    bool touches_throughput = false;
    for (std::size_t i = 0; i < p.n_vars; ++i) {
      if (l.a[static_cast<Eigen::Index>(i)] != 0.0 && !p.barrier_bounded(i)) touches_throughput = true;
    }
    if (touches_throughput) continue;
    if (l.a.dot(alloc.x) - l.b > tol) {
      throw InfeasibleAllocation("allocation violates: " + l.label);
    }
  }

  const auto k = detail::effective_coefficients(spec, cfg);
  auto rate = [](double gamma, double t, double y) {
    return -perspective_value(gamma, std::max(t, 0.0), std::max(y, 0.0));
  };
  const auto& x = alloc.x;
  Throughputs out;
  if (is_relay_scenario(spec.scenario)) {
    const double relay_gamma = (1.0 - k.rho) * ch.gammaU;
    if (spec.case_ == Case::A) {
      out.B1 = rate(ch.gamma1, x[0], x[3]);
      out.B2 = std::min(rate(ch.gamma2, x[1], x[4]) + rate(ch.gamma1, x[2], x[5]),
                        rate(relay_gamma, x[1], x[4]));
    } else {
      out.B1 = rate(ch.gamma1, x[2], x[5]);
      out.B2 = std::min(rate(ch.gamma2, x[0], x[3]) + rate(ch.gamma1, x[1], x[4]),
                        rate(relay_gamma, x[0], x[3]));
    }
  } else if (spec.case_ == Case::A) {
    out.B1 = rate(ch.gamma1, x[0], x[2]);
    out.B2 = rate(ch.gamma2, x[1], x[3]);
  } else {
    out.B2 = rate(ch.gamma2, x[0], x[2]);
    out.B1 = rate(ch.gamma1, x[1], x[3]);
  }
  out.B1 /= std::numbers::ln2;
  out.B2 /= std::numbers::ln2;
  return out;
}

}  // namespace ehcoop
