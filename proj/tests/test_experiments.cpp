#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ehcoop/experiments.hpp"

using namespace ehcoop;

namespace {

SweepSpec small_sweep() {
  SweepSpec s = SweepSpec::energy();
  s.start = 50.0;
  s.stop = 150.0;
  s.step = 50.0;
  s.objectives = {Objective::WeightedSum, Objective::CommonThroughput};
  return s;
}

std::string csv_of(const SweepTable& t) {
  std::ostringstream os;
  write_csv(t, os);
  return os.str();
}

}  // namespace

TEST(Config, ParsesKeyValueLines) {
  std::istringstream in("# network\nX1 = 150   # mW\n\n  eta=0.5\nstep = 12.5\nobjectives = sum,common\n");
  SweepSpec spec;
  load_config(in, "test.cfg", spec);
  EXPECT_EQ(spec.base.X1, 150.0);
  EXPECT_EQ(spec.base.eta, 0.5);
  EXPECT_EQ(spec.step, 12.5);
  ASSERT_EQ(spec.objectives.size(), 2u);
  EXPECT_EQ(spec.objectives[1], Objective::CommonThroughput);
}

TEST(Config, RejectsMalformedInput) {
  NetworkConfig cfg;
  std::istringstream unknown("X1 = 1\nX3 = 2\n");
  EXPECT_THROW(load_config(unknown, "a.cfg", cfg), std::invalid_argument);
  std::istringstream no_equals("X1 1\n");
  try {
    load_config(no_equals, "b.cfg", cfg);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("b.cfg:1"), std::string::npos);
  }
  std::istringstream bad_number("eta = 0.5x\n");
  EXPECT_THROW(load_config(bad_number, "c.cfg", cfg), std::invalid_argument);
  EXPECT_THROW(load_config_file("/nonexistent/dir/x.cfg", cfg), std::runtime_error);
}

TEST(SweepSpec, DefaultGrids) {
  const auto e = SweepSpec::energy().points();
  ASSERT_EQ(e.size(), 12u);
  EXPECT_EQ(e.front(), 25.0);
  EXPECT_EQ(e.back(), 300.0);
  const auto d = SweepSpec::distance().points();
  ASSERT_EQ(d.size(), 9u);
  EXPECT_EQ(d[2], 0.6);
  EXPECT_EQ(d.back(), 1.8);
  EXPECT_DOUBLE_EQ(SweepSpec::distance().config_at(0.6).du, 1.4);
}

TEST(SweepSpec, Validation) {
  auto s = SweepSpec::energy();
  s.step = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = SweepSpec::distance();
  s.stop = 2.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = SweepSpec::energy();
  s.objectives.clear();
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(RunSweep, RowLayoutAndWinners) {
  const auto t = run_sweep(small_sweep());
  ASSERT_EQ(t.rows.size(), 3u * 2u * 8u);
  EXPECT_FALSE(t.any_failed());
  for (std::size_t b = 0; b < t.rows.size(); b += 8) {
    int winners = 0;
    double best = 0.0;
    for (std::size_t i = b; i < b + 8; ++i) {
      EXPECT_EQ(t.rows[i].sweep_param, t.rows[b].sweep_param);
      EXPECT_EQ(t.rows[i].objective, t.rows[b].objective);
      winners += t.rows[i].winner;
      best = std::max(best, t.rows[i].obj_bits);
      EXPECT_NEAR(t.rows[i].t[0] + t.rows[i].t[1] + t.rows[i].t[2] + t.rows[i].t[3], 1.0, 1e-12);
      if (t.rows[i].scenario == Scenario::S3 || t.rows[i].scenario == Scenario::S4) {
        EXPECT_EQ(t.rows[i].t[3], 0.0);
      }
    }
    EXPECT_EQ(winners, 1);
    for (std::size_t i = b; i < b + 8; ++i) {
      if (t.rows[i].winner) EXPECT_GE(t.rows[i].obj_bits, best * (1 - 1e-7));
    }
  }
  EXPECT_EQ(t.rows[0].scenario, Scenario::S1);
  EXPECT_EQ(t.rows[1].case_, Case::B);
  EXPECT_EQ(t.rows[8].objective, Objective::CommonThroughput);
}

TEST(RunSweep, DeterministicAcrossThreadCounts) {
  StrategyOptions one;
  one.threads = 1;
  StrategyOptions many;
  many.threads = 4;
  EXPECT_EQ(csv_of(run_sweep(small_sweep(), one)), csv_of(run_sweep(small_sweep(), many)));
}

TEST(RunSweep, ScenarioSubset) {
  auto s = small_sweep();
  s.scenarios = {Scenario::S4};
  const auto t = run_sweep(s);
  ASSERT_EQ(t.rows.size(), 3u * 2u * 2u);
  for (const auto& r : t.rows) EXPECT_EQ(r.scenario, Scenario::S4);
}

TEST(Csv, HeaderAndRoundTrip) {
  const auto t = run_sweep(small_sweep());
  const std::string text = csv_of(t);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "sweep_param,scenario,case,objective_kind,rho_star,obj_bits,B1_bits,B2_bits,t0,t1,t2,"
            "t3,status");
  std::istringstream in(text);
  const auto back = read_csv(in);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& a = t.rows[i];
    const auto& b = back.rows[i];
    EXPECT_EQ(a.scenario, b.scenario);
    EXPECT_EQ(a.case_, b.case_);
    EXPECT_EQ(a.status, b.status);
    const double x[] = {a.rho_star, a.obj_bits, a.B1_bits, a.B2_bits, a.t[0], a.t[1], a.t[2], a.t[3]};
    const double y[] = {b.rho_star, b.obj_bits, b.B1_bits, b.B2_bits, b.t[0], b.t[1], b.t[2], b.t[3]};
    for (int k = 0; k < 8; ++k) EXPECT_NEAR(x[k], y[k], 1e-11 * std::max(1.0, std::abs(x[k])));
  }
  EXPECT_EQ(csv_of(back), text);
}

TEST(Csv, FailedRowsHaveEmptyNumerics) {
  SweepTable t;
  SweepRow r;
  r.sweep_param = 75.0;
  r.scenario = Scenario::S2;
  r.case_ = Case::B;
  r.status = "max_iterations";
  r.obj_bits = 3.0;
  t.rows.push_back(r);
  const std::string text = csv_of(t);
  EXPECT_NE(text.find("\n75,S2,B,sum,,,,,,,,,max_iterations\n"), std::string::npos);
  EXPECT_TRUE(t.any_failed());
  std::istringstream in(text);
  EXPECT_EQ(read_csv(in).rows[0].status, "max_iterations");

  std::ostringstream plot;
  write_plotdata(t, plot);
  EXPECT_EQ(plot.str(), "# S2-B sum\nX1,obj_bits,B1_bits,B2_bits,rho_star,winner\n75,,,,,\n");
}

TEST(Csv, ParseErrors) {
  std::istringstream wrong_header("a,b\n");
  EXPECT_THROW(read_csv(wrong_header), std::invalid_argument);
  std::istringstream short_row(std::string(kCsvHeader) + "\n1,S1,A\n");
  EXPECT_THROW(read_csv(short_row), std::invalid_argument);
}

TEST(Csv, WriteErrorsNameThePath) {
  SweepTable t;
  t.rows.emplace_back();
  try {
    emit_csv(t, "/nonexistent/dir/out.csv");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/out.csv"), std::string::npos);
  }
  EXPECT_THROW(emit_csv(SweepTable{}, "/tmp/x.csv"), std::invalid_argument);
}

TEST(PlotData, SeriesPerCombination) {
  const auto t = run_sweep(small_sweep());
  std::ostringstream os;
  write_plotdata(t, os);
  const std::string s = os.str();
  EXPECT_NE(s.find("# S1-A sum\nX1,obj_bits,B1_bits,B2_bits,rho_star,winner\n50,"), std::string::npos);
  EXPECT_NE(s.find("# S4-B common\n"), std::string::npos);
  std::size_t blocks = 0;
  for (std::size_t p = s.find("# "); p != std::string::npos; p = s.find("# ", p + 1)) ++blocks;
  EXPECT_EQ(blocks, 16u);
}

TEST(RhoTable, OneLinePerObjectiveAndCase) {
  const auto t = run_sweep(small_sweep());
  std::ostringstream os;
  write_rho_table(t, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "objective,case,50,100,150");
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 4);
}
