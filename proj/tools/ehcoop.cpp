// Command-line harness: single solves, rho screening, strategy selection,
// parameter sweeps and the validation suites.
//
// Exit status: 0 on success, 2 if any solve or check failed, 1 on usage errors.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ehcoop/experiments.hpp"
#include "ehcoop/strategy.hpp"
#include "ehcoop/validation.hpp"

using namespace ehcoop;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailed = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string solver = "nb";
  std::string objective = "sum";
  unsigned threads = 0;
  std::map<std::string, double> overrides;  // NetworkConfig field -> value
  std::string scenario = "S1";
  std::string case_ = "A";
  double rho = 0.0;
  std::string out;
  std::string plot_data;
  std::string rho_table;
  std::optional<double> start, stop, step;
  std::string scenarios;
};

const std::vector<std::string> kNetworkKeys = {"d1",       "d2",        "du",        "alpha",
                                               "lambda",   "sigma2_D",  "sigma2_U1", "sigma2_U2",
                                               "eta",      "X1",        "X2",        "w1",
                                               "w2"};

SolverKind parse_solver(const std::string& s) {
  if (s == "nb") return SolverKind::NewtonBarrier;
  if (s == "quad") return SolverKind::Quadratic;
  if (s == "both") return SolverKind::Both;
  throw UsageError("unknown solver '" + s + "'");
}

std::vector<Objective> parse_objectives(const std::string& s) {
  if (s == "both") return {Objective::WeightedSum, Objective::CommonThroughput};
  try {
    return {parse_objective(s)};
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

/// Defaults, then the config file, then explicit flags.
SweepSpec load_spec(const Options& o, SweepSpec spec) {
  const SweepParam expected = spec.param;
  try {
    if (!o.config.empty()) load_config_file(o.config, spec);
    for (const auto& [key, value] : o.overrides) {
      apply_setting(spec.base, key, format_number(value));
    }
    if (o.start) spec.start = *o.start;
    if (o.stop) spec.stop = *o.stop;
    if (o.step) spec.step = *o.step;
    if (!o.scenarios.empty()) apply_setting(spec, "scenarios", o.scenarios);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
  if (spec.param != expected) throw UsageError("config 'param' does not match the subcommand");
  return spec;
}

StrategyOptions strategy_options(const Options& o) {
  StrategyOptions s;
  s.solver = parse_solver(o.solver);
  s.threads = o.threads;
  return s;
}

/// Writes through a stream to `path`, or to stdout for "-".
void write_output(const std::string& path, const std::function<void(std::ostream&)>& emit) {
  if (path == "-") {
    emit(std::cout);
    return;
  }
  std::ostringstream os;
  emit(os);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << os.str();
  if (!f.flush()) throw std::runtime_error("write failed for '" + path + "'");
}

void print_instance(const InstanceResult& r) {
  std::printf("scenario      %s-%s\n", to_string(r.spec.scenario).c_str(), to_string(r.spec.case_).c_str());
  std::printf("objective     %s\n", to_string(r.spec.objective).c_str());
  std::printf("rho           %.12g\n", r.spec.rho);
  std::printf("status        %s\n", r.ok() ? "converged" : r.error.c_str());
  if (!r.ok()) return;
  const auto view = view_allocation(r.spec, r.result.x_star);
  std::printf("obj_bits      %.12g\n", r.objective_bits());
  std::printf("B1_bits       %.12g\n", r.bits.B1);
  std::printf("B2_bits       %.12g\n", r.bits.B2);
  std::printf("t0..t3        %.9f %.9f %.9f %.9f\n", view.t0, view.t[0], view.t[1], view.t[2]);
  std::printf("P1..P3 [mW]   %.6g %.6g %.6g\n", 1e3 * view.power[0], 1e3 * view.power[1],
              1e3 * view.power[2]);
  std::printf("iterations    outer %d, inner %d\n", r.result.outer_iters, r.result.inner_iters);
  std::printf("violation     %.3e\n", r.result.max_constraint_violation);
  std::printf("kkt_residual  %.3e\n", r.result.kkt_residual);
  if (r.cross) {
    std::printf("quad obj_bits %.12g (outer %d, kkt %.3e)\n", r.cross->objective_bits,
                r.cross->outer_iters, r.cross->kkt_residual);
    std::printf("solver gap    %.3e\n", r.cross_gap());
  }
}

int run_solve(const Options& o) {
  const auto spec = load_spec(o, SweepSpec::energy());
  const auto ch = derive_channels(spec.base);
  ScenarioSpec s;
  try {
    s = {parse_scenario(o.scenario), parse_case(o.case_), parse_objective(o.objective), o.rho};
    build_problem(s, spec.base, ch);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto r = solve_instance(s, spec.base, ch, strategy_options(o));
  print_instance(r);
  return r.ok() ? kExitOk : kExitFailed;
}

void write_candidates(std::ostream& os, const std::vector<const InstanceResult*>& rows) {
  os << "scenario,case,rho,obj_bits,B1_bits,B2_bits,status\n";
  for (const auto* r : rows) {
    os << to_string(r->spec.scenario) << ',' << to_string(r->spec.case_) << ','
       << format_number(r->spec.rho) << ',';
    if (r->ok()) {
      os << format_number(r->objective_bits()) << ',' << format_number(r->bits.B1) << ','
         << format_number(r->bits.B2) << ",converged\n";
    } else {
      os << ",,," << to_string(r->result.status) << '\n';
    }
  }
}

int run_screen(const Options& o) {
  const auto spec = load_spec(o, SweepSpec::energy());
  Case c;
  Objective obj;
  try {
    c = parse_case(o.case_);
    obj = parse_objective(o.objective);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!relay_beneficial(derive_channels(spec.base))) {
    std::fprintf(stderr, "relay not beneficial for this configuration; nothing to screen\n");
    return kExitFailed;
  }
  const auto r = screen_rho(c, obj, spec.base, strategy_options(o));
  std::vector<const InstanceResult*> rows;
  for (const auto& x : r.candidates) rows.push_back(&x);
  write_output(o.out.empty() ? "-" : o.out, [&](std::ostream& os) { write_candidates(os, rows); });
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (!r.ok()) return kExitFailed;
  std::printf("rho_star %.12g obj_bits %.12g\n", r.rho_star(), r.winner().objective_bits());
  return r.warnings.empty() ? kExitOk : kExitFailed;
}

int run_select(const Options& o) {
  const auto spec = load_spec(o, SweepSpec::energy());
  Objective obj;
  try {
    obj = parse_objective(o.objective);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto r = select_strategy(spec.base, obj, strategy_options(o), spec.scenarios);
  if (!o.out.empty()) write_output(o.out, [&](std::ostream& os) { write_candidates(os, r.table()); });
  for (const auto& c : r.combos) {
    if (c.ok()) {
      std::printf("%s-%s rho*=%-4g obj_bits %.9f\n", to_string(c.scenario).c_str(),
                  to_string(c.case_).c_str(), c.rho_star(), c.winner().objective_bits());
    } else {
      std::printf("%s-%s failed\n", to_string(c.scenario).c_str(), to_string(c.case_).c_str());
    }
  }
  for (const auto& n : r.notes) std::fprintf(stderr, "note: %s\n", n.c_str());
  if (!r.ok()) return kExitFailed;
  std::printf("best %s-%s rho*=%g obj_bits %.12g B1 %.12g B2 %.12g\n", to_string(r.scenario()).c_str(),
              to_string(r.case_()).c_str(), r.rho_star(), r.result().objective_bits, r.B1(), r.B2());
  bool failed = false;
  for (const auto& c : r.combos) failed = failed || !c.warnings.empty();
  return failed ? kExitFailed : kExitOk;
}

int run_sweep_command(const Options& o, SweepSpec defaults) {
  auto spec = load_spec(o, std::move(defaults));
  spec.objectives = parse_objectives(o.objective);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto table = run_sweep(spec, strategy_options(o));
  write_output(o.out.empty() ? "-" : o.out, [&](std::ostream& os) { write_csv(table, os); });
  if (!o.plot_data.empty()) write_output(o.plot_data, [&](std::ostream& os) { write_plotdata(table, os); });
  if (!o.rho_table.empty()) write_output(o.rho_table, [&](std::ostream& os) { write_rho_table(table, os); });
  return table.any_failed() ? kExitFailed : kExitOk;
}

int run_validate(const Options& o) {
  const auto spec = load_spec(o, SweepSpec::energy());
  std::vector<CheckResult> checks;
  checks.push_back(check_calculus());
  checks.push_back(check_oracle(spec.base));
  const auto pairs = solve_pairs(sweep_instances(spec.base, default_energy_values()), o.threads);
  checks.push_back(check_cross_validation(pairs));
  checks.push_back(check_certificates(pairs, o.threads));
  bool ok = true;
  for (const auto& c : checks) {
    std::printf("%s %-17s %s [%.2f s]\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str(),
                c.seconds);
    ok = ok && c.pass;
  }
  return ok ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Throughput optimization for two-user energy-harvesting networks with energy and data cooperation"};
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--config", o.config, "key=value configuration file");
  app.add_option("--solver", o.solver, "nb | quad | both")->check(CLI::IsMember({"nb", "quad", "both"}));
  app.add_option("--objective", o.objective, "sum | common (sweeps also accept both)")
      ->check(CLI::IsMember({"sum", "common", "both"}));
  app.add_option("--threads", o.threads, "worker threads (0 = all cores)");
  app.add_option("--out", o.out, "output path, '-' for stdout");
  for (const auto& key : kNetworkKeys) {
    app.add_option_function<double>("--" + key, [&o, key](double v) { o.overrides[key] = v; },
                                    "override network parameter " + key);
  }
  app.add_option_function<double>(
      "--noise",
      [&o](double v) {
        for (const char* k : {"sigma2_D", "sigma2_U1", "sigma2_U2"}) o.overrides[k] = v;
      },
      "set all three noise powers [W]");

  auto* solve = app.add_subcommand("solve", "solve one scenario/case/rho instance");
  solve->add_option("--scenario", o.scenario, "S1 | S2 | S3 | S4")->required();
  solve->add_option("--case", o.case_, "A | B")->required();
  solve->add_option("--rho", o.rho, "power-splitting ratio (S1 only)");

  auto* screen = app.add_subcommand("screen-rho", "screen the S1 power-splitting ratio");
  screen->add_option("--case", o.case_, "A | B")->required();

  auto* select = app.add_subcommand("select", "pick the best scenario, case and ratio");
  select->add_option("--scenarios", o.scenarios, "comma-separated subset, e.g. S1,S3");

  std::vector<CLI::App*> sweeps = {
      app.add_subcommand("sweep-energy", "sweep X1 (default 25..300 mW step 25)"),
      app.add_subcommand("sweep-distance", "sweep d1 with du = d2 - d1 (default 0.2..1.8 step 0.2)")};
  for (auto* s : sweeps) {
    s->add_option("--start", o.start, "first sweep value");
    s->add_option("--stop", o.stop, "last sweep value");
    s->add_option("--step", o.step, "sweep increment");
    s->add_option("--scenarios", o.scenarios, "comma-separated subset, e.g. S1,S3");
    s->add_option("--plot-data", o.plot_data, "also write per-series plot data");
    s->add_option("--rho-table", o.rho_table, "also write the screened S1 ratios, '-' for stdout");
  }

  auto* validate = app.add_subcommand("validate", "run the oracle, finite-difference and cross-check suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve) return run_solve(o);
    if (*screen) return run_screen(o);
    if (*select) return run_select(o);
    if (*sweeps[0]) return run_sweep_command(o, SweepSpec::energy());
    if (*sweeps[1]) return run_sweep_command(o, SweepSpec::distance());
    if (*validate) return run_validate(o);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailed;
  }
  return kExitUsage;
}
