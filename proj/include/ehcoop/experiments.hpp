#pragma once

// Parameter sweeps over the energy arrival rate X1 or the distance d1, with
// CSV and plot-data emission and a flat key=value configuration format.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehcoop/model.hpp"
#include "ehcoop/parallel.hpp"
#include "ehcoop/strategy.hpp"

namespace ehcoop {

enum class SweepParam { X1, d1 };

inline std::string to_string(SweepParam p) { return p == SweepParam::X1 ? "X1" : "d1"; }

inline Scenario parse_scenario(const std::string& s) {
  for (auto sc : kAllScenarios) {
    if (to_string(sc) == s) return sc;
  }
  throw std::invalid_argument("unknown scenario '" + s + "'");
}

inline Case parse_case(const std::string& s) {
  if (s == "A") return Case::A;
  if (s == "B") return Case::B;
  throw std::invalid_argument("unknown case '" + s + "'");
}

inline Objective parse_objective(const std::string& s) {
  if (s == "sum") return Objective::WeightedSum;
  if (s == "common") return Objective::CommonThroughput;
  throw std::invalid_argument("unknown objective '" + s + "'");
}

struct SweepSpec {
  SweepParam param = SweepParam::X1;
  double start = 25.0;
  double stop = 300.0;
  double step = 25.0;
  NetworkConfig base;
  std::vector<Objective> objectives = {Objective::WeightedSum};
  std::vector<Scenario> scenarios = {kAllScenarios.begin(), kAllScenarios.end()};

  static SweepSpec energy() { return {}; }

  static SweepSpec distance() {
    SweepSpec s;
    s.param = SweepParam::d1;
    s.start = 0.2;
    s.stop = 1.8;
    s.step = 0.2;
    return s;
  }

  std::vector<double> points() const {
    std::vector<double> out;
    for (int k = 0;; ++k) {
      const double v = std::round((start + k * step) * 1e12) / 1e12;
      if (v > stop + 1e-9 * step) break;
      out.push_back(v);
    }
    return out;
  }

  /// Configuration at one sweep value; the distance sweep keeps du = d2 - d1.
  NetworkConfig config_at(double v) const {
    NetworkConfig cfg = base;
    if (param == SweepParam::X1) {
      cfg.X1 = v;
    } else {
      cfg.d1 = v;
      cfg.du = cfg.d2 - v;
    }
    return cfg;
  }

  void validate() const {
    if (!(step > 0.0)) throw std::invalid_argument("SweepSpec: step must be > 0");
    if (!(start <= stop)) throw std::invalid_argument("SweepSpec: start must not exceed stop");
    if (objectives.empty() || scenarios.empty()) {
      throw std::invalid_argument("SweepSpec: empty objective or scenario list");
    }
    if (param == SweepParam::X1 && start < 0.0) {
      throw std::invalid_argument("SweepSpec: energy arrival rate must be >= 0");
    }
    if (param == SweepParam::d1 && !(start > 0.0 && stop < base.d2)) {
      throw std::invalid_argument("SweepSpec: distance sweep needs 0 < d1 < d2");
    }
    for (double v : points()) config_at(v).validate();
  }
};

struct SweepRow {
  double sweep_param = 0.0;
  Scenario scenario = Scenario::S1;
  Case case_ = Case::A;
  Objective objective = Objective::WeightedSum;
  std::string status;  ///< "converged" for usable rows
  double rho_star = 0.0;
  double obj_bits = 0.0;
  double B1_bits = 0.0;
  double B2_bits = 0.0;
  double t[4] = {0.0, 0.0, 0.0, 0.0};  ///< t0..t3
  bool winner = false;  ///< best converged combination at this point and objective

  bool ok() const { return status == "converged"; }
};

struct SweepTable {
  SweepParam param = SweepParam::X1;
  std::vector<SweepRow> rows;

  bool any_failed() const {
    for (const auto& r : rows) {
      if (!r.ok() && r.status != "skipped") return true;
    }
    return false;
  }
};

namespace detail {

inline std::vector<SweepRow> rows_for(double v, Objective o, const StrategyResult& s,
                                      const std::vector<Scenario>& scenarios) {
  std::vector<SweepRow> out;
  for (auto sc : scenarios) {
    for (auto c : kAllCases) {
      SweepRow row;
      row.sweep_param = v;
      row.scenario = sc;
      row.case_ = c;
      row.objective = o;
      row.status = "skipped";
      for (std::size_t k = 0; k < s.combos.size(); ++k) {
        const auto& combo = s.combos[k];
        if (combo.scenario != sc || combo.case_ != c) continue;
        if (!combo.ok()) {
          const auto& first = combo.candidates.front();
          row.status = first.result.status == SolveStatus::Converged ? "cross_check_failed"
                                                                     : to_string(first.result.status);
          break;
        }
        const auto& w = combo.winner();
        const auto view = view_allocation(w.spec, w.result.x_star);
        row.status = "converged";
        row.rho_star = w.spec.rho;
        row.obj_bits = w.objective_bits();
        row.B1_bits = w.bits.B1;
        row.B2_bits = w.bits.B2;
        row.t[0] = view.t0;
        for (int i = 0; i < 3; ++i) row.t[i + 1] = view.t[static_cast<std::size_t>(i)];
        row.winner = k == s.best;
      }
      out.push_back(row);
    }
  }
  return out;
}

}  // namespace detail

/// One row per sweep value, objective, scenario and case, in that nesting
/// order. Points run on a worker pool; a failed solve becomes a row status.
inline SweepTable run_sweep(const SweepSpec& spec, StrategyOptions opts = {}) {
  spec.validate();
  const auto values = spec.points();
  const std::size_t jobs = values.size() * spec.objectives.size();
  const unsigned threads = opts.threads;
  opts.threads = 1;
  std::vector<std::vector<SweepRow>> blocks(jobs);
  parallel_for(jobs, threads, [&](std::size_t j) {
    const double v = values[j / spec.objectives.size()];
    const Objective o = spec.objectives[j % spec.objectives.size()];
    const auto s = select_strategy(spec.config_at(v), o, opts, spec.scenarios);
    blocks[j] = detail::rows_for(v, o, s, spec.scenarios);
  });
  SweepTable out;
  out.param = spec.param;
  for (auto& b : blocks) out.rows.insert(out.rows.end(), b.begin(), b.end());
  return out;
}

inline constexpr const char* kCsvHeader =
    "sweep_param,scenario,case,objective_kind,rho_star,obj_bits,B1_bits,B2_bits,t0,t1,t2,t3,status";

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_csv(const SweepTable& table, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& r : table.rows) {
    os << format_number(r.sweep_param) << ',' << to_string(r.scenario) << ',' << to_string(r.case_)
       << ',' << to_string(r.objective);
    const double nums[] = {r.rho_star, r.obj_bits, r.B1_bits, r.B2_bits,
                           r.t[0],     r.t[1],     r.t[2],    r.t[3]};
    for (double v : nums) {
      os << ',';
      if (r.ok()) os << format_number(v);
    }
    os << ',' << r.status << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + ": not a number '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument(what + ": trailing characters in '" + s + "'");
  return v;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << content;
  f.flush();
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace detail

inline SweepTable read_csv(std::istream& is) {
  SweepTable out;
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw std::invalid_argument("read_csv: missing or unexpected header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != 13) throw std::invalid_argument("read_csv: expected 13 columns: " + line);
    SweepRow r;
    r.sweep_param = detail::parse_number(cells[0], "sweep_param");
    r.scenario = parse_scenario(cells[1]);
    r.case_ = parse_case(cells[2]);
    r.objective = parse_objective(cells[3]);
    r.status = cells[12];
    if (r.ok()) {
      double* fields[] = {&r.rho_star, &r.obj_bits, &r.B1_bits, &r.B2_bits,
                          &r.t[0],     &r.t[1],     &r.t[2],    &r.t[3]};
      for (int i = 0; i < 8; ++i) *fields[i] = detail::parse_number(cells[4 + i], "numeric field");
    }
    out.rows.push_back(r);
  }
  return out;
}

inline void emit_csv(const SweepTable& table, const std::string& path) {
  if (table.rows.empty()) throw std::invalid_argument("emit_csv: empty table");
  std::ostringstream os;
  write_csv(table, os);
  detail::write_file(path, os.str());
}

/// Blocks of rows per (scenario, case, objective) separated by blank lines,
/// each preceded by a comment naming the series. The winner column is empty
/// on rows that did not converge.
inline void write_plotdata(const SweepTable& table, std::ostream& os) {
  std::vector<std::string> keys;
  std::map<std::string, std::vector<const SweepRow*>> series;
  for (const auto& r : table.rows) {
    const std::string key = to_string(r.scenario) + "-" + to_string(r.case_) + " " + to_string(r.objective);
    if (!series.count(key)) keys.push_back(key);
    series[key].push_back(&r);
  }
  bool first = true;
  for (const auto& key : keys) {
    if (!first) os << "\n\n";
    first = false;
    os << "# " << key << '\n';
    os << to_string(table.param) << ",obj_bits,B1_bits,B2_bits,rho_star,winner\n";
    for (const auto* r : series[key]) {
      os << format_number(r->sweep_param);
      if (r->ok()) {
        os << ',' << format_number(r->obj_bits) << ',' << format_number(r->B1_bits) << ','
           << format_number(r->B2_bits) << ',' << format_number(r->rho_star) << ','
           << (r->winner ? 1 : 0) << '\n';
      } else {
        os << ",,,,,\n";
      }
    }
  }
}

inline void emit_plotdata(const SweepTable& table, const std::string& path) {
  if (table.rows.empty()) throw std::invalid_argument("emit_plotdata: empty table");
  std::ostringstream os;
  write_plotdata(table, os);
  detail::write_file(path, os.str());
}

/// Screened S1 ratios laid out as one line per (objective, case) with one
/// column per sweep value; failed entries are empty.
inline void write_rho_table(const SweepTable& table, std::ostream& os) {
  std::vector<double> values;
  for (const auto& r : table.rows) {
    if (std::find(values.begin(), values.end(), r.sweep_param) == values.end()) {
      values.push_back(r.sweep_param);
    }
  }
  os << "objective,case";
  for (double v : values) os << ',' << format_number(v);
  os << '\n';
  for (auto o : {Objective::WeightedSum, Objective::CommonThroughput}) {
    for (auto c : kAllCases) {
      std::vector<const SweepRow*> line(values.size(), nullptr);
      bool any = false;
      for (const auto& r : table.rows) {
        if (r.scenario != Scenario::S1 || r.case_ != c || r.objective != o) continue;
        for (std::size_t i = 0; i < values.size(); ++i) {
          if (values[i] == r.sweep_param) line[i] = &r;
        }
        any = true;
      }
      if (!any) continue;
      os << to_string(o) << ',' << to_string(c);
      for (const auto* r : line) {
        os << ',';
        if (r && r->ok()) os << format_number(r->rho_star);
      }
      os << '\n';
    }
  }
}

// ---- configuration files --------------------------------------------------

/// Applies one key to a network configuration. Returns false for unknown keys.
inline bool apply_setting(NetworkConfig& cfg, const std::string& key, const std::string& value) {
  const std::map<std::string, double NetworkConfig::*> fields = {
      {"d1", &NetworkConfig::d1},         {"d2", &NetworkConfig::d2},
      {"du", &NetworkConfig::du},         {"alpha", &NetworkConfig::alpha},
      {"lambda", &NetworkConfig::lambda}, {"sigma2_D", &NetworkConfig::sigma2_D},
      {"sigma2_U1", &NetworkConfig::sigma2_U1}, {"sigma2_U2", &NetworkConfig::sigma2_U2},
      {"eta", &NetworkConfig::eta},       {"X1", &NetworkConfig::X1},
      {"X2", &NetworkConfig::X2},         {"w1", &NetworkConfig::w1},
      {"w2", &NetworkConfig::w2}};
  const auto it = fields.find(key);
  if (it == fields.end()) return false;
  cfg.*(it->second) = detail::parse_number(value, key);
  return true;
}

/// Applies one key to a sweep. Lists are comma separated.
inline bool apply_setting(SweepSpec& spec, const std::string& key, const std::string& value) {
  if (key == "param") {
    if (value == "X1") {
      spec.param = SweepParam::X1;
    } else if (value == "d1") {
      spec.param = SweepParam::d1;
    } else {
      throw std::invalid_argument("param: expected X1 or d1");
    }
  } else if (key == "start") {
    spec.start = detail::parse_number(value, key);
  } else if (key == "stop") {
    spec.stop = detail::parse_number(value, key);
  } else if (key == "step") {
    spec.step = detail::parse_number(value, key);
  } else if (key == "objectives") {
    spec.objectives.clear();
    for (const auto& s : detail::split(value, ',')) spec.objectives.push_back(parse_objective(s));
  } else if (key == "scenarios") {
    spec.scenarios.clear();
    for (const auto& s : detail::split(value, ',')) spec.scenarios.push_back(parse_scenario(s));
  } else {
    return apply_setting(spec.base, key, value);
  }
  return true;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Parses `key = value` lines; `#` starts a comment. Errors name the line.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& is,
                                                                         const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      throw std::invalid_argument(origin + ":" + std::to_string(number) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

template <class Target>
void load_config(std::istream& is, const std::string& origin, Target& target) {
  for (const auto& [key, value] : parse_key_values(is, origin)) {
    bool known = false;
    try {
      known = apply_setting(target, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(origin + ": " + e.what());
    }
    if (!known) throw std::invalid_argument(origin + ": unknown key '" + key + "'");
  }
}

template <class Target>
void load_config_file(const std::string& path, Target& target) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config '" + path + "'");
  load_config(f, path, target);
}

}  // namespace ehcoop
