#pragma once

// Parameter grids, per-point dispatch and the preset catalog behind the CLI.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pbftq/error.hpp"
#include "pbftq/metrics.hpp"
#include "pbftq/model.hpp"
#include "pbftq/oracle.hpp"
#include "pbftq/rng.hpp"
#include "pbftq/simulator.hpp"
#include "pbftq/solver.hpp"

namespace pbftq {

enum class Mode { kAnalytic, kSimulate, kOracle, kCompare };
enum class Format { kCsv, kJson };

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::kAnalytic: return "analytic";
    case Mode::kSimulate: return "simulate";
    case Mode::kOracle: return "oracle";
    case Mode::kCompare: return "compare";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "analytic") return Mode::kAnalytic;
  if (s == "simulate") return Mode::kSimulate;
  if (s == "oracle") return Mode::kOracle;
  if (s == "compare") return Mode::kCompare;
  throw ConfigError("unknown mode '" + std::string(s) +
                    "' (expected analytic, simulate, oracle or compare)");
}

inline Format parse_format(std::string_view s) {
  if (s == "csv") return Format::kCsv;
  if (s == "json") return Format::kJson;
  throw ConfigError("unknown format '" + std::string(s) + "' (expected csv or json)");
}

/// Model parameter names in canonical order.
inline const std::vector<std::string>& parameter_names() {
  static const std::vector<std::string> names{"lambda", "mu", "f", "c"};
  return names;
}

/// `steps` evenly spaced values on [start, stop], both endpoints included.
inline std::vector<double> linspace(double start, double stop, int steps) {
  if (steps < 1) throw ConfigError("a range needs at least one step");
  if (steps == 1) return {start};
  std::vector<double> out(steps);
  for (int i = 0; i < steps; ++i) {
    out[i] = start + (stop - start) * i / (steps - 1);
  }
  out.back() = stop;
  return out;
}

/// Parses "3", "50,100,320" or "start:stop:steps".
inline std::vector<double> parse_values(const std::string& text) {
  auto number = [&](const std::string& token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != token.size() || !std::isfinite(v)) {
      throw ConfigError("cannot parse '" + token + "' in '" + text + "'");
    }
    return v;
  };
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      parts.push_back(item);
    }
    return parts;
  };

  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError("range must be start:stop:steps, got '" + text + "'");
    const double steps = number(parts[2]);
    if (steps < 1 || steps != std::floor(steps)) {
      throw ConfigError("range step count must be a positive integer in '" + text + "'");
    }
    return linspace(number(parts[0]), number(parts[1]), static_cast<int>(steps));
  }
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(number(part));
  if (out.empty()) throw ConfigError("empty value list");
  return out;
}

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct SweepConfig {
  std::string name;
  std::map<std::string, double> fixed;
  std::vector<SweepAxis> swept;  // [0] is the x axis, [1] selects the curve
  Mode mode = Mode::kAnalytic;
  Format output_format = Format::kCsv;
  std::optional<std::string> plot;
  std::optional<SimConfig> sim;
  std::vector<std::string> plot_metrics{"e_k", "e_m", "gamma", "upsilon"};
  double tol = kDefaultTolerance;
  long max_iter = kDefaultMaxIterations;
  long level_cap = 0;  // 0 picks the oracle's adaptive cap
  bool simulate_large = false;  // compare mode: simulate points with f > 10
  int jobs = 1;

  void validate() const {
    const auto& names = parameter_names();
    if (swept.size() > 2) throw ConfigError("at most two parameters may be swept");
    for (const auto& [key, value] : fixed) {
      if (std::find(names.begin(), names.end(), key) == names.end()) {
        throw ConfigError("unknown parameter '" + key + "'");
      }
    }
    for (const auto& axis : swept) {
      if (std::find(names.begin(), names.end(), axis.name) == names.end()) {
        throw ConfigError("unknown swept parameter '" + axis.name + "'");
      }
      if (axis.values.empty()) throw ConfigError("swept parameter '" + axis.name + "' has no values");
      if (fixed.count(axis.name)) {
        throw ConfigError("parameter '" + axis.name + "' is both fixed and swept");
      }
    }
    if (swept.size() == 2 && swept[0].name == swept[1].name) {
      throw ConfigError("parameter '" + swept[0].name + "' is swept twice");
    }
    for (const auto& name : names) {
      const bool in_fixed = fixed.count(name) > 0;
      const bool in_swept = std::any_of(swept.begin(), swept.end(),
                                        [&](const SweepAxis& a) { return a.name == name; });
      if (!in_fixed && !in_swept) throw ConfigError("parameter '" + name + "' is missing");
    }
    auto check_f = [](double v) {
      if (v != std::floor(v)) throw ConfigError("f must be an integer");
    };
    if (fixed.count("f")) check_f(fixed.at("f"));
    for (const auto& axis : swept) {
      if (axis.name == "f") std::for_each(axis.values.begin(), axis.values.end(), check_f);
    }
    if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
    if (max_iter < 1) throw ConfigError("max-iter must be at least 1");
    if (level_cap != 0 && level_cap < 10) throw ConfigError("level cap must be at least 10");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
    if (sim) sim->validate();
    for (const auto& metric : plot_metrics) {
      if (metric != "e_k" && metric != "e_m" && metric != "gamma" && metric != "upsilon") {
        throw ConfigError("unknown plot metric '" + metric + "'");
      }
    }
  }
};

/// One grid point: raw parameter values, validated per point.
struct GridPoint {
  double lambda = 0.0;
  double mu = 0.0;
  double f = 0.0;
  double c = 0.0;

  double get(const std::string& name) const {
    if (name == "lambda") return lambda;
    if (name == "mu") return mu;
    if (name == "f") return f;
    return c;
  }
  void set(const std::string& name, double v) {
    if (name == "lambda") lambda = v;
    else if (name == "mu") mu = v;
    else if (name == "f") f = v;
    else c = v;
  }
};

/// Cartesian grid, swept[0] outermost.
inline std::vector<GridPoint> grid(const SweepConfig& config) {
  GridPoint base;
  for (const auto& [key, value] : config.fixed) base.set(key, value);
  std::vector<GridPoint> out{base};
  for (const auto& axis : config.swept) {
    std::vector<GridPoint> next;
    next.reserve(out.size() * axis.values.size());
    for (const auto& point : out) {
      for (double v : axis.values) {
        GridPoint q = point;
        q.set(axis.name, v);
        next.push_back(q);
      }
    }
    out = std::move(next);
  }
  return out;
}

struct SweepRow {
  double lambda = 0.0;
  double mu = 0.0;
  int f = 0;
  int n = 0;
  double c = 0.0;
  std::optional<double> rho;
  std::optional<bool> stable;
  std::optional<PerformanceMetrics> metrics;
  std::optional<PerformanceMetrics> oracle;
  std::optional<long> oracle_level_cap;
  std::optional<SimEstimates> sim;
  std::string error_code;
  std::string error_message;

  bool failed() const noexcept { return !error_code.empty(); }
};

struct PointOptions {
  double tol = kDefaultTolerance;
  long max_iter = kDefaultMaxIterations;
  long level_cap = 0;
  bool simulate_large = false;
};

inline constexpr int kOracleMaxF = 10;
inline constexpr double kDefaultSimHorizon = 1e5;

namespace detail {

inline TruncatedSolution run_oracle(const ModelParams& p, long level_cap) {
  return level_cap > 0
             ? truncated_stationary(p, level_cap, kDefaultTailThreshold)
             : truncated_stationary(p);
}

}  // namespace detail

inline SweepRow run_point(const ModelParams& p, Mode mode,
                          const std::optional<SimConfig>& sim,
                          const PointOptions& options = {}) {
  SweepRow row;
  row.lambda = p.lambda();
  row.mu = p.mu();
  row.f = p.f();
  row.n = p.n();
  row.c = p.c();
  const auto stability = check_stability(p);
  row.rho = stability.rho;
  row.stable = stability.stable;
  const SimConfig sim_config =
      sim.value_or(SimConfig::with_defaults(kDefaultSimHorizon));

  try {
    switch (mode) {
      case Mode::kAnalytic:
        row.metrics = evaluate_all(p, options.tol, options.max_iter);
        break;
      case Mode::kOracle: {
        const auto t = detail::run_oracle(p, options.level_cap);
        row.metrics = oracle_metrics(t, p);
        row.oracle_level_cap = t.level_cap;
        break;
      }
      case Mode::kSimulate:
        row.sim = simulate(p, sim_config);
        break;
      case Mode::kCompare:
        row.metrics = evaluate_all(p, options.tol, options.max_iter);
        if (p.f() <= kOracleMaxF) {
          const auto t = detail::run_oracle(p, options.level_cap);
          row.oracle = oracle_metrics(t, p);
          row.oracle_level_cap = t.level_cap;
        } else if (options.simulate_large) {
          row.sim = simulate(p, sim_config);
        }
        break;
    }
  } catch (const Error& e) {
    row.error_code = std::string(to_string(e.code()));
    row.error_message = e.what();
  } catch (const std::exception& e) {
    row.error_code = "INTERNAL";
    row.error_message = e.what();
  }
  return row;
}

/// Evaluates every grid point; rows come back in grid order regardless of
/// `jobs`. Simulation seeds are derived from the base seed and grid index.
inline std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  config.validate();
  const auto points = grid(config);
  std::vector<SweepRow> rows(points.size());
  PointOptions options{config.tol, config.max_iter, config.level_cap,
                       config.simulate_large};

  auto evaluate = [&](std::size_t i) {
    const auto& g = points[i];
    SweepRow& row = rows[i];
    std::optional<ModelParams> params;
    try {
      params = build_params(g.lambda, g.mu, static_cast<int>(g.f), g.c);
    } catch (const Error& e) {
      row.lambda = g.lambda;
      row.mu = g.mu;
      row.f = static_cast<int>(g.f);
      row.n = 3 * row.f + 1;
      row.c = g.c;
      row.error_code = std::string(to_string(e.code()));
      row.error_message = e.what();
      return;
    }
    SimConfig sim = config.sim.value_or(SimConfig::with_defaults(kDefaultSimHorizon));
    sim.seed = derive_seed(sim.seed, i);
    row = run_point(*params, config.mode, sim, options);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < points.size();) evaluate(i);
  };
  const int threads = std::min<int>(config.jobs, static_cast<int>(points.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

inline bool is_numerical_failure(const std::string& code) {
  return code == "ITERATION_LIMIT" || code == "BOUNDARY_SOLVE" ||
         code == "SINGULAR_RATE" || code == "SOLVE" || code == "INTERNAL";
}

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitAllFailed = 2;
inline constexpr int kExitNumerical = 3;

/// 2 when every row failed, else 3 when any row hit a numerical failure.
inline int exit_code_for(const std::vector<SweepRow>& rows) {
  if (!rows.empty() &&
      std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.failed(); })) {
    return kExitAllFailed;
  }
  for (const auto& r : rows) {
    if (is_numerical_failure(r.error_code)) return kExitNumerical;
  }
  return kExitOk;
}

/// Two numerical groups: mu swept on [3, 9] at lambda = 1, and lambda
/// swept on [1, 3] at mu = 9; c = 12.5 and f in {50, 100, 320} throughout.
inline std::vector<SweepConfig> presets() {
  const std::vector<double> byzantine{50, 100, 320};
  auto group_one = [&](std::string name, std::vector<std::string> metrics) {
    SweepConfig c;
    c.name = std::move(name);
    c.fixed = {{"lambda", 1.0}, {"c", 12.5}};
    c.swept = {{"mu", linspace(3.0, 9.0, 13)}, {"f", byzantine}};
    c.plot_metrics = std::move(metrics);
    return c;
  };
  auto group_two = [&](std::string name, std::vector<std::string> metrics) {
    SweepConfig c;
    c.name = std::move(name);
    c.fixed = {{"mu", 9.0}, {"c", 12.5}};
    c.swept = {{"lambda", linspace(1.0, 3.0, 11)}, {"f", byzantine}};
    c.plot_metrics = std::move(metrics);
    return c;
  };
  return {group_one("fig3", {"e_k", "e_m"}), group_one("fig4", {"gamma", "upsilon"}),
          group_two("fig5", {"e_k", "e_m"}), group_two("fig6", {"gamma", "upsilon"})};
}

inline SweepConfig preset(const std::string& name) {
  for (auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown preset '" + name + "' (expected fig3, fig4, fig5 or fig6)");
}

}  // namespace pbftq
