// pbftq: evaluate, sweep, simulate and cross-check the PBFT consensus queue.
//
// Exit codes: 0 success, 1 configuration or validation error, 2 every point
// failed, 3 a point hit a numerical failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pbftq/pbftq.hpp"

namespace {

struct Options {
  std::optional<std::string> lambda, mu, f, reward;
  std::string mode = "analytic";
  std::string format = "csv";
  std::optional<std::string> preset;
  std::optional<std::string> out;
  std::optional<std::string> plot;
  double tol = pbftq::kDefaultTolerance;
  long max_iter = pbftq::kDefaultMaxIterations;
  std::uint64_t seed = 1;
  double horizon = pbftq::kDefaultSimHorizon;
  std::optional<double> warmup;
  int batches = 20;
  long level_cap = 0;
  int jobs = 1;
  bool simulate_large = false;
};

void add_model_flags(CLI::App* cmd, Options& o, bool allow_lists) {
  const std::string hint = allow_lists ? " (value, list a,b,c or range start:stop:steps)" : "";
  cmd->add_option("--lambda", o.lambda, "arrival rate of transaction packages" + hint);
  cmd->add_option("--mu", o.mu, "per-node stage completion rate" + hint);
  cmd->add_option("-f,--byzantine", o.f, "maximum number of Byzantine nodes" + hint);
  cmd->add_option("--reward", o.reward, "block reward c" + hint);
  cmd->add_option("--tol", o.tol, "rate matrix stopping tolerance")->capture_default_str();
  cmd->add_option("--max-iter", o.max_iter, "rate matrix iteration limit")->capture_default_str();
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", o.out, "write rows to this file instead of stdout");
}

void add_sim_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "simulation seed (SplitMix64)")->capture_default_str();
  cmd->add_option("--horizon", o.horizon, "simulated time")->capture_default_str();
  cmd->add_option("--warmup", o.warmup, "discarded initial time (default 1% of horizon)");
  cmd->add_option("--batches", o.batches, "batch count for confidence intervals")
      ->capture_default_str();
}

pbftq::SimConfig sim_config(const Options& o) {
  pbftq::SimConfig c;
  c.horizon = o.horizon;
  c.warmup = o.warmup.value_or(0.01 * o.horizon);
  c.seed = o.seed;
  c.batches = o.batches;
  return c;
}

double scalar(const std::optional<std::string>& text, const char* name) {
  if (!text) throw pbftq::ConfigError(std::string("missing --") + name);
  const auto values = pbftq::parse_values(*text);
  if (values.size() != 1) {
    throw pbftq::ConfigError(std::string("--") + name + " takes a single value here");
  }
  return values.front();
}

pbftq::ModelParams point_params(const Options& o) {
  const double f = scalar(o.f, "byzantine");
  if (f != std::floor(f)) throw pbftq::ConfigError("f must be an integer");
  return pbftq::build_params(scalar(o.lambda, "lambda"), scalar(o.mu, "mu"),
                             static_cast<int>(f),
                             o.reward ? scalar(o.reward, "reward") : 12.5);
}

pbftq::SweepConfig sweep_config(const Options& o) {
  pbftq::SweepConfig c = o.preset ? pbftq::preset(*o.preset) : pbftq::SweepConfig{};
  if (!o.preset) c.name = "custom";
  const std::vector<std::pair<std::string, const std::optional<std::string>*>> given{
      {"lambda", &o.lambda}, {"mu", &o.mu}, {"f", &o.f}, {"c", &o.reward}};
  for (const auto& [name, text] : given) {
    if (!*text) continue;
    c.fixed.erase(name);
    std::erase_if(c.swept, [&](const pbftq::SweepAxis& a) { return a.name == name; });
    auto values = pbftq::parse_values(**text);
    if (values.size() == 1) {
      c.fixed[name] = values.front();
    } else {
      c.swept.push_back({name, std::move(values)});
    }
  }
  if (!o.preset && !o.reward && !c.fixed.count("c")) c.fixed["c"] = 12.5;
  c.mode = pbftq::parse_mode(o.mode);
  c.output_format = pbftq::parse_format(o.format);
  c.plot = o.plot;
  c.tol = o.tol;
  c.max_iter = o.max_iter;
  c.level_cap = o.level_cap;
  c.jobs = o.jobs;
  c.simulate_large = o.simulate_large;
  c.sim = sim_config(o);
  return c;
}

int emit(const Options& o, const std::vector<pbftq::SweepRow>& rows, pbftq::Mode mode) {
  const auto format = pbftq::parse_format(o.format);
  if (o.out) {
    std::ofstream file(*o.out, std::ios::binary);
    if (!file) throw pbftq::ConfigError("cannot open " + *o.out + " for writing");
    pbftq::write_rows(file, rows, mode, format);
  } else {
    pbftq::write_rows(std::cout, rows, mode, format);
  }
  for (const auto& r : rows) {
    if (r.failed()) std::cerr << "point failed: " << r.error_code << ": " << r.error_message << '\n';
  }
  return pbftq::exit_code_for(rows);
}

int run_single(const Options& o, pbftq::Mode mode) {
  const auto params = point_params(o);
  pbftq::PointOptions opts{o.tol, o.max_iter, o.level_cap, o.simulate_large};
  const auto sim = sim_config(o);
  sim.validate();
  return emit(o, {pbftq::run_point(params, mode, sim, opts)}, mode);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytic and simulated performance of the PBFT consensus queue"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI or TOML file; flags override it");

  Options o;

  auto* eval = app.add_subcommand("eval", "evaluate a single parameter point");
  add_model_flags(eval, o, false);
  eval->add_option("--mode", o.mode, "analytic, oracle, simulate or compare")
      ->check(CLI::IsMember({"analytic", "simulate", "oracle", "compare"}))
      ->capture_default_str();
  eval->add_option("--level-cap", o.level_cap, "oracle truncation level (0 = adaptive)");
  eval->add_flag("--simulate-large", o.simulate_large, "compare mode: simulate when f > 10");
  add_sim_flags(eval, o);

  auto* sweep = app.add_subcommand("sweep", "evaluate a parameter grid or preset");
  add_model_flags(sweep, o, true);
  sweep->add_option("--preset", o.preset, "fig3, fig4, fig5 or fig6");
  sweep->add_option("--mode", o.mode, "analytic, oracle, simulate or compare")
      ->check(CLI::IsMember({"analytic", "simulate", "oracle", "compare"}))
      ->capture_default_str();
  sweep->add_option("--plot", o.plot, "write an SVG chart to this path");
  sweep->add_option("--level-cap", o.level_cap, "oracle truncation level (0 = adaptive)");
  sweep->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();
  sweep->add_flag("--simulate-large", o.simulate_large, "compare mode: simulate when f > 10");
  add_sim_flags(sweep, o);

  auto* sim = app.add_subcommand("simulate", "simulate a single parameter point");
  add_model_flags(sim, o, false);
  add_sim_flags(sim, o);

  auto* oracle = app.add_subcommand("oracle", "truncated-chain reference solve of one point");
  add_model_flags(oracle, o, false);
  oracle->add_option("--level-cap", o.level_cap, "truncation level (0 = adaptive)");

  auto* list = app.add_subcommand("presets", "list the built-in sweep presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return pbftq::kExitConfig;
  }

  try {
    if (list->parsed()) {
      for (const auto& p : pbftq::presets()) {
        std::cout << p.name << ':';
        for (const auto& [k, v] : p.fixed) std::cout << ' ' << k << '=' << v;
        for (const auto& a : p.swept) {
          std::cout << ' ' << a.name << "=[" << a.values.front() << ".." << a.values.back()
                    << "; " << a.values.size() << " points]";
        }
        std::cout << " plot:";
        for (const auto& m : p.plot_metrics) std::cout << ' ' << m;
        std::cout << '\n';
      }
      return pbftq::kExitOk;
    }
    if (eval->parsed()) return run_single(o, pbftq::parse_mode(o.mode));
    if (sim->parsed()) return run_single(o, pbftq::Mode::kSimulate);
    if (oracle->parsed()) return run_single(o, pbftq::Mode::kOracle);

    const auto config = sweep_config(o);
    const auto rows = pbftq::run_sweep(config);
    if (config.plot) {
      std::ofstream svg(*config.plot, std::ios::binary);
      if (!svg) throw pbftq::ConfigError("cannot open " + *config.plot + " for writing");
      svg << pbftq::render_svg(config, rows);
    }
    return emit(o, rows, config.mode);
  } catch (const pbftq::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == pbftq::ErrorCode::kInvalidConfig ||
                   e.code() == pbftq::ErrorCode::kInvalidParameter
               ? pbftq::kExitConfig
               : pbftq::kExitNumerical;
  }
}
