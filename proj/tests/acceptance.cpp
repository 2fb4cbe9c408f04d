// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "pbftq/pbftq.hpp"

namespace {

using pbftq::build_blocks;
using pbftq::build_params;
using pbftq::utilization;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void fail(std::string why) {
    pass = false;
    notes.push_back("FAIL: " + std::move(why));
  }
  void note(std::string what) { notes.push_back(std::move(what)); }
  void check(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

// 1 and 2 share the randomized grid.
struct StabilityGrid {
  struct Point {
    double lambda, mu;
    int f;
  };
  std::vector<Point> points;
};

StabilityGrid stability_grid() {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<int> pick_f(1, 5);
  std::uniform_real_distribution<double> pick_rho(0.5, 1.5), pick_mu(0.5, 10.0);
  StabilityGrid g;
  for (int i = 0; i < 200; ++i) {
    const int f = pick_f(gen);
    const double mu = pick_mu(gen);
    const double unit = utilization(build_params(1.0, mu, f, 0));
    g.points.push_back({pick_rho(gen) / unit, mu, f});
  }
  return g;
}

Outcome criterion_1_and_2(Outcome& residuals) {
  Outcome out;
  const auto start = Clock::now();
  const auto grid = stability_grid();
  int stable = 0, unstable_checked = 0;
  double worst_residual = 0.0, worst_step = 0.0;
  for (const auto& pt : grid.points) {
    const auto p = build_params(pt.lambda, pt.mu, pt.f, 0);
    const auto report = pbftq::check_stability(p);
    const std::string where = fmt::format("(lambda={:.6g}, mu={:.6g}, f={}, rho={:.6g})",
                                          pt.lambda, pt.mu, pt.f, report.rho);
    out.check(report.stable == report.drift_stable(), "predicates disagree at " + where);
    const auto blocks = build_blocks(p);
    if (report.stable) {
      ++stable;
      try {
        const auto r = pbftq::compute_rate_matrix(blocks);
        worst_residual = std::max(worst_residual, r.residual);
        worst_step = std::max(worst_step, r.step_norm);
        residuals.check(r.residual <= 1e-10,
                        fmt::format("residual {:.3g} at {}", r.residual, where));
        residuals.check(r.step_norm < 1e-12,
                        fmt::format("step {:.3g} at {}", r.step_norm, where));
      } catch (const std::exception& e) {
        out.fail("R iteration failed at " + where + ": " + e.what());
        residuals.fail("no converged R at " + where);
      }
    } else if (unstable_checked < 10) {
      ++unstable_checked;
      pbftq::RateIteration it(blocks);
      bool exceeded = false;
      for (int n = 0; n < 200000 && !exceeded; ++n) {
        it.step();
        exceeded = it.current().rowwise().sum().maxCoeff() > 1.0;
      }
      out.check(exceeded, "iterate row sums stayed <= 1 at unstable " + where);
    }
  }
  const double elapsed = seconds_since(start);
  out.check(unstable_checked == 10, "fewer than 10 unstable points in the grid");
  out.check(elapsed < 30.0, fmt::format("runtime {:.1f} s exceeds 30 s", elapsed));
  out.note(fmt::format("{} stable / {} unstable points, {} divergence checks, {:.2f} s",
                       stable, grid.points.size() - stable, unstable_checked, elapsed));
  residuals.note(fmt::format("worst residual {:.3g}, worst final step {:.3g}",
                             worst_residual, worst_step));
  return out;
}

Outcome criterion_3_and_4(Outcome& conservation) {
  Outcome out;
  const auto start = Clock::now();
  double worst_abs = 0.0, worst_gap = 0.0;
  int points = 0;
  for (int f : {1, 2, 3, 5}) {
    for (double rho : {0.2, 0.5, 0.8}) {
      for (double mu : {1.0, 5.0}) {
        const double lambda = rho / utilization(build_params(1.0, mu, f, 0));
        const auto p = build_params(lambda, mu, f, 12.5);
        const std::string where = fmt::format("(f={}, rho={}, mu={})", f, rho, mu);
        try {
          const auto a = pbftq::evaluate_all(p);
          const auto o = pbftq::oracle_metrics(pbftq::truncated_stationary(p), p);
          const std::pair<const char*, std::pair<double, double>> pairs[] = {
              {"E[K]", {a.e_k, o.e_k}},
              {"E[M]", {a.e_m, o.e_m}},
              {"gamma", {a.gamma, o.gamma}},
              {"upsilon", {a.upsilon, o.upsilon}}};
          for (const auto& [name, v] : pairs) {
            const double diff = std::abs(v.first - v.second);
            worst_abs = std::max(worst_abs, diff);
            const double allowed = std::max(1e-6, 1e-8 * std::abs(v.second));
            out.check(diff <= allowed, fmt::format("{} differs by {:.3g} at {}", name, diff, where));
          }
          const double gap = std::abs(a.gamma - lambda);
          worst_gap = std::max(worst_gap, gap);
          conservation.check(gap <= 1e-8, fmt::format("|gamma - lambda| = {:.3g} at {}", gap, where));
          ++points;
        } catch (const std::exception& e) {
          out.fail(where + ": " + e.what());
          conservation.fail(where + ": no analytic solution");
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  out.check(elapsed < 120.0, fmt::format("runtime {:.1f} s exceeds 2 min", elapsed));
  out.note(fmt::format("{} points, worst absolute difference {:.3g}, {:.2f} s", points,
                       worst_abs, elapsed));
  conservation.note(fmt::format("worst |gamma - lambda| {:.3g}", worst_gap));
  conservation.note(
      "gamma equals lambda at every stable point; a mu-dependent gamma at fixed lambda "
      "is not reproduced");
  return out;
}

Outcome criterion_5() {
  Outcome out;
  for (auto [lambda, mu, f] : {std::tuple{1.0, 2.0, 1}, std::tuple{1.0, 3.0, 3}}) {
    const auto p = build_params(lambda, mu, f, 12.5);
    const auto start = Clock::now();
    const auto a = pbftq::evaluate_all(p);
    const auto s = pbftq::simulate(p, pbftq::SimConfig::with_defaults(1e6, 1));
    const double elapsed = seconds_since(start);
    const std::string where = fmt::format("(lambda={}, mu={}, f={})", lambda, mu, f);
    const std::tuple<const char*, double, double, double> checks[] = {
        {"E[K]", a.e_k, s.e_k_mean, s.e_k_half_width},
        {"E[M]", a.e_m, s.e_m_mean, s.e_m_half_width},
        {"gamma", a.gamma, s.gamma_mean, s.gamma_half_width}};
    for (const auto& [name, exact, mean, hw] : checks) {
      out.check(std::abs(mean - exact) <= hw,
                fmt::format("{} {}: |{:.6g} - {:.6g}| > half-width {:.3g}", where, name, mean,
                            exact, hw));
      out.check(hw <= 0.02 * exact,
                fmt::format("{} {}: half-width {:.3g} above 2% of {:.6g}", where, name, hw, exact));
      out.note(fmt::format("{} {}: analytic {:.6f}, simulated {:.6f} +/- {:.6f}", where, name,
                           exact, mean, hw));
    }
    out.check(elapsed < 60.0, fmt::format("{} took {:.1f} s", where, elapsed));
    out.note(fmt::format("{} {} events, {:.2f} s", where, s.events, elapsed));
  }
  return out;
}

using Curves = std::map<int, std::vector<const pbftq::SweepRow*>>;

Curves by_f(const std::vector<pbftq::SweepRow>& rows, bool by_mu) {
  Curves curves;
  for (const auto& r : rows) curves[r.f].push_back(&r);
  for (auto& [f, members] : curves) {
    std::sort(members.begin(), members.end(), [&](auto* a, auto* b) {
      return by_mu ? a->mu < b->mu : a->lambda < b->lambda;
    });
  }
  return curves;
}

// Checks value(x) is monotone along every f-curve; direction +1 means
// nondecreasing, -1 nonincreasing.
void monotone_along(Outcome& out, const Curves& curves, bool by_mu, int direction,
                    const char* label, const std::function<double(const pbftq::SweepRow&)>& value,
                    bool assert_it = true) {
  int violations = 0;
  for (const auto& [f, members] : curves) {
    for (std::size_t i = 1; i < members.size(); ++i) {
      const double prev = value(*members[i - 1]), cur = value(*members[i]);
      if (direction * (cur - prev) < 0) {
        ++violations;
        const auto msg = fmt::format("{} not {} at f={} between {}={} and {}", label,
                                     direction > 0 ? "nondecreasing" : "nonincreasing", f,
                                     by_mu ? "mu" : "lambda",
                                     by_mu ? members[i - 1]->mu : members[i - 1]->lambda,
                                     by_mu ? members[i]->mu : members[i]->lambda);
        assert_it ? out.fail(msg) : out.note("report: " + msg);
      }
    }
  }
  if (violations == 0) {
    out.note(fmt::format("{} {} holds on every curve", label,
                         direction > 0 ? "nondecreasing" : "nonincreasing"));
  }
}

// Compares a metric across f at each x value; direction as above.
void ordered_in_f(Outcome& out, const std::vector<pbftq::SweepRow>& rows, bool by_mu,
                  int direction, const char* label,
                  const std::function<double(const pbftq::SweepRow&)>& value, bool strict,
                  bool assert_it = true) {
  std::map<double, std::map<int, double>> at_x;
  for (const auto& r : rows) at_x[by_mu ? r.mu : r.lambda][r.f] = value(r);
  int violations = 0;
  for (const auto& [x, per_f] : at_x) {
    for (auto it = std::next(per_f.begin()); it != per_f.end(); ++it) {
      const double prev = std::prev(it)->second, cur = it->second;
      const double d = direction * (cur - prev);
      if (strict ? !(d > 0) : d < 0) {
        ++violations;
        const auto msg = fmt::format("{} ordering in f violated at {}={} (f={} -> {}: {:.10g} -> {:.10g})",
                                     label, by_mu ? "mu" : "lambda", x, std::prev(it)->first,
                                     it->first, prev, cur);
        assert_it ? out.fail(msg) : out.note("report: " + msg);
      }
    }
  }
  if (violations == 0) {
    out.note(fmt::format("{} {} in f at every grid point", label,
                         direction > 0 ? (strict ? "increasing" : "nondecreasing")
                                       : (strict ? "decreasing" : "nonincreasing")));
  }
}

Outcome criterion_6() {
  Outcome out;
  const auto start = Clock::now();
  std::map<std::string, std::vector<pbftq::SweepRow>> results;
  for (const auto& config : pbftq::presets()) {
    results[config.name] = pbftq::run_sweep(config);
    for (const auto& r : results[config.name]) {
      out.check(!r.failed(), fmt::format("{} point mu={} lambda={} f={} failed: {}", config.name,
                                         r.mu, r.lambda, r.f, r.error_message));
    }
  }
  const double elapsed = seconds_since(start);
  out.check(elapsed < 300.0, fmt::format("presets took {:.1f} s", elapsed));
  if (!out.pass) return out;

  auto ek = [](const pbftq::SweepRow& r) { return r.metrics->e_k; };
  auto em = [](const pbftq::SweepRow& r) { return r.metrics->e_m; };
  auto upsilon = [](const pbftq::SweepRow& r) { return r.metrics->upsilon; };
  auto gamma = [](const pbftq::SweepRow& r) { return r.metrics->gamma; };

  const auto& fig3 = results["fig3"];
  monotone_along(out, by_f(fig3, true), true, -1, "fig3 E[K] in mu", ek);
  monotone_along(out, by_f(fig3, true), true, -1, "fig3 E[M] in mu", em);
  ordered_in_f(out, fig3, true, +1, "fig3 E[M]", em, false);
  ordered_in_f(out, fig3, true, -1, "fig3 E[K] (reported only)", ek, false, false);

  const auto& fig5 = results["fig5"];
  monotone_along(out, by_f(fig5, false), false, +1, "fig5 E[K] in lambda", ek);
  monotone_along(out, by_f(fig5, false), false, +1, "fig5 E[M] in lambda", em);
  ordered_in_f(out, fig5, false, -1, "fig5 E[K] (reported only)", ek, false, false);

  for (const char* name : {"fig4", "fig6"}) {
    const auto& rows = results[name];
    for (const auto& r : rows) {
      out.check(r.metrics->upsilon == r.metrics->gamma * r.c / r.n,
                fmt::format("{} upsilon != gamma c / N at mu={} lambda={} f={}", name, r.mu,
                            r.lambda, r.f));
    }
    ordered_in_f(out, rows, std::string(name) == "fig4", -1,
                 std::string(name) == "fig4" ? "fig4 Upsilon" : "fig6 Upsilon", upsilon, true);
  }
  monotone_along(out, by_f(results["fig6"], false), false, +1, "fig6 gamma in lambda", gamma);
  double max_gap = 0.0;
  for (const auto& r : results["fig4"]) max_gap = std::max(max_gap, std::abs(r.metrics->gamma_minus_lambda));
  out.note(fmt::format("fig4 gamma is flat in mu and f (max |gamma - lambda| {:.3g})", max_gap));
  out.note(fmt::format("presets fig3-fig6 evaluated in {:.2f} s", elapsed));
  return out;
}

Outcome criterion_7() {
  Outcome out;
  const auto start = Clock::now();
  const auto p = build_params(1, 3, 320, 12.5);
  const auto g = build_blocks(p);
  const auto rate = pbftq::compute_rate_matrix(g);
  const auto s = pbftq::solve_boundary(g, rate);
  const double gamma = pbftq::block_pegged_rate(s, g);
  const double ek = pbftq::expected_packages(s);
  const double em = pbftq::expected_verified_nodes(s);
  const double elapsed = seconds_since(start);
  out.check(elapsed < 60.0, fmt::format("took {:.1f} s", elapsed));
  out.check(rate.residual <= 1e-10, fmt::format("residual {:.3g}", rate.residual));
  out.check(rate.step_norm < 1e-12, fmt::format("final step {:.3g}", rate.step_norm));
  out.check(std::abs(gamma - 1.0) <= 1e-8, fmt::format("|gamma - lambda| = {:.3g}", std::abs(gamma - 1.0)));
  out.check(std::isfinite(ek) && std::isfinite(em), "non-finite metrics");
  out.note(fmt::format("641 phases: {} iterations, residual {:.3g}, step {:.3g}, "
                       "|gamma - lambda| {:.3g}, E[K] {:.6f}, E[M] {:.4f}, {:.2f} s",
                       rate.iterations, rate.residual, rate.step_norm, std::abs(gamma - 1.0),
                       ek, em, elapsed));
  return out;
}

std::string csv_for(const pbftq::SweepConfig& c) {
  std::ostringstream os;
  pbftq::write_csv(os, pbftq::run_sweep(c), c.mode);
  return os.str();
}

Outcome criterion_8() {
  Outcome out;
  for (const auto& config : pbftq::presets()) {
    out.check(csv_for(config) == csv_for(config), config.name + " analytic CSV differs between runs");
  }
  auto sim = pbftq::preset("fig3");
  sim.mode = pbftq::Mode::kSimulate;
  sim.sim = pbftq::SimConfig::with_defaults(50.0, 7);
  const auto first = csv_for(sim);
  out.check(first == csv_for(sim), "fig3 simulate CSV differs between runs");
  sim.jobs = 4;
  out.check(first == csv_for(sim), "fig3 simulate CSV differs with 4 jobs");
  auto compare = pbftq::preset("fig5");
  compare.mode = pbftq::Mode::kCompare;
  compare.fixed["mu"] = 2.0;
  compare.swept[1].values = {1, 2, 3};
  out.check(csv_for(compare) == csv_for(compare), "compare-mode CSV differs between runs");
  out.note("fig3-fig6 analytic, fig3 simulate (seed 7, 1 and 4 jobs), compare sweep: byte-identical");
  return out;
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, Outcome>> results;
  Outcome residuals;
  auto c1 = criterion_1_and_2(residuals);
  results.emplace_back("1. Stability theorem reproduction", c1);
  results.emplace_back("2. Rate-matrix residual", residuals);
  Outcome conservation;
  auto c3 = criterion_3_and_4(conservation);
  results.emplace_back("3. Oracle equivalence", c3);
  results.emplace_back("4. Flow conservation", conservation);
  results.emplace_back("5. Simulator consistency", criterion_5());
  results.emplace_back("6. Figure trend reproduction", criterion_6());
  results.emplace_back("7. Scale check (f = 320)", criterion_7());
  results.emplace_back("8. Determinism", criterion_8());

  int failures = 0;
  for (const auto& [name, outcome] : results) {
    std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << name << '\n';
    for (const auto& n : outcome.notes) std::cout << "       " << n << '\n';
    failures += outcome.pass ? 0 : 1;
  }
  std::cout << (failures == 0 ? "all acceptance criteria passed\n"
                              : fmt::format("{} acceptance criteria failed\n", failures));
  return failures == 0 ? 0 : 1;
}
