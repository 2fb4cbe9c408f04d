#pragma once

// Discrete-event simulation of the (K(t), M(t)) chain with batch-means
// confidence intervals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "pbftq/error.hpp"
#include "pbftq/model.hpp"
#include "pbftq/rng.hpp"

namespace pbftq {

struct SimConfig {
  double horizon = 1e6;
  double warmup = 1e4;
  std::uint64_t seed = 1;
  int batches = 20;

  /// Warmup at 1% of the horizon and 20 batches.
  static SimConfig with_defaults(double horizon, std::uint64_t seed = 1) {
    return SimConfig{horizon, 0.01 * horizon, seed, 20};
  }

  void validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
      throw ConfigError("simulation horizon must be positive and finite");
    if (!(warmup >= 0.0) || !(warmup < horizon))
      throw ConfigError("warmup must satisfy 0 <= warmup < horizon");
    if (batches < 2) throw ConfigError("at least 2 batches are required");
  }
};

struct SimEstimates {
  double e_k_mean = 0.0;
  double e_m_mean = 0.0;
  double gamma_mean = 0.0;
  double e_k_half_width = 0.0;
  double e_m_half_width = 0.0;
  double gamma_half_width = 0.0;
  std::uint64_t events = 0;
  std::uint64_t pegged_blocks = 0;  // counted after warmup
  bool unstable = false;            // rho >= 1; averages diverge with horizon
  /// Per phase m, number of arrivals and of phase completions that fired
  /// while k >= 1.
  std::vector<std::uint64_t> busy_arrivals;
  std::vector<std::uint64_t> busy_completions;

  bool operator==(const SimEstimates&) const = default;
};

/// Observer signature: (time, k_before, m_before, k_after, m_after).
struct NoTrace {
  void operator()(double, long, int, long, int) const noexcept {}
};

namespace detail {

inline double half_width(const std::vector<double>& batch_values) {
  const auto n = static_cast<double>(batch_values.size());
  double mean = 0.0;
  for (double v : batch_values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : batch_values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  return boost::math::quantile(boost::math::complement(dist, 0.025)) * sd /
         std::sqrt(n);
}

}  // namespace detail

template <typename Trace>
SimEstimates simulate(const ModelParams& p, const SimConfig& config,
                      Trace&& trace) {
  config.validate();
  const int phases = p.phases();
  const int last = phases - 1;
  const int batches = config.batches;
  const double window = config.horizon - config.warmup;

  std::vector<double> edges(batches + 1);
  for (int i = 0; i < batches; ++i) {
    edges[i] = config.warmup + window * i / batches;
  }
  edges[batches] = config.horizon;

  std::vector<double> area_k(batches, 0.0), area_m(batches, 0.0);
  std::vector<double> pegs(batches, 0.0);

  SimEstimates out;
  out.unstable = !(utilization(p) < 1.0);
  out.busy_arrivals.assign(phases, 0);
  out.busy_completions.assign(phases, 0);

  // Spreads the holding interval [a, b) in state (k, m) over the batches.
  int cursor = 0;
  auto integrate = [&](double a, double b, long k, int m) {
    a = std::max(a, config.warmup);
    b = std::min(b, config.horizon);
    while (a < b) {
      while (cursor + 1 < batches && a >= edges[cursor + 1]) ++cursor;
      const double end = std::min(b, edges[cursor + 1]);
      area_k[cursor] += (end - a) * static_cast<double>(k);
      area_m[cursor] += (end - a) * m;
      if (end == a) break;
      a = end;
    }
  };

  SplitMix64 rng(config.seed);
  long k = 0;
  int m = 0;
  double t = 0.0;
  int peg_batch = 0;
  for (;;) {
    const double service = k >= 1 ? p.phase_rate(m) : 0.0;
    const double total = p.lambda() + service;
    const double next = t + rng.exponential(total);
    if (next >= config.horizon) {
      integrate(t, config.horizon, k, m);
      break;
    }
    integrate(t, next, k, m);
    t = next;
    ++out.events;

    const long k0 = k;
    const int m0 = m;
    const bool arrival = k == 0 || rng.uniform() * total < p.lambda();
    if (arrival) {
      if (k >= 1) ++out.busy_arrivals[m];
      ++k;
    } else {
      ++out.busy_completions[m];
      if (m < last) {
        ++m;
      } else {
        --k;
        m = 0;
        if (t >= config.warmup) {
          while (peg_batch + 1 < batches && t >= edges[peg_batch + 1]) ++peg_batch;
          pegs[peg_batch] += 1.0;
          ++out.pegged_blocks;
        }
      }
    }
    trace(t, k0, m0, k, m);
  }

  std::vector<double> bk(batches), bm(batches), bg(batches);
  double total_k = 0.0, total_m = 0.0;
  for (int i = 0; i < batches; ++i) {
    const double len = edges[i + 1] - edges[i];
    bk[i] = area_k[i] / len;
    bm[i] = area_m[i] / len;
    bg[i] = pegs[i] / len;
    total_k += area_k[i];
    total_m += area_m[i];
  }
  out.e_k_mean = total_k / window;
  out.e_m_mean = total_m / window;
  out.gamma_mean = static_cast<double>(out.pegged_blocks) / window;
  out.e_k_half_width = detail::half_width(bk);
  out.e_m_half_width = detail::half_width(bm);
  out.gamma_half_width = detail::half_width(bg);
  return out;
}

inline SimEstimates simulate(const ModelParams& p, const SimConfig& config) {
  return simulate(p, config, NoTrace{});
}

}  // namespace pbftq
