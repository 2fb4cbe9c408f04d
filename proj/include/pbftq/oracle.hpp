#pragma once

// Brute-force reference: the generator over levels 0..L assembled directly
// from the transition rules and solved as one sparse linear system. Shares
// nothing with the rate-matrix path.

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "pbftq/error.hpp"
#include "pbftq/metrics.hpp"
#include "pbftq/model.hpp"

namespace pbftq {

inline constexpr double kDefaultTailThreshold = 1e-10;

struct TruncatedSolution {
  long level_cap = 0;
  int phases = 0;
  /// Level 0 first, then (k, m) for k = 1..L, m = 0..2f.
  Vector probabilities;
  double tail_mass_estimate = 0.0;

  double at(long level, int phase) const {
    return probabilities[state_index(phases, level, phase)];
  }

  double level_mass(long level) const {
    if (level == 0) return probabilities[0];
    return probabilities.segment(state_index(phases, level, 0), phases).sum();
  }
};

/// Level cap derived from rho: ceil(log(tail) / log(rho)) + 50, at least 10.
inline long default_level_cap(const ModelParams& p,
                              double tail_threshold = kDefaultTailThreshold) {
  const double rho = utilization(p);
  if (!(rho < 1.0)) throw StabilityError(rho, "oracle requires rho < 1");
  const double levels = std::ceil(std::log(tail_threshold) / std::log(rho)) + 50;
  return std::max(10L, static_cast<long>(levels));
}

/// Generator on levels 0..level_cap. The top level is reflecting: arrivals
/// are switched off there, so every row sums to zero.
inline SparseMatrix reflecting_generator(const ModelParams& p, long level_cap) {
  const int phases = p.phases();
  const int last = phases - 1;
  const std::ptrdiff_t size = 1 + level_cap * phases;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(size) * 4);

  auto add = [&](std::ptrdiff_t from, std::ptrdiff_t to, double rate) {
    t.emplace_back(from, to, rate);
    t.emplace_back(from, from, -rate);
  };

  add(0, state_index(phases, 1, 0), p.lambda());
  for (long k = 1; k <= level_cap; ++k) {
    for (int m = 0; m < phases; ++m) {
      const auto from = state_index(phases, k, m);
      if (k < level_cap) add(from, state_index(phases, k + 1, m), p.lambda());
      if (m < last) {
        add(from, from + 1, p.phase_rate(m));
      } else {
        add(from, state_index(phases, k - 1, 0), p.phase_rate(m));
      }
    }
  }
  SparseMatrix q(size, size);
  q.setFromTriplets(t.begin(), t.end());
  return q;
}

inline TruncatedSolution truncated_stationary(
    const ModelParams& p, long level_cap,
    double tail_threshold = kDefaultTailThreshold) {
  if (level_cap < 10) throw ConfigError("oracle level cap must be at least 10");
  const double rho = utilization(p);
  if (!(rho < 1.0)) throw StabilityError(rho, "oracle requires rho < 1");

  const SparseMatrix q = reflecting_generator(p, level_cap);
  const auto size = q.rows();

  // pi Q = 0 transposed, with the balance equation of state 0 replaced by
  // the normalization sum(pi) = 1.
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(q.nonZeros() + size));
  for (int row = 0; row < q.outerSize(); ++row) {
    for (SparseMatrix::InnerIterator it(q, row); it; ++it) {
      if (it.col() != 0) t.emplace_back(it.col(), it.row(), it.value());
    }
  }
  for (std::ptrdiff_t j = 0; j < size; ++j) t.emplace_back(0, j, 1.0);
  Eigen::SparseMatrix<double> a(size, size);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) {
    throw SolveError(ErrorCode::kSolve, 0.0,
                     "truncated generator factorization failed: " +
                         lu.lastErrorMessage());
  }
  Vector rhs = Vector::Zero(size);
  rhs[0] = 1.0;
  TruncatedSolution s;
  s.level_cap = level_cap;
  s.phases = p.phases();
  s.probabilities = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !s.probabilities.allFinite()) {
    throw SolveError(ErrorCode::kSolve, 0.0, "truncated generator solve failed");
  }
  // Deep-tail entries can come out as -1e-17 from roundoff.
  if (s.probabilities.minCoeff() < -1e-14) {
    throw SolveError(ErrorCode::kSolve, 0.0,
                     "truncated generator solve produced negative probabilities");
  }
  s.probabilities = s.probabilities.cwiseMax(0.0);
  s.probabilities /= s.probabilities.sum();
  s.tail_mass_estimate = s.level_mass(level_cap);
  if (s.tail_mass_estimate > tail_threshold) {
    throw TruncationError(level_cap, s.tail_mass_estimate, tail_threshold);
  }
  return s;
}

inline TruncatedSolution truncated_stationary(const ModelParams& p) {
  return truncated_stationary(p, default_level_cap(p), kDefaultTailThreshold);
}

/// The four measures by direct summation over the truncated distribution.
inline PerformanceMetrics oracle_metrics(const TruncatedSolution& s,
                                         const ModelParams& p) {
  const int last = s.phases - 1;
  PerformanceMetrics m;
  for (long k = 1; k <= s.level_cap; ++k) {
    m.e_k += k * s.level_mass(k);
    for (int ph = 1; ph < s.phases; ++ph) m.e_m += ph * s.at(k, ph);
    m.gamma += s.at(k, last) * p.phase_rate(last);
  }
  m.upsilon = m.gamma * p.c() / p.n();
  m.gamma_minus_lambda = m.gamma - p.lambda();
  return m;
}

}  // namespace pbftq
