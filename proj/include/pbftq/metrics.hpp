#pragma once

// Stationary performance measures of the PBFT queue.

#include <cmath>
#include <utility>
#include <vector>

#include "pbftq/model.hpp"
#include "pbftq/solver.hpp"

namespace pbftq {

struct PerformanceMetrics {
  double e_k = 0.0;      // mean packages at the client
  double e_m = 0.0;      // mean number of nodes that verified the package
  double gamma = 0.0;    // block-pegged rate
  double upsilon = 0.0;  // major-node reward rate, gamma c / N
  /// gamma - lambda; zero up to rounding for a stable, loss-free queue.
  double gamma_minus_lambda = 0.0;
};

/// E[K] = pi1 (I - R)^{-2} e, as two solves against I - R.
inline double expected_packages(const StationarySolution& s) {
  const Vector once = s.solve_i_minus_r(Vector::Ones(s.phases()));
  return s.pi1.dot(s.solve_i_minus_r(once));
}

/// Verified-node weights phi = (0, 1, ..., 2f).
inline Vector verified_weights(int phases) {
  return Vector::LinSpaced(phases, 0.0, phases - 1.0);
}

/// E[M] = pi1 (I - R)^{-1} phi.
inline double expected_verified_nodes(const StationarySolution& s) {
  return s.pi1.dot(s.solve_i_minus_r(verified_weights(s.phases())));
}

/// gamma = pi1 B2 e + pi1 R (I - R)^{-1} A2 e.
inline double block_pegged_rate(const StationarySolution& s,
                                const GeneratorBlocks& g) {
  const double from_level_one = s.pi1[g.b2.row] * g.b2.value;
  const Vector tail = s.solve_i_minus_r(g.a2_row_sums());
  return from_level_one + s.pi1.dot(s.rate.r * tail);
}

inline double major_node_reward(double gamma, const ModelParams& p) {
  if (!(gamma >= 0.0)) throw ConfigError("block-pegged rate must be nonnegative");
  return gamma * p.c() / p.n();
}

/// Stability check, rate matrix, boundary solve and all four measures.
inline PerformanceMetrics evaluate_all(const ModelParams& p,
                                       double tol = kDefaultTolerance,
                                       long max_iter = kDefaultMaxIterations) {
  const auto stability = check_stability(p);
  if (!stability.stable) {
    throw StabilityError(stability.rho,
                         "instance is unstable (rho = " +
                             std::to_string(stability.rho) + " >= 1)");
  }
  const auto blocks = build_blocks(p);
  const auto rate = compute_rate_matrix(blocks, tol, max_iter);
  const auto solution = solve_boundary(blocks, rate);

  PerformanceMetrics m;
  m.e_k = expected_packages(solution);
  m.e_m = expected_verified_nodes(solution);
  m.gamma = block_pegged_rate(solution, blocks);
  m.upsilon = major_node_reward(m.gamma, p);
  m.gamma_minus_lambda = m.gamma - p.lambda();
  return m;
}

/// MAP representation (C, D) of the block-pegging process, truncated to
/// levels 0..levels. D holds the pegging transitions (B2 and A2), C the rest.
inline std::pair<SparseMatrix, SparseMatrix> map_split(const GeneratorBlocks& g,
                                                       long levels) {
  const int p = g.phases();
  const SparseMatrix q = assemble_truncated(g, levels);
  std::vector<Eigen::Triplet<double>> d;
  d.emplace_back(state_index(p, 1, g.b2.row), 0, g.b2.value);
  for (long k = 2; k <= levels; ++k) {
    d.emplace_back(state_index(p, k, g.a2.row), state_index(p, k - 1, g.a2.col),
                   g.a2.value);
  }
  SparseMatrix dm(q.rows(), q.cols());
  dm.setFromTriplets(d.begin(), d.end());
  SparseMatrix cm = q - dm;
  cm.prune(0.0);
  return {std::move(cm), std::move(dm)};
}

}  // namespace pbftq
