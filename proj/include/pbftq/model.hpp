#pragma once

// Parameters and generator blocks of the PBFT consensus QBD.
//
// State (k, m): k transaction packages at the client, m nodes that have
// verified the package in progress (0..2f). Level 0 is the single empty state.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pbftq/error.hpp"

namespace pbftq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class ModelParams {
 public:
  double lambda() const noexcept { return lambda_; }
  double mu() const noexcept { return mu_; }
  int f() const noexcept { return f_; }
  /// Total node count, always 3f + 1.
  int n() const noexcept { return 3 * f_ + 1; }
  double c() const noexcept { return c_; }
  /// Number of phases per level (m = 0..2f).
  int phases() const noexcept { return 2 * f_ + 1; }

  /// Rate of leaving phase m while a package is in consensus: (N - m) mu.
  double phase_rate(int m) const noexcept { return (n() - m) * mu_; }

  friend ModelParams build_params(double lambda, double mu, int f, double c);

 private:
  ModelParams(double lambda, double mu, int f, double c)
      : lambda_(lambda), mu_(mu), f_(f), c_(c) {}

  double lambda_;
  double mu_;
  int f_;
  double c_;
};

inline ModelParams build_params(double lambda, double mu, int f, double c) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError(Parameter::kLambda,
                         "arrival rate lambda must be positive and finite");
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ParameterError(Parameter::kMu,
                         "service rate mu must be positive and finite");
  }
  if (f < 1) {
    throw ParameterError(Parameter::kByzantine,
                         "Byzantine node bound f must be at least 1");
  }
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw ParameterError(Parameter::kReward,
                         "block reward c must be nonnegative and finite");
  }
  return ModelParams(lambda, mu, f, c);
}

/// rho = (lambda / mu) * sum_{k=0}^{2f} 1 / (N - k), summed term by term.
inline double utilization(const ModelParams& p) {
  double sum = 0.0;
  for (int k = 0; k <= 2 * p.f(); ++k) sum += 1.0 / (p.n() - k);
  return p.lambda() / p.mu() * sum;
}

/// A single nonzero entry of an otherwise zero vector or matrix.
struct Entry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// The six blocks of the level-independent QBD generator.
///
/// A0 = lambda I, A1 is upper bidiagonal, A2 / B0 / B2 carry one nonzero
/// each; only that structure is stored.
struct GeneratorBlocks {
  ModelParams params;
  double b1 = 0.0;
  Entry b0;     // row vector, 1 x phases
  Entry b2;     // column vector, phases x 1
  double a0 = 0.0;  // diagonal value
  Vector a1_diag;
  Vector a1_super;  // length phases - 1; a1_super[m] sits at (m, m + 1)
  Entry a2;

  int phases() const noexcept { return params.phases(); }

  Matrix dense_a0() const {
    return Matrix::Identity(phases(), phases()) * a0;
  }

  Matrix dense_a1() const {
    Matrix out = Matrix::Zero(phases(), phases());
    out.diagonal() = a1_diag;
    for (int m = 0; m + 1 < phases(); ++m) out(m, m + 1) = a1_super[m];
    return out;
  }

  Matrix dense_a2() const {
    Matrix out = Matrix::Zero(phases(), phases());
    out(a2.row, a2.col) = a2.value;
    return out;
  }

  RowVector dense_b0() const {
    RowVector out = RowVector::Zero(phases());
    out[b0.col] = b0.value;
    return out;
  }

  Vector dense_b2() const {
    Vector out = Vector::Zero(phases());
    out[b2.row] = b2.value;
    return out;
  }

  /// A2 e, the per-phase rate of leaving a level downward.
  Vector a2_row_sums() const {
    Vector out = Vector::Zero(phases());
    out[a2.row] = a2.value;
    return out;
  }
};

inline GeneratorBlocks build_blocks(const ModelParams& p) {
  const int phases = p.phases();
  const int last = phases - 1;
  const double lambda = p.lambda();
  const double peg = p.phase_rate(last);  // (N - 2f) mu

  Vector diag(phases), super(phases - 1);
  for (int m = 0; m < phases; ++m) {
    diag[m] = -p.phase_rate(m) - lambda;
    if (m < last) super[m] = p.phase_rate(m);
  }
  GeneratorBlocks g{p,
                    -lambda,
                    Entry{0, 0, lambda},
                    Entry{last, 0, peg},
                    lambda,
                    std::move(diag),
                    std::move(super),
                    Entry{last, 0, peg}};
  return g;
}

/// Index of state (level, phase) in a level-ordered enumeration.
inline std::ptrdiff_t state_index(int phases, long level, int phase) {
  return level == 0 ? 0 : 1 + (level - 1) * phases + phase;
}

/// Expands the blocks into the generator restricted to levels 0..levels.
///
/// Rows of the top level keep A1 unchanged and simply lose their A0 outflow,
/// so they sum to -lambda.
inline SparseMatrix assemble_truncated(const GeneratorBlocks& g, long levels) {
  const int p = g.phases();
  const std::ptrdiff_t size = 1 + levels * p;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(size) * 3 + 2);

  t.emplace_back(0, 0, g.b1);
  if (levels >= 1) t.emplace_back(0, state_index(p, 1, g.b0.col), g.b0.value);

  for (long k = 1; k <= levels; ++k) {
    for (int m = 0; m < p; ++m) {
      const auto row = state_index(p, k, m);
      t.emplace_back(row, row, g.a1_diag[m]);
      if (m + 1 < p) t.emplace_back(row, row + 1, g.a1_super[m]);
      if (k < levels) t.emplace_back(row, state_index(p, k + 1, m), g.a0);
    }
    if (k == 1) {
      t.emplace_back(state_index(p, 1, g.b2.row), 0, g.b2.value);
    } else {
      t.emplace_back(state_index(p, k, g.a2.row),
                     state_index(p, k - 1, g.a2.col), g.a2.value);
    }
  }

  SparseMatrix q(size, size);
  q.setFromTriplets(t.begin(), t.end());
  return q;
}

}  // namespace pbftq
