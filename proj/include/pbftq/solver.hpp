#pragma once

// Stability test, rate matrix iteration and boundary solve for the
// matrix-geometric stationary distribution pi_k = pi_1 R^{k-1}.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Dense>

#include "pbftq/error.hpp"
#include "pbftq/model.hpp"

namespace pbftq {

struct StabilityReport {
  double rho = 0.0;
  bool stable = false;
  RowVector theta;  // stationary vector of A0 + A1 + A2
  double drift_in = 0.0;   // theta A0 e
  double drift_out = 0.0;  // theta A2 e

  bool drift_stable() const noexcept { return drift_in < drift_out; }
};

inline StabilityReport check_stability(const ModelParams& p) {
  const int phases = p.phases();
  const double n = p.n();
  double weight_sum = 0.0;
  for (int k = 0; k < phases; ++k) weight_sum += n / (n - k);

  StabilityReport r;
  r.rho = utilization(p);
  r.stable = r.rho < 1.0;
  r.theta.resize(phases);
  const double theta0 = 1.0 / weight_sum;
  for (int k = 0; k < phases; ++k) r.theta[k] = n / (n - k) * theta0;
  r.drift_in = p.lambda();
  r.drift_out = r.theta[phases - 1] * p.phase_rate(phases - 1);
  return r;
}

struct RateMatrix {
  Matrix r;
  long iterations = 0;
  double residual = 0.0;     // max |R^2 A2 + R A1 + A0|
  double step_norm = 0.0;    // ||R(n+1) - R(n)||_inf at termination
  double spectral_radius_bound = 0.0;  // max row sum of r
};

inline constexpr double kDefaultTolerance = 1e-12;
inline constexpr long kDefaultMaxIterations = 1'000'000;
inline constexpr double kResidualLimit = 1e-10;

/// Solves Y U = X for Y where U = -A1 is upper bidiagonal (column sweep).
inline Matrix right_solve_negated_a1(const GeneratorBlocks& g, const Matrix& x) {
  const int p = g.phases();
  Matrix y(x.rows(), p);
  y.col(0) = x.col(0) / -g.a1_diag[0];
  for (int j = 1; j < p; ++j) {
    y.col(j) = (x.col(j) + y.col(j - 1) * g.a1_super[j - 1]) / -g.a1_diag[j];
  }
  return y;
}

/// Max-abs entry of R^2 A2 + R A1 + A0, evaluated with the block structure.
inline double rate_equation_residual(const GeneratorBlocks& g, const Matrix& r) {
  const int p = g.phases();
  Matrix res(r.rows(), p);
  res.col(0) = r.col(0) * g.a1_diag[0];
  for (int j = 1; j < p; ++j) {
    res.col(j) = r.col(j) * g.a1_diag[j] + r.col(j - 1) * g.a1_super[j - 1];
  }
  res.col(g.a2.col) += (r * r.col(g.a2.row)) * g.a2.value;
  res.diagonal().array() += g.a0;
  return res.cwiseAbs().maxCoeff();
}

inline double max_row_sum(const Matrix& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Natural fixed-point iteration R(n+1) = (R(n)^2 A2 + A0)(-A1)^{-1} from
/// R(0) = 0. Does not check stability; compute_rate_matrix does.
class RateIteration {
 public:
  explicit RateIteration(const GeneratorBlocks& g)
      : blocks_(g),
        current_(Matrix::Zero(g.phases(), g.phases())),
        previous_(current_) {}

  const Matrix& current() const noexcept { return current_; }
  const Matrix& previous() const noexcept { return previous_; }
  long iterations() const noexcept { return iterations_; }

  /// Advances one iterate and returns ||R(n+1) - R(n)||_inf.
  double step() {
    const auto& g = blocks_;
    Matrix x = Matrix::Identity(g.phases(), g.phases()) * g.a0;
    // R^2 A2 has a single nonzero column: (R * R e_{row}) * value.
    x.col(g.a2.col) += (current_ * current_.col(g.a2.row)) * g.a2.value;
    Matrix next = right_solve_negated_a1(g, x);
    previous_ = std::exchange(current_, std::move(next));
    ++iterations_;
    return max_row_sum(current_ - previous_);
  }

 private:
  GeneratorBlocks blocks_;
  Matrix current_;
  Matrix previous_;
  long iterations_ = 0;
};

/// Runs the natural iteration until successive iterates differ by less than
/// tol (max row sum norm) and the rate equation residual is at most 1e-10.
/// on_step(n, R(n), R(n+1)) is invoked after every step.
template <typename StepObserver>
RateMatrix compute_rate_matrix(const GeneratorBlocks& g, double tol,
                               long max_iter, StepObserver&& on_step) {
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
  const double rho = utilization(g.params);
  if (!(rho < 1.0)) {
    throw StabilityError(rho, "rate matrix requested for an unstable instance "
                              "(rho = " + std::to_string(rho) + ")");
  }

  RateIteration it(g);
  double step = std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::infinity();
  while (it.iterations() < max_iter) {
    step = it.step();
    on_step(it.iterations() - 1, it.previous(), it.current());
    if (!std::isfinite(step)) break;
    if (step < tol) {
      // Stop rule compares iterates; the residual gate can extend the run.
      residual = rate_equation_residual(g, it.previous());
      if (residual <= kResidualLimit) {
        RateMatrix out;
        out.r = it.previous();
        out.iterations = it.iterations() - 1;
        out.residual = residual;
        out.step_norm = step;
        out.spectral_radius_bound = max_row_sum(out.r);
        return out;
      }
    }
  }
  if (!std::isfinite(residual)) residual = rate_equation_residual(g, it.current());
  throw IterationLimitError(it.iterations(), step, residual);
}

inline RateMatrix compute_rate_matrix(const GeneratorBlocks& g,
                                      double tol = kDefaultTolerance,
                                      long max_iter = kDefaultMaxIterations) {
  return compute_rate_matrix(g, tol, max_iter,
                             [](long, const Matrix&, const Matrix&) {});
}

struct StationarySolution {
  double pi0 = 0.0;
  RowVector pi1;
  RateMatrix rate;
  /// Factorization of (I - R), shared by every (I - R)^{-1} application.
  Eigen::PartialPivLU<Matrix> i_minus_r;
  double boundary_rcond = 0.0;

  int phases() const noexcept { return static_cast<int>(pi1.size()); }

  /// (I - R)^{-1} v
  Vector solve_i_minus_r(const Vector& v) const { return i_minus_r.solve(v); }

  /// pi0 + pi1 (I - R)^{-1} e; equals 1 for a normalized solution.
  double total_mass() const {
    return pi0 + pi1.dot(solve_i_minus_r(Vector::Ones(phases())));
  }
};

/// Smallest reciprocal condition estimate accepted for a dense solve.
inline constexpr double kMinRcond = 1e3 * std::numeric_limits<double>::epsilon();

inline Eigen::PartialPivLU<Matrix> factor_i_minus_r(const Matrix& r) {
  const auto p = r.rows();
  Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(p, p) - r);
  const double rc = lu.rcond();
  if (!std::isfinite(rc) || rc < kMinRcond) {
    throw SolveError(ErrorCode::kSingularRate, rc,
                     "I - R is numerically singular; R has spectral radius "
                     "near 1");
  }
  return lu;
}

/// Solves for (pi0, pi1) from
///   pi0 B0 + pi1 (A1 + R A2) = 0   (one column per phase)
///   pi0 + pi1 (I - R)^{-1} e = 1
/// The scalar balance pi0 B1 + pi1 B2 = 0 is implied and dropped.
inline StationarySolution solve_boundary(const GeneratorBlocks& g,
                                         const RateMatrix& rate) {
  const int p = g.phases();
  StationarySolution s;
  s.rate = rate;
  s.i_minus_r = factor_i_minus_r(rate.r);
  const Vector mass = s.i_minus_r.solve(Vector::Ones(p));

  // Unknown row vector x = (pi0, pi1); system x M = (1, 0, ..., 0).
  Matrix m = Matrix::Zero(p + 1, p + 1);
  m(0, 0) = 1.0;
  m.block(1, 0, p, 1) = mass;
  m.block(0, 1, 1, p) = g.dense_b0();
  Matrix lower = g.dense_a1();
  lower.col(g.a2.col) += rate.r.col(g.a2.row) * g.a2.value;
  m.block(1, 1, p, p) = lower;

  Eigen::PartialPivLU<Matrix> lu(m.transpose());
  s.boundary_rcond = lu.rcond();
  if (!std::isfinite(s.boundary_rcond) || s.boundary_rcond < kMinRcond) {
    throw SolveError(ErrorCode::kBoundarySolve, s.boundary_rcond,
                     "boundary system is numerically rank deficient");
  }
  Vector rhs = Vector::Zero(p + 1);
  rhs[0] = 1.0;
  const Vector x = lu.solve(rhs);
  if (!x.allFinite()) {
    throw SolveError(ErrorCode::kBoundarySolve, s.boundary_rcond,
                     "boundary solve produced non-finite probabilities");
  }
  s.pi0 = x[0];
  s.pi1 = x.tail(p).transpose();
  return s;
}

/// pi_k = pi_1 R^{k-1} by repeated vector-matrix products.
inline RowVector stationary_level(const StationarySolution& s, long k) {
  if (k < 1) throw ConfigError("stationary_level requires k >= 1");
  RowVector v = s.pi1;
  for (long i = 1; i < k; ++i) v = v * s.rate.r;
  return v;
}

}  // namespace pbftq
