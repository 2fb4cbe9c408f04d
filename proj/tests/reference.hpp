#pragma once

// Test-only closed forms. The queue is M/PH/1 with a hypoexponential service
// time (phase m lasts Exp((N - m) mu)), so the Pollaczek-Khinchine mean and
// the rank-one structure of A2 give answers that never touch the rate-matrix
// iteration.

#include <Eigen/Dense>

#include "pbftq/model.hpp"

namespace pbftq::reference {

struct ServiceMoments {
  double mean = 0.0;
  double second = 0.0;  // E[S^2]
};

inline ServiceMoments service_moments(double mu, int f) {
  const int n = 3 * f + 1;
  ServiceMoments s;
  double variance = 0.0;
  for (int m = 0; m <= 2 * f; ++m) {
    const double rate = (n - m) * mu;
    s.mean += 1.0 / rate;
    variance += 1.0 / (rate * rate);
  }
  s.second = variance + s.mean * s.mean;
  return s;
}

/// Pollaczek-Khinchine: E[K] = rho + lambda^2 E[S^2] / (2 (1 - rho)).
inline double pk_expected_packages(double lambda, double mu, int f) {
  const auto s = service_moments(mu, f);
  const double rho = lambda * s.mean;
  return rho + lambda * lambda * s.second / (2.0 * (1.0 - rho));
}

/// Each package spends 1 / ((N - m) mu) in phase m, so by Little's law
/// E[M] = lambda * sum_m m / ((N - m) mu).
inline double expected_verified_nodes(double lambda, double mu, int f) {
  const int n = 3 * f + 1;
  double sum = 0.0;
  for (int m = 0; m <= 2 * f; ++m) sum += m / ((n - m) * mu);
  return lambda * sum;
}

/// With A2 = t e_0^T the G matrix is e e_0^T, so
/// R = lambda (-A1 - lambda e e_0^T)^{-1}. Dense, explicit inverse.
inline Eigen::MatrixXd closed_form_rate(double lambda, double mu, int f) {
  const int n = 3 * f + 1;
  const int p = 2 * f + 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    m(i, i) = (n - i) * mu + lambda;
    if (i + 1 < p) m(i, i + 1) = -(n - i) * mu;
    m(i, 0) -= lambda;
  }
  return lambda * m.inverse();
}

}  // namespace pbftq::reference
