#pragma once

// Shared fixtures for the unit tests: deterministic random instances and
// brute-force dense oracles that the library code must agree with.

#include <random>

#include <Eigen/Dense>

#include "quadinfer/dataset.hpp"
#include "quadinfer/model_fit.hpp"

namespace qi_test {

// Well-conditioned random regression instance (std::mt19937 keeps the unit
// tests self-contained; the library's own RNG is exercised separately).
inline quadinfer::Dataset random_dataset(int n, int p, unsigned seed,
                                         double noise = 1.0) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.5, 1.5);
  quadinfer::Dataset d;
  d.x.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) d.x(i, j) = nd(gen);
  Eigen::VectorXd beta(p);
  for (int j = 0; j < p; ++j) beta(j) = ud(gen);
  d.y = d.x * beta;
  for (int i = 0; i < n; ++i) d.y(i) += noise * nd(gen);
  return d;
}

// Random symmetric positive definite matrix with eigenvalues in [0.5, ~5].
inline Eigen::MatrixXd random_spd(int p, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd m(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = nd(gen);
  return m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(p, p);
}

inline Eigen::VectorXd random_vector(int p, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd v(p);
  for (int j = 0; j < p; ++j) v(j) = nd(gen);
  return v;
}

// Dense brute-force oracles.
inline double dense_trace_inv(const Eigen::MatrixXd& gram, int k) {
  Eigen::MatrixXd inv = gram.inverse();
  Eigen::MatrixXd acc = inv;
  for (int i = 1; i < k; ++i) acc = acc * inv;
  return acc.trace();
}

inline double dense_quad_form(const Eigen::MatrixXd& gram, const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b, int k) {
  Eigen::MatrixXd inv = gram.inverse();
  Eigen::MatrixXd acc = inv;
  for (int i = 1; i < k; ++i) acc = acc * inv;
  return a.dot(acc * b);
}

inline double dense_cross_trace(const Eigen::MatrixXd& gram_a,
                                const Eigen::MatrixXd& gram_b) {
  return (gram_a.inverse() * gram_b.inverse()).trace();
}

inline double rel_err(double got, double want) {
  double scale = std::max({std::abs(got), std::abs(want), 1e-30});
  return std::abs(got - want) / scale;
}

} // namespace qi_test
