#pragma once

#include <array>

#include <Eigen/Dense>

#include "quadinfer/dataset.hpp"

namespace quadinfer {

// Ordinary least squares fit together with every Gram-matrix derived quantity
// the estimators need: the Cholesky factor of X^T X, its inverse factor, and
// traces of the first three inverse powers. Immutable after construction.
struct ModelFit {
    Eigen::VectorXd beta_hat;        // OLS coefficients
    double sigma2_hat = 0.0;         // residual variance, |Y - X beta|^2 / (n - p)
    Eigen::MatrixXd gram_chol;       // lower-triangular L with X^T X = L L^T
    Eigen::MatrixXd chol_inv;        // W = L^{-1}, cached for trace/quad-form work
    std::array<double, 3> trace_inv{}; // tr (X^T X)^{-k} for k = 1, 2, 3
    int n = 0;
    int p = 0;
};

// Fits OLS on a full-rank dataset (n > p >= 1). Solves the normal equations
// through a Cholesky factorization of X^T X and caches the inverse-power
// traces. Throws DimensionError on bad shapes and SingularGramError when the
// Gram matrix is not positive definite at the rank tolerance.
ModelFit ols_fit(const Dataset& d);

// Builds a ModelFit from an explicit symmetric positive definite Gram matrix
// plus externally supplied coefficients and residual variance. Intended for
// synthetic fits in diagnostics and tests; ols_fit is the normal entry point.
ModelFit fit_from_gram(const Eigen::MatrixXd& gram, Eigen::VectorXd beta_hat,
                       double sigma2_hat, int n);

// tr (X^T X)^{-k} for k in {1,2,3}; cached at fit time.
double trace_inv_power(const ModelFit& fit, int k);

// a^T (X^T X)^{-k} b for k in {1,2}, via the cached inverse Cholesky factor.
// Symmetric in (a, b). Throws DimensionError on length mismatch or bad k.
double quad_form_inv(const ModelFit& fit, const Eigen::VectorXd& a,
                     const Eigen::VectorXd& b, int k);

// tr{(X^T X)^{-1} (V^T V)^{-1}} for two fits sharing the coefficient
// dimension; strictly positive. Throws DimensionError if p differs.
double cross_trace(const ModelFit& fit_a, const ModelFit& fit_b);

// Residual vector Y - X beta_hat for the dataset the fit came from.
Eigen::VectorXd residuals(const ModelFit& fit, const Dataset& d);

} // namespace quadinfer
