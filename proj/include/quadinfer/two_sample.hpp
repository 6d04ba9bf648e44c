#pragma once

#include <Eigen/Dense>

#include "quadinfer/inference.hpp"
#include "quadinfer/model_fit.hpp"

namespace quadinfer {

// Two independent regressions sharing the coefficient dimension p:
// sample A (design X, coefficients beta, noise variance sigma_eps^2) and
// sample B (design V, coefficients gamma, noise variance sigma_delta^2).
struct TwoSampleFit {
  ModelFit fit_a;
  ModelFit fit_b;
  double cross_trace = 0.0; // tr{(X^T X)^{-1} (V^T V)^{-1}}, cached
};

// Builds a TwoSampleFit, validating the shared dimension and caching the
// cross trace.  Throws DimensionError on p mismatch.
TwoSampleFit make_two_sample(ModelFit fit_a, ModelFit fit_b);

// Bias-corrected estimate of ||beta - gamma||^2:
//   ||beta_hat - gamma_hat||^2 - tr{(X^T X)^{-1}} s2a - tr{(V^T V)^{-1}} s2b.
// May be negative; no clamping.
double diff_norm_estimate(const TwoSampleFit& ts);

// Plug-in variance for diff_norm_estimate (six-term expression combining both
// samples' trace corrections, the cross trace, and the two quadratic forms in
// beta_hat - gamma_hat).  Consistent under any truth; this is the variance to
// use when the difference need not be zero.  Raw value; floored with flag if
// <= 0.
double sigma2_diff_hat(const TwoSampleFit& ts, unsigned* flags = nullptr);

// Variance of diff_norm_estimate evaluated under H0: beta = gamma.  With the
// difference pinned to zero the quadratic-form terms of sigma2_diff_hat drop
// out and the trace terms enter with positive sign; the result decomposes as
//   zeta_star2_hat(fit_a) + zeta_star2_hat(fit_b) + 4 s2a s2b cross_trace.
// Floored with flag if <= 0 (possible only when both noise scales vanish).
double equality_null_variance(const TwoSampleFit& ts, unsigned* flags = nullptr);

// Test of H0: beta = gamma via z = diff_norm_estimate / sqrt(v) with
// v = equality_null_variance: a null-evaluated denominator keeps the statistic
// decoupled from ||beta_hat - gamma_hat||^2, which the unrestricted plug-in
// would track closely enough to skew the null distribution visibly in
// moderate dimensions.  One-sided p-value is the upper tail (norms farther
// apart than the null).
InferenceResult test_equality(const TwoSampleFit& ts, double alpha = 0.05);

// Normalized cross-regression inner product
//   theta_hat = gamma_hat^T beta_hat / (sqrt(bc_beta) * sqrt(bc_gamma)),
// where bc_* are the bias-corrected squared norms.  Unclamped; may exceed 1 in
// magnitude.  Throws DegenerateDenominatorError when either corrected norm is
// not strictly positive.
double theta_hat(const TwoSampleFit& ts);

// Test of H0: theta0 = theta_null.  CI clamped to [-1,1] (flagged).
// `conventional = true` uses the uncorrected estimator (raw norms, no trace
// corrections) and its plug-in variance as the comparison baseline.
InferenceResult test_coheritability(const TwoSampleFit& ts, double theta_null,
                                    double alpha = 0.05, bool conventional = false);

} // namespace quadinfer
