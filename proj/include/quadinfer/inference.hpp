#pragma once

#include <Eigen/Dense>

#include "quadinfer/dataset.hpp"
#include "quadinfer/estimators.hpp"
#include "quadinfer/model_fit.hpp"

namespace quadinfer {

// Tail convention for confidence regions.
enum class Side { kOne, kTwo };

// Outcome of one test / interval procedure.
//
// `p_value` is always the two-sided value 2*Phi(-|z|).  `p_value_one_sided`
// carries the natural one-sided value where the procedure has a directional
// alternative (documented per function); otherwise it equals the matching
// one-tailed probability for reference.
//
// `ci_low`/`ci_high` may be clamped to the parameter's support (rho to [0,1],
// sigma^2 to [0,inf), theta to [-1,1]); the unclamped endpoints are kept in
// `ci_low_raw`/`ci_high_raw` and kFlagIntervalClamped is set when they differ.
struct InferenceResult {
  double estimate = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  double p_value_one_sided = 1.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double ci_low_raw = 0.0;
  double ci_high_raw = 0.0;
  double alpha = 0.05;
  unsigned flags = 0;
};

// Test of H0: ||beta||_2 = c0 via the bias-and-variance-corrected statistic
// z = (quad_norm_estimate - c0^2) / zeta_n.  The estimate and CI refer to the
// squared norm ||beta||^2.  One-sided p-value is the upper tail (signal larger
// than the null).  Throws DegenerateVarianceError when the variance estimate
// sits at the zero-scale floor.
InferenceResult test_quad_norm(const ModelFit& fit, double c0, double alpha = 0.05);

// Conventional (fixed-p) z-test of H0: ||beta||_2 = c0 using the uncorrected
// ||beta_hat||^2 and the 4*sigma^2*quadratic-form variance.  Miscalibrated when
// p/n is not small; kept as the comparison baseline.
InferenceResult test_conventional(const ModelFit& fit, double c0, double alpha = 0.05);

// Signal detection: H0: beta = 0 against the presence of any signal.
// z = quad_norm_estimate / zeta_star.  One-sided p-value is the upper tail.
InferenceResult test_signal_detection(const ModelFit& fit, double alpha = 0.05);

// Global test of H0: beta = beta_null via
// z = { ||beta_hat - beta_null||^2 - tr((X^T X)^{-1}) sigma^2 } / zeta_star.
InferenceResult test_global(const ModelFit& fit, const Eigen::VectorXd& beta_null,
                            double alpha = 0.05);

// Membership of `beta` in the confidence region dual to the global test.
// Side::kTwo uses |z| <= Phi^{-1}(1-alpha/2); Side::kOne uses z <= Phi^{-1}(1-alpha).
bool confidence_region_contains(const ModelFit& fit, const Eigen::VectorXd& beta,
                                double alpha, Side side);

// Test of H0: sigma_eps^2 = sigma2_null, dimension-adaptive standard error.
// CI for sigma^2 clamped below at 0 (flagged).  `residuals` must be Y - X beta_hat
// from the same fit (see residuals()).
InferenceResult test_error_variance(const ModelFit& fit, const Eigen::VectorXd& residuals,
                                    double sigma2_null, double alpha = 0.05);

// Test of H0: rho0 = rho_null for the fraction of variance explained.
// One-sided p-value is the LOWER tail (alternative rho0 < rho_null).
// CI clamped to [0,1] (flagged).  `conventional = true` switches to the
// fixed-p comparison statistic with its own plug-in variance.
InferenceResult test_rho(const ModelFit& fit, const Dataset& data, double rho_null,
                         double alpha = 0.05, bool conventional = false);

// Confidence interval + trivial z-report for the signal strength eta0.
// z is (eta_hat - 0)/sigma_eta, i.e. a signal-presence z-score; the interval
// is eta_hat +/- Phi^{-1}(1-alpha/2) * sigma_eta, unclamped.
InferenceResult ci_eta(const ModelFit& fit, const Dataset& data, double alpha = 0.05);

// Inference on the linear functional c^T beta with standard error
// sigma_hat_L = sqrt(sigma2_hat * c^T (X^T X)^{-1} c).  c = e_j recovers the
// classical per-coefficient z-test.  Throws DegenerateVarianceError when the
// standard error is exactly zero (e.g. c = 0).
InferenceResult linear_functional_inference(const ModelFit& fit, const Eigen::VectorXd& c,
                                            double alpha = 0.05);

// Asymptotic power of the two-sided quad-norm test at a fixed alternative with
// squared-norm gap `gap = c1^2 - c0^2` and standard error `zeta_n`:
//   1 - Phi(-gap/zeta_n + Phi^{-1}(1-alpha/2)) + Phi(-gap/zeta_n - Phi^{-1}(1-alpha/2)).
double power_quad_norm(double gap, double zeta_n, double alpha);

} // namespace quadinfer
