#pragma once

#include <string>

#include <Eigen/Dense>

#include "quadinfer/dataset.hpp"
#include "quadinfer/model_fit.hpp"

namespace quadinfer {

// Diagnostic flag bits shared by estimators and test results.
enum FlagBits : unsigned {
    kFlagVarianceFloored = 1u << 0, // a raw variance estimate was <= 0 and clamped
    kFlagNu4Floored      = 1u << 1, // nu4 fell below sigma^4 and was clamped
    kFlagIntervalClamped = 1u << 2, // a confidence bound was clamped to the domain
    kFlagZeroScale       = 1u << 3, // floor hit at sigma = 0 (absolute floor)
};

// Names the set bits, comma separated ("variance_floored,interval_clamped").
std::string flag_names(unsigned flags);

// Positive floor used when a plug-in variance goes nonpositive:
// 1e-12 * sigma_hat^4 / n, or the absolute floor 1e-300 when sigma_hat = 0.
double variance_floor(const ModelFit& fit);

// Variance estimates for the one-sample statistics.
struct VarianceEstimates {
    double zeta_n2 = 0.0;   // variance of the bias-corrected squared norm
    double zeta_star2 = 0.0; // null-refined variance (signal detection / global)
    double zeta0_2 = 0.0;   // conventional variance 4 sigma^2 b^T (X^T X)^{-1} b
    double zeta_eps2 = 0.0; // variance of sigma2_hat
    double nu4_hat = 0.0;   // fourth-moment estimate of the errors
    unsigned floored = 0;   // FlagBits for any clamped component
};

// Signal-strength and fraction-of-variance-explained estimates.
struct SnrEstimates {
    double eta_hat = 0.0;    // bias-corrected estimate of beta^T Sigma beta
    double rho_hat = 0.0;    // eta / (eta + sigma^2)
    double sigma2_rho = 0.0; // plug-in variance of rho_hat
    double sigma2_eta = 0.0; // plug-in variance of eta_hat
    double mean_y4 = 0.0;    // n^{-1} sum Y_i^4
    unsigned floored = 0;
};

// Bias-corrected estimate of |beta|^2: |beta_hat|^2 - tr{(X^T X)^{-1}} sigma2_hat.
// May be negative; the point estimate is never clamped.
double quad_norm_estimate(const ModelFit& fit);

// Plug-in variance of the bias-corrected squared norm:
//   4 s2 b^T A^{-1} b - 2 s4 tr(A^{-2}) + 2 s4 [tr(A^{-1})]^2 / (n - p),
// with A = X^T X, s2 = sigma2_hat. Floored with flag when the raw value <= 0.
double zeta_n2_hat(const ModelFit& fit, unsigned* flags = nullptr);

// Null-refined variance 2 s4 tr(A^{-2}) + 2 s4 [tr(A^{-1})]^2 / (n - p).
// Nonnegative by construction; flagged floor only when sigma2_hat = 0.
double zeta_star2_hat(const ModelFit& fit, unsigned* flags = nullptr);

// Conventional variance 4 s2 b^T A^{-1} b; always >= 0, never floored.
double zeta0_2_hat(const ModelFit& fit);

// Fourth-moment estimator from residuals, corrected for fitting shrinkage:
//   (1 - p/n)^{-4} { mean(res^4) - 3 s4 (p/n)(1 - p/n)^2 (2 - p/n) }.
// Floored at sigma2_hat^2 (Jensen bound) with flag.
double nu4_hat(const ModelFit& fit, const Eigen::VectorXd& residuals,
               unsigned* flags = nullptr);

// Variance of sigma2_hat: n^{-1} { nu4 + s4 (3 p/n - 1) / (1 - p/n) }.
double zeta_eps2_hat(const ModelFit& fit, double nu4, unsigned* flags = nullptr);

// All of the above in one pass.
VarianceEstimates variance_estimates(const ModelFit& fit,
                                     const Eigen::VectorXd& residuals);

// Signal strength eta_hat = b^T (X^T X / n) b - sigma2_hat p/n, the ratio
// rho_hat = eta / (eta + sigma2), and their plug-in variances. Throws
// DegenerateScaleError when eta_hat + sigma2_hat <= 0 (identically zero Y).
SnrEstimates snr_estimates(const ModelFit& fit, const Dataset& d);

} // namespace quadinfer
