#include "quadinfer/inference.hpp"

#include <cmath>
#include <limits>

#include "quadinfer/errors.hpp"
#include "quadinfer/normal.hpp"

namespace quadinfer {

namespace {

enum class Tail { kUpper, kLower };

// Assembles the shared scaffolding: z, both p-values, and the symmetric
// two-sided interval on the estimate's scale.
InferenceResult make_result(double estimate, double std_error, double null_value,
                            double alpha, Tail tail, unsigned flags) {
  InferenceResult r;
  r.estimate = estimate;
  r.std_error = std_error;
  r.alpha = alpha;
  r.flags = flags;
  r.z = (estimate - null_value) / std_error;
  r.p_value = 2.0 * normal_cdf(-std::abs(r.z));
  r.p_value_one_sided =
      (tail == Tail::kUpper) ? 1.0 - normal_cdf(r.z) : normal_cdf(r.z);
  const double q = normal_quantile(1.0 - alpha / 2.0);
  r.ci_low_raw = estimate - q * std_error;
  r.ci_high_raw = estimate + q * std_error;
  r.ci_low = r.ci_low_raw;
  r.ci_high = r.ci_high_raw;
  return r;
}

void clamp_interval(InferenceResult& r, double lo, double hi) {
  const double clamped_lo = std::max(r.ci_low_raw, lo);
  const double clamped_hi = std::min(r.ci_high_raw, hi);
  if (clamped_lo != r.ci_low_raw || clamped_hi != r.ci_high_raw) {
    r.flags |= kFlagIntervalClamped;
  }
  r.ci_low = clamped_lo;
  r.ci_high = clamped_hi;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw DomainError("alpha must lie strictly inside (0,1)");
  }
}

// Zero-scale floors make the z-statistic meaningless; refuse loudly.
void reject_zero_scale(unsigned flags, const char* what) {
  if ((flags & kFlagZeroScale) != 0) {
    throw DegenerateVarianceError(what);
  }
}

// The global statistic's ingredients, shared with the confidence region.
double global_z(const ModelFit& fit, const Eigen::VectorXd& beta_null) {
  if (beta_null.size() != fit.p) {
    throw DimensionError("global test: null vector length does not match fit");
  }
  unsigned flags = 0;
  const double scale = zeta_star2_hat(fit, &flags);
  reject_zero_scale(flags, "global test: variance estimate at the zero floor");
  const double shifted = (fit.beta_hat - beta_null).squaredNorm() -
                         fit.trace_inv[0] * fit.sigma2_hat;
  return shifted / std::sqrt(scale);
}

} // namespace

InferenceResult test_quad_norm(const ModelFit& fit, double c0, double alpha) {
  check_alpha(alpha);
  if (c0 < 0.0) {
    throw DomainError("test_quad_norm: the null norm c0 must be nonnegative");
  }
  unsigned flags = 0;
  const double var = zeta_n2_hat(fit, &flags);
  reject_zero_scale(flags, "test_quad_norm: variance estimate at the zero floor");
  return make_result(quad_norm_estimate(fit), std::sqrt(var), c0 * c0, alpha,
                     Tail::kUpper, flags);
}

InferenceResult test_conventional(const ModelFit& fit, double c0, double alpha) {
  check_alpha(alpha);
  if (c0 < 0.0) {
    throw DomainError("test_conventional: the null norm c0 must be nonnegative");
  }
  const double var = zeta0_2_hat(fit);
  if (!(var > 0.0)) {
    throw DegenerateVarianceError("test_conventional: zero variance estimate");
  }
  return make_result(fit.beta_hat.squaredNorm(), std::sqrt(var), c0 * c0, alpha,
                     Tail::kUpper, 0);
}

InferenceResult test_signal_detection(const ModelFit& fit, double alpha) {
  check_alpha(alpha);
  unsigned flags = 0;
  const double var = zeta_star2_hat(fit, &flags);
  reject_zero_scale(flags,
                    "test_signal_detection: variance estimate at the zero floor");
  return make_result(quad_norm_estimate(fit), std::sqrt(var), 0.0, alpha,
                     Tail::kUpper, flags);
}

InferenceResult test_global(const ModelFit& fit, const Eigen::VectorXd& beta_null,
                            double alpha) {
  check_alpha(alpha);
  if (beta_null.size() != fit.p) {
    throw DimensionError("test_global: null vector length does not match fit");
  }
  unsigned flags = 0;
  const double var = zeta_star2_hat(fit, &flags);
  reject_zero_scale(flags, "test_global: variance estimate at the zero floor");
  const double est = (fit.beta_hat - beta_null).squaredNorm() -
                     fit.trace_inv[0] * fit.sigma2_hat;
  return make_result(est, std::sqrt(var), 0.0, alpha, Tail::kUpper, flags);
}

bool confidence_region_contains(const ModelFit& fit, const Eigen::VectorXd& beta,
                                double alpha, Side side) {
  check_alpha(alpha);
  const double z = global_z(fit, beta);
  if (side == Side::kTwo) {
    return std::abs(z) <= normal_quantile(1.0 - alpha / 2.0);
  }
  return z <= normal_quantile(1.0 - alpha);
}

InferenceResult test_error_variance(const ModelFit& fit,
                                    const Eigen::VectorXd& residuals,
                                    double sigma2_null, double alpha) {
  check_alpha(alpha);
  if (sigma2_null < 0.0) {
    throw DomainError("test_error_variance: sigma2_null must be nonnegative");
  }
  unsigned flags = 0;
  const double nu4 = nu4_hat(fit, residuals, &flags);
  const double var = zeta_eps2_hat(fit, nu4, &flags);
  reject_zero_scale(flags,
                    "test_error_variance: variance estimate at the zero floor");
  InferenceResult r = make_result(fit.sigma2_hat, std::sqrt(var), sigma2_null,
                                  alpha, Tail::kUpper, flags);
  clamp_interval(r, 0.0, std::numeric_limits<double>::infinity());
  return r;
}

InferenceResult test_rho(const ModelFit& fit, const Dataset& data, double rho_null,
                         double alpha, bool conventional) {
  check_alpha(alpha);
  if (!(rho_null > 0.0) || !(rho_null < 1.0)) {
    throw DomainError("test_rho: rho_null must lie strictly inside (0,1)");
  }
  double estimate = 0.0;
  double variance = 0.0;
  unsigned flags = 0;
  if (!conventional) {
    SnrEstimates snr = snr_estimates(fit, data);
    flags = snr.floored;
    estimate = snr.rho_hat;
    variance = snr.sigma2_rho;
  } else {
    // Uncorrected baseline: raw signal strength and the raw fourth moment of
    // the residuals, valid only when p/n is negligible.
    const double n = fit.n;
    const double s2 = fit.sigma2_hat;
    const double s4 = s2 * s2;
    const double eta =
        (fit.gram_chol.transpose() * fit.beta_hat).squaredNorm() / n;
    const double scale = eta + s2;
    if (!(scale > 0.0)) {
      throw DegenerateScaleError("test_rho: eta_tilde + sigma2_hat <= 0");
    }
    estimate = eta / scale;
    const double e4 = residuals(fit, data).array().pow(4).mean();
    const double m4y = data.y.array().pow(4).mean();
    double raw = (s4 * (m4y - e4) - 2.0 * s4 * s2 * eta +
                  eta * eta * (e4 - 2.0 * s4)) /
                 (n * scale * scale * scale * scale);
    if (raw > 0.0) {
      variance = raw;
    } else {
      flags |= kFlagVarianceFloored;
      if (s2 <= 0.0) flags |= kFlagZeroScale;
      variance = variance_floor(fit);
    }
  }
  reject_zero_scale(flags, "test_rho: variance estimate at the zero floor");
  InferenceResult r = make_result(estimate, std::sqrt(variance), rho_null, alpha,
                                  Tail::kLower, flags);
  clamp_interval(r, 0.0, 1.0);
  return r;
}

InferenceResult ci_eta(const ModelFit& fit, const Dataset& data, double alpha) {
  check_alpha(alpha);
  SnrEstimates snr = snr_estimates(fit, data);
  reject_zero_scale(snr.floored, "ci_eta: variance estimate at the zero floor");
  return make_result(snr.eta_hat, std::sqrt(snr.sigma2_eta), 0.0, alpha,
                     Tail::kUpper, snr.floored);
}

InferenceResult linear_functional_inference(const ModelFit& fit,
                                            const Eigen::VectorXd& c, double alpha) {
  check_alpha(alpha);
  if (c.size() != fit.p) {
    throw DimensionError(
        "linear_functional_inference: contrast length does not match fit");
  }
  const double var = fit.sigma2_hat * quad_form_inv(fit, c, c, 1);
  if (!(var > 0.0)) {
    throw DegenerateVarianceError(
        "linear_functional_inference: zero variance estimate");
  }
  return make_result(c.dot(fit.beta_hat), std::sqrt(var), 0.0, alpha, Tail::kUpper,
                     0);
}

double power_quad_norm(double gap, double zeta_n, double alpha) {
  check_alpha(alpha);
  if (!(zeta_n > 0.0)) {
    throw DomainError("power_quad_norm: zeta_n must be positive");
  }
  const double q = normal_quantile(1.0 - alpha / 2.0);
  const double shift = gap / zeta_n;
  return 1.0 - normal_cdf(-shift + q) + normal_cdf(-shift - q);
}

} // namespace quadinfer
