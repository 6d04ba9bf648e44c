#include "quadinfer/estimators.hpp"

#include <cmath>

#include "quadinfer/errors.hpp"

namespace quadinfer {

std::string flag_names(unsigned flags) {
  static const struct {
    unsigned bit;
    const char* name;
  } table[] = {
      {kFlagVarianceFloored, "variance_floored"},
      {kFlagNu4Floored, "nu4_floored"},
      {kFlagIntervalClamped, "interval_clamped"},
      {kFlagZeroScale, "zero_scale"},
  };
  std::string out;
  for (const auto& entry : table) {
    if ((flags & entry.bit) == 0) continue;
    if (!out.empty()) out += ',';
    out += entry.name;
  }
  return out;
}

double variance_floor(const ModelFit& fit) {
  if (fit.sigma2_hat <= 0.0) return 1e-300;
  return 1e-12 * fit.sigma2_hat * fit.sigma2_hat / fit.n;
}

namespace {

// Applies the floor-and-flag policy to a raw variance value.
double floor_variance(double raw, const ModelFit& fit, unsigned* flags) {
  if (raw > 0.0) return raw;
  if (flags != nullptr) {
    *flags |= kFlagVarianceFloored;
    if (fit.sigma2_hat <= 0.0) *flags |= kFlagZeroScale;
  }
  return variance_floor(fit);
}

} // namespace

double quad_norm_estimate(const ModelFit& fit) {
  return fit.beta_hat.squaredNorm() - fit.trace_inv[0] * fit.sigma2_hat;
}

double zeta_n2_hat(const ModelFit& fit, unsigned* flags) {
  const double s2 = fit.sigma2_hat;
  const double s4 = s2 * s2;
  double raw = 4.0 * s2 * quad_form_inv(fit, fit.beta_hat, fit.beta_hat, 1) -
               2.0 * s4 * fit.trace_inv[1] +
               2.0 * s4 * fit.trace_inv[0] * fit.trace_inv[0] / (fit.n - fit.p);
  return floor_variance(raw, fit, flags);
}

double zeta_star2_hat(const ModelFit& fit, unsigned* flags) {
  const double s4 = fit.sigma2_hat * fit.sigma2_hat;
  double raw = 2.0 * s4 *
               (fit.trace_inv[1] +
                fit.trace_inv[0] * fit.trace_inv[0] / (fit.n - fit.p));
  return floor_variance(raw, fit, flags);
}

double zeta0_2_hat(const ModelFit& fit) {
  return 4.0 * fit.sigma2_hat * quad_form_inv(fit, fit.beta_hat, fit.beta_hat, 1);
}

double nu4_hat(const ModelFit& fit, const Eigen::VectorXd& residuals,
               unsigned* flags) {
  if (residuals.size() != fit.n) {
    throw DimensionError("nu4_hat: residual length does not match fit");
  }
  const double tau = static_cast<double>(fit.p) / fit.n;
  const double s4 = fit.sigma2_hat * fit.sigma2_hat;
  const double mean_r4 = residuals.array().pow(4).mean();
  const double one_m = 1.0 - tau;
  double raw = (mean_r4 -
                3.0 * s4 * tau * one_m * one_m * (2.0 - tau)) /
               (one_m * one_m * one_m * one_m);
  if (raw <= s4) {
    if (flags != nullptr) *flags |= kFlagNu4Floored;
    return s4;
  }
  return raw;
}

double zeta_eps2_hat(const ModelFit& fit, double nu4, unsigned* flags) {
  const double tau = static_cast<double>(fit.p) / fit.n;
  const double s4 = fit.sigma2_hat * fit.sigma2_hat;
  double raw = (nu4 + s4 * (3.0 * tau - 1.0) / (1.0 - tau)) / fit.n;
  return floor_variance(raw, fit, flags);
}

VarianceEstimates variance_estimates(const ModelFit& fit,
                                     const Eigen::VectorXd& residuals) {
  VarianceEstimates v;
  v.zeta_n2 = zeta_n2_hat(fit, &v.floored);
  v.zeta_star2 = zeta_star2_hat(fit, &v.floored);
  v.zeta0_2 = zeta0_2_hat(fit);
  v.nu4_hat = nu4_hat(fit, residuals, &v.floored);
  v.zeta_eps2 = zeta_eps2_hat(fit, v.nu4_hat, &v.floored);
  return v;
}

SnrEstimates snr_estimates(const ModelFit& fit, const Dataset& d) {
  if (d.n() != fit.n || d.p() != fit.p) {
    throw DimensionError("snr_estimates: dataset does not match fit");
  }
  const double n = fit.n;
  const double tau = static_cast<double>(fit.p) / n;
  const double s2 = fit.sigma2_hat;
  const double s4 = s2 * s2;

  SnrEstimates out;
  // beta^T (X^T X / n) beta via the Cholesky factor: |L^T beta|^2 / n
  const double gram_form =
      (fit.gram_chol.transpose() * fit.beta_hat).squaredNorm() / n;
  out.eta_hat = gram_form - s2 * tau;
  const double scale = out.eta_hat + s2;
  if (!(scale > 0.0)) {
    throw DegenerateScaleError("snr_estimates: eta_hat + sigma2_hat <= 0");
  }
  out.rho_hat = out.eta_hat / scale;
  out.mean_y4 = d.y.array().pow(4).mean();

  const double nu4 = nu4_hat(fit, residuals(fit, d), &out.floored);
  const double eta = out.eta_hat;

  double rho_raw =
      (2.0 * s4 * s4 * tau / (1.0 - tau) -
       (2.0 + 4.0 * tau / (tau - 1.0)) * s4 * s2 * eta +
       s4 * (out.mean_y4 - nu4 + eta * eta * (4.0 * tau - 2.0) / (1.0 - tau)) +
       eta * eta * nu4) /
      (n * scale * scale * scale * scale);
  out.sigma2_rho = floor_variance(rho_raw, fit, &out.floored);

  double eta_raw = (out.mean_y4 - nu4 - 2.0 * s2 * eta - eta * eta +
                    2.0 * s4 * fit.p / (fit.n - fit.p)) /
                   n;
  out.sigma2_eta = floor_variance(eta_raw, fit, &out.floored);
  return out;
}

} // namespace quadinfer
