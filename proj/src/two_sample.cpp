#include "quadinfer/two_sample.hpp"

#include <cmath>
#include <utility>

#include "quadinfer/errors.hpp"
#include "quadinfer/estimators.hpp"
#include "quadinfer/normal.hpp"

namespace quadinfer {

namespace {

// The per-sample ingredient 2 s^4 { tr(G^{-2}) - [tr(G^{-1})]^2/(n-p) } enters
// the two-sample variances with a NEGATIVE overall sign: the plug-in quadratic
// pieces below already over-count by exactly this amount.
double trace_correction(const ModelFit& fit) {
  const double s4 = fit.sigma2_hat * fit.sigma2_hat;
  return 2.0 * s4 *
         (-fit.trace_inv[1] +
          fit.trace_inv[0] * fit.trace_inv[0] / (fit.n - fit.p));
}

// Null-hypothesis counterpart: with no quadratic pieces to over-count, both
// trace terms contribute positively.  Equals the one-sample null variance
// zeta_star2_hat of the fit.
double null_trace_sum(const ModelFit& fit) {
  const double s4 = fit.sigma2_hat * fit.sigma2_hat;
  return 2.0 * s4 *
         (fit.trace_inv[1] +
          fit.trace_inv[0] * fit.trace_inv[0] / (fit.n - fit.p));
}

double floor_pair(const TwoSampleFit& ts, unsigned* flags) {
  if (flags != nullptr) {
    *flags |= kFlagVarianceFloored;
    if (ts.fit_a.sigma2_hat <= 0.0 && ts.fit_b.sigma2_hat <= 0.0) {
      *flags |= kFlagZeroScale;
    }
  }
  return std::max(variance_floor(ts.fit_a), variance_floor(ts.fit_b));
}

// Bias-corrected squared norm of one sample's coefficients.
double corrected_norm2(const ModelFit& fit) {
  return fit.beta_hat.squaredNorm() - fit.trace_inv[0] * fit.sigma2_hat;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw DomainError("alpha must lie strictly inside (0,1)");
  }
}

InferenceResult assemble(double estimate, double std_error, double null_value,
                         double alpha, unsigned flags) {
  InferenceResult r;
  r.estimate = estimate;
  r.std_error = std_error;
  r.alpha = alpha;
  r.flags = flags;
  r.z = (estimate - null_value) / std_error;
  r.p_value = 2.0 * normal_cdf(-std::abs(r.z));
  r.p_value_one_sided = 1.0 - normal_cdf(r.z);
  const double q = normal_quantile(1.0 - alpha / 2.0);
  r.ci_low_raw = estimate - q * std_error;
  r.ci_high_raw = estimate + q * std_error;
  r.ci_low = r.ci_low_raw;
  r.ci_high = r.ci_high_raw;
  return r;
}

} // namespace

TwoSampleFit make_two_sample(ModelFit fit_a, ModelFit fit_b) {
  if (fit_a.p != fit_b.p) {
    throw DimensionError("make_two_sample: coefficient dimensions differ");
  }
  TwoSampleFit ts;
  ts.cross_trace = cross_trace(fit_a, fit_b);
  ts.fit_a = std::move(fit_a);
  ts.fit_b = std::move(fit_b);
  return ts;
}

double diff_norm_estimate(const TwoSampleFit& ts) {
  return (ts.fit_a.beta_hat - ts.fit_b.beta_hat).squaredNorm() -
         ts.fit_a.trace_inv[0] * ts.fit_a.sigma2_hat -
         ts.fit_b.trace_inv[0] * ts.fit_b.sigma2_hat;
}

double sigma2_diff_hat(const TwoSampleFit& ts, unsigned* flags) {
  const ModelFit& a = ts.fit_a;
  const ModelFit& b = ts.fit_b;
  Eigen::VectorXd d = a.beta_hat - b.beta_hat;
  double raw = trace_correction(a) + trace_correction(b) -
               4.0 * a.sigma2_hat * b.sigma2_hat * ts.cross_trace +
               4.0 * a.sigma2_hat * quad_form_inv(a, d, d, 1) +
               4.0 * b.sigma2_hat * quad_form_inv(b, d, d, 1);
  if (raw > 0.0) return raw;
  return floor_pair(ts, flags);
}

double equality_null_variance(const TwoSampleFit& ts, unsigned* flags) {
  const ModelFit& a = ts.fit_a;
  const ModelFit& b = ts.fit_b;
  double raw = null_trace_sum(a) + null_trace_sum(b) +
               4.0 * a.sigma2_hat * b.sigma2_hat * ts.cross_trace;
  if (raw > 0.0) return raw;
  return floor_pair(ts, flags);
}

InferenceResult test_equality(const TwoSampleFit& ts, double alpha) {
  check_alpha(alpha);
  unsigned flags = 0;
  // The denominator is evaluated at the hypothesis being tested.  The
  // unrestricted plug-in sigma2_diff_hat is dominated by quadratic forms in
  // beta_hat - gamma_hat, so under the null it rises and falls with the
  // numerator itself; dividing by it skews the statistic left in moderate
  // dimensions.  Pinning the difference to zero removes those terms and
  // leaves an essentially ancillary denominator.
  const double var = equality_null_variance(ts, &flags);
  if ((flags & kFlagZeroScale) != 0) {
    throw DegenerateVarianceError(
        "test_equality: variance estimate at the zero floor");
  }
  return assemble(diff_norm_estimate(ts), std::sqrt(var), 0.0, alpha, flags);
}

double theta_hat(const TwoSampleFit& ts) {
  const double bc_beta = corrected_norm2(ts.fit_a);
  const double bc_gamma = corrected_norm2(ts.fit_b);
  if (!(bc_beta > 0.0) || !(bc_gamma > 0.0)) {
    throw DegenerateDenominatorError(
        "theta_hat: a bias-corrected squared norm is not positive");
  }
  return ts.fit_b.beta_hat.dot(ts.fit_a.beta_hat) /
         (std::sqrt(bc_beta) * std::sqrt(bc_gamma));
}

InferenceResult test_coheritability(const TwoSampleFit& ts, double theta_null,
                                    double alpha, bool conventional) {
  check_alpha(alpha);
  if (!(theta_null > -1.0) || !(theta_null < 1.0)) {
    throw DomainError(
        "test_coheritability: theta_null must lie strictly inside (-1,1)");
  }
  const ModelFit& a = ts.fit_a;
  const ModelFit& b = ts.fit_b;
  const double ip = b.beta_hat.dot(a.beta_hat);

  double estimate = 0.0;
  double raw = 0.0;
  if (!conventional) {
    const double bc_beta = corrected_norm2(a);
    const double bc_gamma = corrected_norm2(b);
    if (!(bc_beta > 0.0) || !(bc_gamma > 0.0)) {
      throw DegenerateDenominatorError(
          "test_coheritability: a bias-corrected squared norm is not positive");
    }
    estimate = ip / (std::sqrt(bc_beta) * std::sqrt(bc_gamma));
    Eigen::VectorXd bh = a.beta_hat - b.beta_hat * (ip / bc_gamma);
    Eigen::VectorXd ah = b.beta_hat - a.beta_hat * (ip / bc_beta);
    raw = (-a.sigma2_hat * b.sigma2_hat * ts.cross_trace +
           b.sigma2_hat * quad_form_inv(b, bh, bh, 1) +
           a.sigma2_hat * quad_form_inv(a, ah, ah, 1)) /
              (bc_beta * bc_gamma) +
          ip * ip / (4.0 * bc_beta * bc_gamma * bc_gamma * bc_gamma) *
              trace_correction(b) +
          ip * ip / (4.0 * bc_beta * bc_beta * bc_beta * bc_gamma) *
              trace_correction(a);
  } else {
    const double nb = a.beta_hat.squaredNorm();
    const double ng = b.beta_hat.squaredNorm();
    if (!(nb > 0.0) || !(ng > 0.0)) {
      throw DegenerateDenominatorError(
          "test_coheritability: a coefficient norm is zero");
    }
    estimate = ip / (std::sqrt(nb) * std::sqrt(ng));
    Eigen::VectorXd bt = a.beta_hat - b.beta_hat * (ip / ng);
    Eigen::VectorXd at = b.beta_hat - a.beta_hat * (ip / nb);
    raw = (b.sigma2_hat * quad_form_inv(b, bt, bt, 1) +
           a.sigma2_hat * quad_form_inv(a, at, at, 1)) /
          (nb * ng);
  }

  unsigned flags = 0;
  double var = raw;
  if (!(raw > 0.0)) {
    var = floor_pair(ts, &flags);
    if ((flags & kFlagZeroScale) != 0) {
      throw DegenerateVarianceError(
          "test_coheritability: variance estimate at the zero floor");
    }
  }
  InferenceResult r = assemble(estimate, std::sqrt(var), theta_null, alpha, flags);
  const double lo = std::max(r.ci_low_raw, -1.0);
  const double hi = std::min(r.ci_high_raw, 1.0);
  if (lo != r.ci_low_raw || hi != r.ci_high_raw) r.flags |= kFlagIntervalClamped;
  r.ci_low = lo;
  r.ci_high = hi;
  return r;
}

} // namespace quadinfer
