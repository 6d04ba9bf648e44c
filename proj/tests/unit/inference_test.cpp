#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "quadinfer/errors.hpp"
#include "quadinfer/estimators.hpp"
#include "quadinfer/inference.hpp"
#include "quadinfer/normal.hpp"

using namespace quadinfer;

namespace {

ModelFit random_fit(unsigned seed, int n = 40, int p = 6) {
  Dataset d = qi_test::random_dataset(n, p, seed);
  return ols_fit(d);
}

void check_common_contract(const InferenceResult& r) {
  CHECK(r.p_value >= 0.0);
  CHECK(r.p_value <= 1.0);
  CHECK(r.std_error >= 0.0);
  CHECK(r.ci_low <= r.ci_high);
  CHECK(std::abs(r.p_value - 2.0 * normal_cdf(-std::abs(r.z))) < 1e-12);
  double q = normal_quantile(1.0 - r.alpha / 2.0);
  CHECK(std::abs((r.ci_high_raw - r.ci_low_raw) - 2.0 * q * r.std_error) <
        1e-10 * (1.0 + r.std_error));
}

} // namespace

TEST_CASE("test_quad_norm: null at the estimate gives z = 0, p = 1") {
  ModelFit fit = random_fit(1);
  double est = quad_norm_estimate(fit);
  REQUIRE(est > 0.0);
  InferenceResult r = test_quad_norm(fit, std::sqrt(est), 0.05);
  CHECK(std::abs(r.z) < 1e-12);
  CHECK(r.p_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.estimate == doctest::Approx(est).epsilon(1e-14));
  check_common_contract(r);
}

TEST_CASE("test_quad_norm: z and CI match the displayed pieces") {
  ModelFit fit = random_fit(2);
  double c0 = 0.7;
  InferenceResult r = test_quad_norm(fit, c0, 0.10);
  double se = std::sqrt(zeta_n2_hat(fit));
  CHECK(std::abs(r.z - (quad_norm_estimate(fit) - c0 * c0) / se) < 1e-12);
  CHECK(r.std_error == doctest::Approx(se).epsilon(1e-13));
  double q = normal_quantile(0.95);
  CHECK(r.ci_low == doctest::Approx(r.estimate - q * se).epsilon(1e-12));
  CHECK(r.ci_high == doctest::Approx(r.estimate + q * se).epsilon(1e-12));
  check_common_contract(r);
}

TEST_CASE("test_quad_norm: noiseless fit raises degenerate variance") {
  Eigen::MatrixXd gram = qi_test::random_spd(3, 3);
  ModelFit fit = fit_from_gram(gram, qi_test::random_vector(3, 4), 0.0, 20);
  CHECK_THROWS_AS(test_quad_norm(fit, 1.0, 0.05), DegenerateVarianceError);
}

TEST_CASE("test_conventional: z = 0 at the raw squared norm") {
  ModelFit fit = random_fit(5);
  double c0 = fit.beta_hat.norm();
  InferenceResult r = test_conventional(fit, c0, 0.05);
  CHECK(std::abs(r.z) < 1e-10);
  CHECK(r.estimate == doctest::Approx(fit.beta_hat.squaredNorm()).epsilon(1e-13));
  check_common_contract(r);
  // zero beta and zero sigma make the conventional scale collapse
  Eigen::MatrixXd gram = qi_test::random_spd(3, 6);
  ModelFit fz = fit_from_gram(gram, Eigen::VectorXd::Zero(3), 0.0, 15);
  CHECK_THROWS_AS(test_conventional(fz, 0.5, 0.05), DegenerateVarianceError);
}

TEST_CASE("test_signal_detection: matches the shared numerator and one-sided tail") {
  ModelFit fit = random_fit(7);
  InferenceResult r = test_signal_detection(fit, 0.05);
  double se = std::sqrt(zeta_star2_hat(fit));
  CHECK(std::abs(r.z - quad_norm_estimate(fit) / se) < 1e-12);
  CHECK(std::abs(r.p_value_one_sided - (1.0 - normal_cdf(r.z))) < 1e-12);
  check_common_contract(r);
  // noiseless fit: degenerate
  Eigen::MatrixXd gram = qi_test::random_spd(3, 8);
  ModelFit fz = fit_from_gram(gram, qi_test::random_vector(3, 9), 0.0, 15);
  CHECK_THROWS_AS(test_signal_detection(fz), DegenerateVarianceError);
}

TEST_CASE("test_global: plug-in identities") {
  ModelFit fit = random_fit(10);
  // at beta_null = beta_hat the numerator is exactly -tr{(X^T X)^{-1}} sigma2
  InferenceResult at_hat = test_global(fit, fit.beta_hat, 0.05);
  double se = std::sqrt(zeta_star2_hat(fit));
  double want = -trace_inv_power(fit, 1) * fit.sigma2_hat / se;
  CHECK(std::abs(at_hat.z - want) < 1e-12);

  // at beta_null = 0 it equals the signal-detection statistic exactly
  InferenceResult at_zero = test_global(fit, Eigen::VectorXd::Zero(fit.p), 0.05);
  InferenceResult sig = test_signal_detection(fit, 0.05);
  CHECK(at_zero.z == doctest::Approx(sig.z).epsilon(1e-13));
  CHECK_THROWS_AS(test_global(fit, Eigen::VectorXd::Zero(fit.p + 1), 0.05),
                  DimensionError);
}

TEST_CASE("confidence_region_contains: membership inequalities") {
  ModelFit fit = random_fit(11);
  double alpha = 0.05;
  double se = std::sqrt(zeta_star2_hat(fit));
  double shift = trace_inv_power(fit, 1) * fit.sigma2_hat;
  bool in_two = confidence_region_contains(fit, fit.beta_hat, alpha, Side::kTwo);
  CHECK(in_two == (shift <= normal_quantile(1.0 - alpha / 2.0) * se));
  // the one-sided region always contains beta_hat (its statistic is negative)
  CHECK(confidence_region_contains(fit, fit.beta_hat, alpha, Side::kOne));

  // a far-away point is excluded by both
  Eigen::VectorXd far = fit.beta_hat.array() + 100.0;
  CHECK_FALSE(confidence_region_contains(fit, far, alpha, Side::kOne));
  CHECK_FALSE(confidence_region_contains(fit, far, alpha, Side::kTwo));
}

TEST_CASE("test_error_variance: z = 0 at the fitted value; CI clamped at 0") {
  Dataset d = qi_test::random_dataset(40, 6, 12);
  ModelFit fit = ols_fit(d);
  Eigen::VectorXd r = residuals(fit, d);
  InferenceResult at_hat = test_error_variance(fit, r, fit.sigma2_hat, 0.05);
  CHECK(std::abs(at_hat.z) < 1e-12);
  CHECK(at_hat.estimate == doctest::Approx(fit.sigma2_hat).epsilon(1e-14));
  check_common_contract(at_hat);

  // huge alpha-complement quantile cannot push the lower bound below 0
  InferenceResult wide = test_error_variance(fit, r, 1.0, 1e-12);
  CHECK(wide.ci_low >= 0.0);
  if (wide.ci_low_raw < 0.0) CHECK((wide.flags & kFlagIntervalClamped) != 0);
  CHECK_THROWS_AS(test_error_variance(fit, r, -1.0, 0.05), DomainError);
}

TEST_CASE("test_rho: null at the estimate, one-sided direction, clamping") {
  Dataset d = qi_test::random_dataset(60, 8, 13);
  d = center_dataset(d);
  ModelFit fit = ols_fit(d);
  SnrEstimates s = snr_estimates(fit, d);
  REQUIRE(s.rho_hat > 0.0);
  REQUIRE(s.rho_hat < 1.0);
  InferenceResult at_hat = test_rho(fit, d, s.rho_hat, 0.05, false);
  CHECK(std::abs(at_hat.z) < 1e-12);
  CHECK(at_hat.estimate == doctest::Approx(s.rho_hat).epsilon(1e-14));
  CHECK(at_hat.std_error == doctest::Approx(std::sqrt(s.sigma2_rho)).epsilon(1e-13));

  // a null ABOVE the estimate gives negative z and small lower-tail p-value
  InferenceResult below = test_rho(fit, d, std::min(0.999, s.rho_hat + 0.2), 0.05);
  CHECK(below.z < 0.0);
  CHECK(std::abs(below.p_value_one_sided - normal_cdf(below.z)) < 1e-12);

  // interval is clamped into [0, 1]
  InferenceResult wide = test_rho(fit, d, 0.5, 1e-10);
  CHECK(wide.ci_low >= 0.0);
  CHECK(wide.ci_high <= 1.0);
  CHECK((wide.flags & kFlagIntervalClamped) != 0);

  CHECK_THROWS_AS(test_rho(fit, d, 0.0, 0.05), DomainError);
  CHECK_THROWS_AS(test_rho(fit, d, 1.0, 0.05), DomainError);
}

TEST_CASE("test_rho conventional: frozen hand values on the three-point fit") {
  Dataset d;
  d.y.resize(3);
  d.y << 2.0, 4.0, 6.0;
  d.x.resize(3, 1);
  d.x << 1.0, 1.0, 1.0;
  ModelFit fit = ols_fit(d);
  // eta_tilde = 16, rho_tilde = 0.8, sigma2 = 8/5625
  InferenceResult r = test_rho(fit, d, 0.5, 0.05, true);
  CHECK(r.estimate == doctest::Approx(0.8).epsilon(1e-13));
  CHECK(r.std_error ==
        doctest::Approx(std::sqrt(8.0 / 5625.0)).epsilon(1e-12));
  CHECK(std::abs(r.z - (0.8 - 0.5) / std::sqrt(8.0 / 5625.0)) < 1e-10);
}

TEST_CASE("ci_eta: interval built from the plug-in variance") {
  Dataset d = qi_test::random_dataset(60, 8, 14);
  d = center_dataset(d);
  ModelFit fit = ols_fit(d);
  SnrEstimates s = snr_estimates(fit, d);
  InferenceResult r = ci_eta(fit, d, 0.05);
  CHECK(r.estimate == doctest::Approx(s.eta_hat).epsilon(1e-13));
  CHECK(r.std_error == doctest::Approx(std::sqrt(s.sigma2_eta)).epsilon(1e-13));
  double q = normal_quantile(0.975);
  CHECK(r.ci_low == doctest::Approx(s.eta_hat - q * r.std_error).epsilon(1e-12));
  CHECK(r.ci_high == doctest::Approx(s.eta_hat + q * r.std_error).epsilon(1e-12));
  check_common_contract(r);
}

TEST_CASE("linear_functional_inference: recovers the classical coefficient test") {
  Dataset d = qi_test::random_dataset(40, 5, 15);
  ModelFit fit = ols_fit(d);
  Eigen::MatrixXd inv = (d.x.transpose() * d.x).inverse();
  for (int j = 0; j < 5; ++j) {
    Eigen::VectorXd ej = Eigen::VectorXd::Zero(5);
    ej(j) = 1.0;
    InferenceResult r = linear_functional_inference(fit, ej, 0.05);
    double se = std::sqrt(fit.sigma2_hat * inv(j, j));
    CHECK(r.estimate == doctest::Approx(fit.beta_hat(j)).epsilon(1e-12));
    CHECK(qi_test::rel_err(r.std_error, se) < 1e-10);
    CHECK(std::abs(r.z - fit.beta_hat(j) / se) < 1e-9);
    check_common_contract(r);
  }
  CHECK_THROWS_AS(linear_functional_inference(fit, Eigen::VectorXd::Zero(5), 0.05),
                  DegenerateVarianceError);
}

TEST_CASE("power_quad_norm: size at zero gap, symmetry, monotonicity") {
  for (double alpha : {0.01, 0.05, 0.10}) {
    CHECK(std::abs(power_quad_norm(0.0, 1.3, alpha) - alpha) < 1e-12);
  }
  double prev = 0.0;
  for (double gap = 0.0; gap <= 8.0; gap += 0.25) {
    double pw = power_quad_norm(gap, 1.0, 0.05);
    CHECK(std::abs(pw - power_quad_norm(-gap, 1.0, 0.05)) < 1e-12);
    CHECK(pw >= prev - 1e-12);
    prev = pw;
  }
  CHECK(power_quad_norm(8.0, 1.0, 0.05) > 0.9);
}
