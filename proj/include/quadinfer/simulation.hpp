#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "quadinfer/dataset.hpp"
#include "quadinfer/rng.hpp"

namespace quadinfer {

// Generative designs for the Monte Carlo harness.
//   kCaseI:   rows ~ N(mu, I), mu_j ~ Unif[1,2]; beta0 = tilde/||tilde||,
//             tilde_j ~ Unif[1,2]; Gaussian errors.
//   kCaseII:  Sigma = S^T S / lambda_max(S^T S) + diag(d), S_ij ~ Unif[-0.5,0.5],
//             d_j ~ Unif[0.4,1]; beta0 = c_p * unit eigenvector of the smallest
//             eigenvalue (c_p = 1 when p = 4, 5 when p = n/2.5, else 2).
//   kCaseIII: design entries t_5 / sqrt(5/3), errors t_16 / sqrt(8/7),
//             beta0 = (1,1,1,0,...,0).
//   kCaseIV:  design drawn once per config from the case-I law and then fixed;
//             fresh errors per replication; beta0 = top eigenvector of the
//             centered design scatter matrix.
// Every case adds an intercept of 1 to the response and the returned dataset
// is centered (response and design columns) before inference.
enum class SimCase { kI, kII, kIII, kIV };

// Which procedure each replication runs.
enum class TestKind {
  kQuadNorm,         // test_quad_norm at null ||beta0||
  kConventional,     // conventional norm test
  kSignal,           // signal detection
  kGlobal,           // global test at beta_null = beta0
  kErrorVariance,    // noise-variance test at sigma2_null
  kRho,              // variance-explained test at rho_null
  kEta,              // eta confidence interval
  kLinear,           // linear functional c = e_1 at the true coordinate
  kTwoSampleEquality,
  kCoheritability,
  kCoverageAll,      // bundled CR2 / sigma2 / rho / eta coverage pass
};

// Overrides for the coefficient construction (calibration vs power designs).
enum class BetaMode {
  kCaseDefault, // the case's own beta0 construction
  kUnifEntries, // beta0_j ~ Unif(0,1): the conventional-test miscalibration demo
  kSignalGrid,  // beta0 = 1_p * delta * sigma_eps / (sqrt(n) * p^{1/4})
};

struct SimConfig {
  SimCase sim_case = SimCase::kI;
  int n = 400;
  int p = 100;
  int reps = 1000;
  std::uint64_t seed = 1;
  TestKind test = TestKind::kQuadNorm;
  double alpha = 0.05;

  // Null value handed to the test (c0 for norm tests, sigma2 for the variance
  // test, rho0 / theta0 for the ratio tests).  NaN => use the generated truth.
  double null_value = std::numeric_limits<double>::quiet_NaN();

  BetaMode beta_mode = BetaMode::kCaseDefault;
  double delta = 0.0;        // signal-grid magnitude (BetaMode::kSignalGrid)
  double sigma2_eps = 1.0;   // true noise variance (power grids move this)
  bool conventional = false; // conventional comparison statistic where defined

  // Two-sample settings.
  int n2 = 0;                // second sample size; 0 => same as n
  double theta0 = 0.0;       // designed angle between beta0 and gamma0
  double sigma2_delta = 1.0; // second-sample noise variance
};

// Exact generated truth for one configuration.
struct Truth {
  Eigen::VectorXd beta0;
  Eigen::VectorXd gamma0;    // two-sample configs only
  double sigma2_eps = 1.0;
  double norm2_beta0 = 0.0;  // ||beta0||^2
  double eta0 = 0.0;         // beta0^T Sigma beta0
  double rho0 = 0.0;         // eta0 / (eta0 + sigma2_eps)
  double theta0 = 0.0;       // gamma0^T beta0 / (||gamma0|| ||beta0||)
};

// Config-level randomness, drawn once per SimConfig (mu, beta0, Sigma, the
// fixed case-IV design, gamma0) from dedicated substreams at rep_index 0.
struct CaseParams {
  Eigen::VectorXd mu;         // design row mean
  Eigen::MatrixXd sigma_chol; // lower Cholesky of Sigma (empty => identity)
  Eigen::MatrixXd fixed_x;    // raw fixed design (case IV), empty otherwise
  Truth truth;
};

// Draws the per-configuration parameters (deterministic in cfg.seed).
CaseParams make_case_params(const SimConfig& cfg);

// Generates the primary-sample dataset for one replication; the result is
// centered and carries the case's intercept baked into the (centered-away)
// response.  Substreams: 0 = design, 1 = errors.
Dataset generate_case_data(const SimConfig& cfg, const CaseParams& params,
                           std::uint64_t rep_index);

// Second sample for two-sample configs (substreams 2 = design, 3 = errors),
// using gamma0 and sigma2_delta.
Dataset generate_case_data_b(const SimConfig& cfg, const CaseParams& params,
                             std::uint64_t rep_index);

// Convenience: parameters + data in one call.
std::pair<Dataset, Truth> generate_case(const SimConfig& cfg, std::uint64_t rep_index);

// Distribution helpers (deterministic per stream).
double sample_standard_normal(RngStream& stream);
double sample_student_t(RngStream& stream, double df, double scale);

// One replication's outputs.  The covered_* extras are filled only by the
// bundled TestKind::kCoverageAll pass.
struct ReplicationRecord {
  std::uint64_t rep_index = 0;
  double p_value = 1.0;
  bool covered = false;
  double estimate = 0.0;
  double std_error = 0.0;
  unsigned flags = 0;
  bool failed = false;
  bool covered_sigma2 = false;
  bool covered_rho = false;
  bool covered_eta = false;
  double ci_length = 0.0;
};

// Kolmogorov–Smirnov test of Unif[0,1] goodness of fit.
struct KsResult {
  double d = 0.0;
  double p_value = 0.0;
};

// D = sup |empirical CDF - u|; p-value from the asymptotic Kolmogorov series
// with the (sqrt(m) + 0.12 + 0.11/sqrt(m)) finite-sample correction.
// Throws DimensionError on empty input.
KsResult ks_uniformity(const std::vector<double>& p_values);

// Aggregates over all completed replications.
struct SimSummary {
  int reps_completed = 0;
  int reps_failed = 0;
  int reps_flagged = 0;
  KsResult ks;                  // KS uniformity of the p-values
  double coverage = 0.0;        // primary target (CR2 for kCoverageAll)
  double coverage_sigma2 = 0.0; // kCoverageAll extras
  double coverage_rho = 0.0;
  double coverage_eta = 0.0;
  double mean_ci_length = 0.0;
  double rejection_rate = 0.0;  // fraction with p_value < alpha
  double mean_estimate = 0.0;
  double var_estimate = 0.0;    // sample variance of the estimates
  double median_variance = 0.0; // median of std_error^2
  Truth truth;                  // generated truth echoed for reporting
  std::vector<ReplicationRecord> records; // slot-indexed by rep
};

// Runs cfg.reps independent replications.  Records land in slot rep_index and
// aggregation happens afterwards in index order, so the summary is bitwise
// identical for any thread count.  Replications that raise a non-flag error
// are marked failed, excluded from aggregates, and counted.
SimSummary run_replications(const SimConfig& cfg, int threads = 1);

// Power curve over a grid of local-alternative magnitudes.  For kSignal the
// grid moves BetaMode::kSignalGrid's delta; for kErrorVariance it moves the
// true variance to 1 + delta/sqrt(n).  The same seed is reused across points
// (common random numbers).
struct PowerPoint {
  double delta = 0.0;
  double rejection_rate = 0.0;
  int reps = 0;
};
std::vector<PowerPoint> power_curve(SimConfig cfg, const std::vector<double>& grid,
                                    int threads = 1);

// Name helpers (CLI parsing / report labels).
const char* to_string(SimCase c);
const char* to_string(TestKind k);
SimCase parse_sim_case(const std::string& text);     // throws ConfigError
TestKind parse_test_kind(const std::string& text);   // throws ConfigError

} // namespace quadinfer
