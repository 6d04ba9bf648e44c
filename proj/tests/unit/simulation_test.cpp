#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "quadinfer/errors.hpp"
#include "quadinfer/normal.hpp"
#include "quadinfer/simulation.hpp"

using namespace quadinfer;

namespace {

double column_variance(const Eigen::MatrixXd& x, int j) {
  return x.col(j).squaredNorm() / (x.rows() - 1.0); // columns are centered
}

bool same_records(const SimSummary& a, const SimSummary& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& ra = a.records[i];
    const auto& rb = b.records[i];
    if (ra.rep_index != rb.rep_index || ra.p_value != rb.p_value ||
        ra.estimate != rb.estimate || ra.std_error != rb.std_error ||
        ra.covered != rb.covered || ra.flags != rb.flags || ra.failed != rb.failed) {
      return false;
    }
  }
  return true;
}

} // namespace

TEST_CASE("ks_uniformity: single middle observation has D = 1/2") {
  KsResult ks = ks_uniformity({0.5});
  CHECK(ks.d == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ks.p_value >= 0.0);
  CHECK(ks.p_value <= 1.0);
}

TEST_CASE("ks_uniformity: frozen Kolmogorov tail values") {
  // m = 1: factor = 1.23, one observation at 1 - 1/1.23 gives lambda = 1.
  KsResult k1 = ks_uniformity({1.0 - 1.0 / 1.23});
  CHECK(std::abs(k1.d - 1.0 / 1.23) < 1e-14);
  CHECK(std::abs(k1.p_value - 0.26999967167735456) < 1e-9);

  // m = 4: factor = 2.175; four tied observations make D = 1 - u, so placing
  // them at 1 - 1.5/2.175 gives lambda = 1.5.
  double tied = 1.0 - 1.5 / 2.175;
  KsResult k15 = ks_uniformity({tied, tied, tied, tied});
  CHECK(std::abs(k15.p_value - 0.022217962616525127) < 1e-9);

  // m = 4: a grid shifted up by D = 0.5/2.175 gives lambda = 0.5.
  double d = 0.5 / 2.175;
  KsResult k05 = ks_uniformity({0.0 / 4 + d, 1.0 / 4 + d, 2.0 / 4 + d, 3.0 / 4 + d});
  CHECK(std::abs(k05.d - d) < 1e-14);
  CHECK(std::abs(k05.p_value - 0.96394524366487511) < 1e-9);
}

TEST_CASE("ks_uniformity: perfect grid is maximally uniform and order-free") {
  std::vector<double> grid;
  for (int i = 1; i <= 100; ++i) grid.push_back((i - 0.5) / 100.0);
  KsResult sorted = ks_uniformity(grid);
  CHECK(sorted.d == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(sorted.p_value > 0.999999);

  std::reverse(grid.begin(), grid.end());
  KsResult reversed = ks_uniformity(grid);
  CHECK(reversed.d == sorted.d);
  CHECK(reversed.p_value == sorted.p_value);

  CHECK_THROWS_AS(ks_uniformity({}), DimensionError);
}

TEST_CASE("sampling helpers match the stream's own methods") {
  RngStream a(5, 2, 1), b(5, 2, 1);
  for (int i = 0; i < 50; ++i) {
    CHECK(sample_standard_normal(a) == b.next_normal());
  }
  RngStream c(5, 3, 1), d(5, 3, 1);
  double scale = std::sqrt(5.0 / 3.0);
  for (int i = 0; i < 50; ++i) {
    CHECK(sample_student_t(c, 5.0, scale) == d.next_student_t(5.0, scale));
  }
}

TEST_CASE("case I: unit coefficient, identity covariance truth, centered data") {
  SimConfig cfg;
  cfg.sim_case = SimCase::kI;
  cfg.n = 60;
  cfg.p = 8;
  cfg.seed = 3;
  CaseParams params = make_case_params(cfg);

  CHECK(params.mu.size() == 8);
  CHECK(params.mu.minCoeff() >= 1.0);
  CHECK(params.mu.maxCoeff() <= 2.0);
  CHECK(params.sigma_chol.size() == 0); // identity covariance
  CHECK(params.fixed_x.size() == 0);
  CHECK(params.truth.beta0.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(params.truth.norm2_beta0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(params.truth.eta0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(params.truth.rho0 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(params.truth.sigma2_eps == 1.0);

  Dataset data = generate_case_data(cfg, params, 0);
  CHECK(data.n() == 60);
  CHECK(data.p() == 8);
  CHECK(data.centered);
  CHECK(data.dropped_columns.empty());
  for (int j = 0; j < 8; ++j) {
    CHECK(std::abs(data.x.col(j).mean()) < 1e-9);
  }
  CHECK(std::abs(data.y.mean()) < 1e-9);

  // bitwise repeatability, and distinct replications actually differ
  Dataset again = generate_case_data(cfg, params, 0);
  CHECK((data.x - again.x).norm() == 0.0);
  CHECK((data.y - again.y).norm() == 0.0);
  Dataset other = generate_case_data(cfg, params, 1);
  CHECK((data.x - other.x).norm() > 0.0);

  auto [composed, truth] = generate_case(cfg, 0);
  CHECK((composed.x - data.x).norm() == 0.0);
  CHECK((composed.y - data.y).norm() == 0.0);
  CHECK(truth.norm2_beta0 == params.truth.norm2_beta0);
}

TEST_CASE("case II: smallest-eigenvalue coefficient and the c_p schedule") {
  SimConfig cfg;
  cfg.sim_case = SimCase::kII;
  cfg.n = 30;
  cfg.p = 6;
  cfg.seed = 4;
  CaseParams params = make_case_params(cfg);

  REQUIRE(params.sigma_chol.rows() == 6);
  Eigen::MatrixXd sigma = params.sigma_chol * params.sigma_chol.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  double lmin = eig.eigenvalues()(0);
  CHECK(lmin > 0.0);

  // p = 6, n = 30: neither special branch, so c_p = 2
  const Truth& t = params.truth;
  CHECK(t.norm2_beta0 == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(t.eta0 == doctest::Approx(4.0 * lmin).epsilon(1e-8));
  CHECK(t.eta0 == doctest::Approx(t.beta0.dot(sigma * t.beta0)).epsilon(1e-10));
  CHECK((sigma * t.beta0 - lmin * t.beta0).norm() < 1e-8);
  CHECK(t.rho0 == doctest::Approx(t.eta0 / (t.eta0 + 1.0)).epsilon(1e-12));

  SimConfig four = cfg;
  four.n = 10;
  four.p = 4;
  CHECK(make_case_params(four).truth.norm2_beta0 == doctest::Approx(1.0).epsilon(1e-10));

  SimConfig dense = cfg;
  dense.n = 20;
  dense.p = 8; // 5p == 2n -> c_p = 5
  CHECK(make_case_params(dense).truth.norm2_beta0 ==
        doctest::Approx(25.0).epsilon(1e-8));
}

TEST_CASE("case III: sparse ones coefficient and standardized heavy tails") {
  SimConfig cfg;
  cfg.sim_case = SimCase::kIII;
  cfg.n = 20000;
  cfg.p = 3;
  cfg.seed = 5;
  CaseParams params = make_case_params(cfg);
  CHECK(params.truth.norm2_beta0 == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(params.truth.eta0 == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(params.truth.rho0 == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(params.truth.beta0(0) == 1.0);
  CHECK(params.truth.beta0(2) == 1.0);

  Dataset data = generate_case_data(cfg, params, 0);
  for (int j = 0; j < 3; ++j) {
    CHECK(column_variance(data.x, j) == doctest::Approx(1.0).epsilon(0.07));
  }
}

TEST_CASE("case III: trailing coefficients vanish when p > 3") {
  SimConfig cfg;
  cfg.sim_case = SimCase::kIII;
  cfg.n = 50;
  cfg.p = 7;
  cfg.seed = 5;
  Truth t = make_case_params(cfg).truth;
  CHECK(t.beta0.head(3).isApprox(Eigen::VectorXd::Ones(3)));
  CHECK(t.beta0.tail(4).norm() == 0.0);
  CHECK(t.norm2_beta0 == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("case IV: the design is frozen across replications") {
  SimConfig cfg;
  cfg.sim_case = SimCase::kIV;
  cfg.n = 40;
  cfg.p = 5;
  cfg.seed = 6;
  CaseParams params = make_case_params(cfg);
  REQUIRE(params.fixed_x.rows() == 40);
  REQUIRE(params.fixed_x.cols() == 5);

  Dataset d0 = generate_case_data(cfg, params, 0);
  Dataset d7 = generate_case_data(cfg, params, 7);
  CHECK((d0.x - d7.x).norm() == 0.0); // same design every replication
  CHECK((d0.y - d7.y).norm() > 0.0);  // fresh errors

  // beta0 is the top unit eigenvector of the centered design scatter
  Eigen::MatrixXd scatter = d0.x.transpose() * d0.x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
  double lmax = eig.eigenvalues()(4);
  const Truth& t = params.truth;
  CHECK(t.norm2_beta0 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK((scatter * t.beta0 - lmax * t.beta0).norm() < 1e-6 * lmax);
  CHECK(t.eta0 == doctest::Approx(lmax / 40.0).epsilon(1e-8));
}

TEST_CASE("beta overrides: uniform entries and the signal grid") {
  SimConfig cfg;
  cfg.sim_case = SimCase::kI;
  cfg.n = 100;
  cfg.p = 16;
  cfg.seed = 9;
  cfg.beta_mode = BetaMode::kUnifEntries;
  Truth uni = make_case_params(cfg).truth;
  CHECK(uni.beta0.minCoeff() > 0.0);
  CHECK(uni.beta0.maxCoeff() < 1.0);
  CHECK(uni.norm2_beta0 == doctest::Approx(uni.beta0.squaredNorm()).epsilon(1e-12));
  CHECK(uni.eta0 == doctest::Approx(uni.norm2_beta0).epsilon(1e-12)); // identity Sigma

  cfg.beta_mode = BetaMode::kSignalGrid;
  cfg.delta = 2.0;
  Truth sig = make_case_params(cfg).truth;
  // delta * sigma_eps / (sqrt(n) p^{1/4}) = 2 / (10 * 2) = 0.1 in every slot
  for (int j = 0; j < 16; ++j) {
    CHECK(sig.beta0(j) == doctest::Approx(0.1).epsilon(1e-12));
  }
  CHECK(sig.norm2_beta0 == doctest::Approx(0.16).epsilon(1e-12));

  cfg.delta = 0.0;
  Truth nul = make_case_params(cfg).truth;
  CHECK(nul.beta0.norm() == 0.0);
  CHECK(nul.norm2_beta0 == 0.0);
  CHECK(nul.rho0 == 0.0);
}

TEST_CASE("two-sample truths: equality uses a shared coefficient, angles are exact") {
  SimConfig cfg;
  cfg.sim_case = SimCase::kI;
  cfg.n = 50;
  cfg.p = 8;
  cfg.seed = 10;
  cfg.test = TestKind::kTwoSampleEquality;
  Truth eq = make_case_params(cfg).truth;
  REQUIRE(eq.gamma0.size() == 8);
  CHECK((eq.gamma0 - eq.beta0).norm() == 0.0);

  cfg.test = TestKind::kCoheritability;
  cfg.theta0 = 0.5;
  Truth half = make_case_params(cfg).truth;
  REQUIRE(half.gamma0.size() == 8);
  double cosine =
      half.gamma0.dot(half.beta0) / (half.gamma0.norm() * half.beta0.norm());
  CHECK(cosine == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(half.gamma0.norm() == doctest::Approx(half.beta0.norm()).epsilon(1e-10));
  CHECK(half.theta0 == 0.5);

  cfg.theta0 = 0.0;
  Truth ortho = make_case_params(cfg).truth;
  CHECK(std::abs(ortho.gamma0.dot(ortho.beta0)) < 1e-10);

  // the two samples of one replication are distinct draws
  CaseParams params = make_case_params(cfg);
  Dataset a = generate_case_data(cfg, params, 0);
  Dataset b = generate_case_data_b(cfg, params, 0);
  CHECK(b.n() == 50);
  CHECK((a.x - b.x).norm() > 0.0);
  Dataset b_again = generate_case_data_b(cfg, params, 0);
  CHECK((b.x - b_again.x).norm() == 0.0);
}

TEST_CASE("run_replications: slot-indexed records and faithful aggregates") {
  SimConfig cfg;
  cfg.sim_case = SimCase::kI;
  cfg.n = 50;
  cfg.p = 6;
  cfg.reps = 8;
  cfg.seed = 11;
  cfg.test = TestKind::kQuadNorm;
  SimSummary s = run_replications(cfg);

  REQUIRE(s.records.size() == 8);
  CHECK(s.reps_completed == 8);
  CHECK(s.reps_failed == 0);

  double rej = 0.0, cov = 0.0, mean_est = 0.0;
  std::vector<double> variances;
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const auto& r = s.records[i];
    CHECK(r.rep_index == i);
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
    CHECK(std::isfinite(r.estimate));
    rej += (r.p_value < cfg.alpha) ? 1.0 : 0.0;
    cov += r.covered ? 1.0 : 0.0;
    mean_est += r.estimate;
    variances.push_back(r.std_error * r.std_error);
  }
  mean_est /= 8.0;
  CHECK(s.rejection_rate == doctest::Approx(rej / 8.0).epsilon(1e-14));
  CHECK(s.coverage == doctest::Approx(cov / 8.0).epsilon(1e-14));
  CHECK(s.mean_estimate == doctest::Approx(mean_est).epsilon(1e-12));

  double ss = 0.0;
  for (const auto& r : s.records) ss += (r.estimate - mean_est) * (r.estimate - mean_est);
  CHECK(s.var_estimate == doctest::Approx(ss / 7.0).epsilon(1e-12));

  std::sort(variances.begin(), variances.end());
  double median = 0.5 * (variances[3] + variances[4]);
  CHECK(s.median_variance == doctest::Approx(median).epsilon(1e-12));

  CHECK(s.ks.p_value >= 0.0);
  CHECK(s.ks.p_value <= 1.0);
  CHECK(s.truth.norm2_beta0 == doctest::Approx(1.0).epsilon(1e-12));

  // determinism, including across thread counts
  SimSummary again = run_replications(cfg);
  CHECK(same_records(s, again));
  SimSummary threaded = run_replications(cfg, 2);
  CHECK(same_records(s, threaded));
  CHECK(threaded.mean_estimate == s.mean_estimate);
}

TEST_CASE("run_replications: bundled coverage pass fills the extra fields") {
  SimConfig cfg;
  cfg.sim_case = SimCase::kI;
  cfg.n = 40;
  cfg.p = 5;
  cfg.reps = 6;
  cfg.seed = 12;
  cfg.test = TestKind::kCoverageAll;
  SimSummary s = run_replications(cfg);
  REQUIRE(s.records.size() == 6);
  double rho_cov = 0.0, len = 0.0;
  for (const auto& r : s.records) {
    CHECK(r.ci_length > 0.0);
    rho_cov += r.covered_rho ? 1.0 : 0.0;
    len += r.ci_length;
  }
  CHECK(s.coverage_rho == doctest::Approx(rho_cov / 6.0).epsilon(1e-14));
  CHECK(s.mean_ci_length == doctest::Approx(len / 6.0).epsilon(1e-12));
}

TEST_CASE("power_curve: echoes the grid deterministically") {
  SimConfig cfg;
  cfg.sim_case = SimCase::kI;
  cfg.n = 40;
  cfg.p = 5;
  cfg.reps = 10;
  cfg.seed = 13;
  cfg.test = TestKind::kSignal;
  std::vector<double> grid = {0.0, 3.0};
  auto pts = power_curve(cfg, grid);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].delta == 0.0);
  CHECK(pts[1].delta == 3.0);
  CHECK(pts[0].reps == 10);
  for (const auto& pt : pts) {
    CHECK(pt.rejection_rate >= 0.0);
    CHECK(pt.rejection_rate <= 1.0);
  }
  auto rerun = power_curve(cfg, grid);
  CHECK(rerun[0].rejection_rate == pts[0].rejection_rate);
  CHECK(rerun[1].rejection_rate == pts[1].rejection_rate);

  cfg.test = TestKind::kErrorVariance;
  auto ev = power_curve(cfg, {-5.0, 0.0, 5.0});
  REQUIRE(ev.size() == 3);
  CHECK(ev[1].delta == 0.0);
}

TEST_CASE("name helpers: round trips and rejection of unknown labels") {
  for (SimCase c : {SimCase::kI, SimCase::kII, SimCase::kIII, SimCase::kIV}) {
    CHECK(parse_sim_case(to_string(c)) == c);
  }
  CHECK(std::string(to_string(SimCase::kI)) == "I");
  CHECK(std::string(to_string(SimCase::kIV)) == "IV");
  CHECK_THROWS_AS(parse_sim_case("V"), ConfigError);
  CHECK_THROWS_AS(parse_sim_case(""), ConfigError);

  for (TestKind k :
       {TestKind::kQuadNorm, TestKind::kConventional, TestKind::kSignal,
        TestKind::kGlobal, TestKind::kErrorVariance, TestKind::kRho, TestKind::kEta,
        TestKind::kLinear, TestKind::kTwoSampleEquality, TestKind::kCoheritability,
        TestKind::kCoverageAll}) {
    CHECK(parse_test_kind(to_string(k)) == k);
  }
  CHECK(std::string(to_string(TestKind::kQuadNorm)) == "quad-norm");
  CHECK(std::string(to_string(TestKind::kErrorVariance)) == "error-variance");
  CHECK(std::string(to_string(TestKind::kTwoSampleEquality)) == "two-sample-equality");
  CHECK_THROWS_AS(parse_test_kind("bogus"), ConfigError);
}
