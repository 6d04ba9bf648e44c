#include "quadinfer/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "quadinfer/errors.hpp"
#include "quadinfer/inference.hpp"
#include "quadinfer/model_fit.hpp"
#include "quadinfer/normal.hpp"
#include "quadinfer/two_sample.hpp"

namespace quadinfer {

namespace {

// Per-replication substreams.
constexpr std::uint32_t kSubDesign = 0;
constexpr std::uint32_t kSubErrors = 1;
constexpr std::uint32_t kSubDesignB = 2;
constexpr std::uint32_t kSubErrorsB = 3;

// Config-level substreams, always addressed at rep_index 0 so the drawn
// parameters are shared by every replication.
constexpr std::uint32_t kSubMu = 0x70000001u;
constexpr std::uint32_t kSubBeta = 0x70000002u;
constexpr std::uint32_t kSubSigmaS = 0x70000003u;
constexpr std::uint32_t kSubSigmaD = 0x70000004u;
constexpr std::uint32_t kSubFixedX = 0x70000005u;
constexpr std::uint32_t kSubGamma = 0x70000006u;

// Standardizers putting the heavy-tailed case on unit variance.
const double kEntryScale = std::sqrt(5.0 / 3.0);  // t5 design entries
const double kErrorScale = std::sqrt(8.0 / 7.0);  // t16 errors

Eigen::VectorXd draw_uniform(RngStream& s, int len, double lo, double hi) {
  Eigen::VectorXd v(len);
  for (int i = 0; i < len; ++i) v(i) = s.next_uniform(lo, hi);
  return v;
}

// Fixes the eigenvector sign so the construction does not depend on solver
// conventions: the entry of largest magnitude is made positive.
void canonical_sign(Eigen::VectorXd& v) {
  int idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v(idx) < 0.0) v = -v;
}

bool ci_contains(const InferenceResult& r, double target) {
  return r.ci_low <= target && target <= r.ci_high;
}

void fill_from_result(ReplicationRecord& rec, const InferenceResult& r) {
  rec.estimate = r.estimate;
  rec.std_error = r.std_error;
  rec.flags = r.flags;
  rec.p_value = r.p_value;
}

// One replication.  Throws only for configuration-level problems; numerical
// degeneracies are caught by the caller and marked failed.
void run_one(const SimConfig& cfg, const CaseParams& params,
             std::uint64_t rep, ReplicationRecord& rec) {
  const Truth& t = params.truth;
  const double nv = cfg.null_value;
  const bool use_truth = std::isnan(nv);

  Dataset d = generate_case_data(cfg, params, rep);
  ModelFit fit = ols_fit(d);

  switch (cfg.test) {
    case TestKind::kQuadNorm: {
      const double c0 = use_truth ? std::sqrt(std::max(t.norm2_beta0, 0.0)) : nv;
      InferenceResult r = test_quad_norm(fit, c0, cfg.alpha);
      fill_from_result(rec, r);
      rec.covered = ci_contains(r, t.norm2_beta0);
      break;
    }
    case TestKind::kConventional: {
      const double c0 = use_truth ? std::sqrt(std::max(t.norm2_beta0, 0.0)) : nv;
      InferenceResult r = test_conventional(fit, c0, cfg.alpha);
      fill_from_result(rec, r);
      rec.covered = ci_contains(r, t.norm2_beta0);
      break;
    }
    case TestKind::kSignal: {
      InferenceResult r = test_signal_detection(fit, cfg.alpha);
      fill_from_result(rec, r);
      rec.p_value = r.p_value_one_sided;
      rec.covered = ci_contains(r, t.norm2_beta0);
      break;
    }
    case TestKind::kGlobal: {
      InferenceResult r = test_global(fit, t.beta0, cfg.alpha);
      fill_from_result(rec, r);
      rec.covered = ci_contains(r, 0.0);
      break;
    }
    case TestKind::kErrorVariance: {
      const double null = use_truth ? t.sigma2_eps : nv;
      InferenceResult r =
          test_error_variance(fit, residuals(fit, d), null, cfg.alpha);
      fill_from_result(rec, r);
      rec.covered = ci_contains(r, t.sigma2_eps);
      break;
    }
    case TestKind::kRho: {
      const double null = use_truth ? t.rho0 : nv;
      InferenceResult r = test_rho(fit, d, null, cfg.alpha, cfg.conventional);
      fill_from_result(rec, r);
      rec.covered = ci_contains(r, t.rho0);
      break;
    }
    case TestKind::kEta: {
      InferenceResult r = ci_eta(fit, d, cfg.alpha);
      fill_from_result(rec, r);
      rec.covered = ci_contains(r, t.eta0);
      break;
    }
    case TestKind::kLinear: {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(fit.p);
      c(0) = 1.0;
      InferenceResult r = linear_functional_inference(fit, c, cfg.alpha);
      fill_from_result(rec, r);
      const double null = use_truth ? t.beta0(0) : nv;
      const double z = (r.estimate - null) / r.std_error;
      rec.p_value = 2.0 * normal_cdf(-std::abs(z));
      rec.covered = ci_contains(r, t.beta0(0));
      break;
    }
    case TestKind::kTwoSampleEquality: {
      Dataset db = generate_case_data_b(cfg, params, rep);
      TwoSampleFit ts = make_two_sample(fit, ols_fit(db));
      InferenceResult r = test_equality(ts, cfg.alpha);
      fill_from_result(rec, r);
      rec.covered = ci_contains(r, (t.beta0 - t.gamma0).squaredNorm());
      break;
    }
    case TestKind::kCoheritability: {
      Dataset db = generate_case_data_b(cfg, params, rep);
      TwoSampleFit ts = make_two_sample(fit, ols_fit(db));
      const double null = use_truth ? t.theta0 : nv;
      InferenceResult r = test_coheritability(ts, null, cfg.alpha, cfg.conventional);
      fill_from_result(rec, r);
      rec.covered = ci_contains(r, t.theta0);
      break;
    }
    case TestKind::kCoverageAll: {
      InferenceResult g = test_global(fit, t.beta0, cfg.alpha);
      fill_from_result(rec, g);
      rec.covered = ci_contains(g, 0.0);
      InferenceResult sv =
          test_error_variance(fit, residuals(fit, d), t.sigma2_eps, cfg.alpha);
      rec.covered_sigma2 = ci_contains(sv, t.sigma2_eps);
      InferenceResult rv = test_rho(fit, d, t.rho0, cfg.alpha, false);
      rec.covered_rho = ci_contains(rv, t.rho0);
      InferenceResult ev = ci_eta(fit, d, cfg.alpha);
      rec.covered_eta = ci_contains(ev, t.eta0);
      rec.ci_length = ev.ci_high - ev.ci_low;
      rec.flags = g.flags | sv.flags | rv.flags | ev.flags;
      break;
    }
  }
}

} // namespace

double sample_standard_normal(RngStream& stream) { return stream.next_normal(); }

double sample_student_t(RngStream& stream, double df, double scale) {
  return stream.next_student_t(df, scale);
}

CaseParams make_case_params(const SimConfig& cfg) {
  const int n = cfg.n;
  const int p = cfg.p;
  if (n < 2 || p < 1) {
    throw DimensionError("make_case_params: need n >= 2 and p >= 1");
  }

  CaseParams out;
  Truth& t = out.truth;
  t.sigma2_eps = cfg.sigma2_eps;

  Eigen::MatrixXd sigma;   // dense covariance when it is not the identity
  Eigen::MatrixXd scatter; // centered design scatter (case IV only)

  switch (cfg.sim_case) {
    case SimCase::kI: {
      RngStream ms(cfg.seed, 0, kSubMu);
      out.mu = draw_uniform(ms, p, 1.0, 2.0);
      break;
    }
    case SimCase::kII: {
      RngStream ss(cfg.seed, 0, kSubSigmaS);
      Eigen::MatrixXd s(p, p);
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) s(i, j) = ss.next_uniform(-0.5, 0.5);
      }
      Eigen::MatrixXd sts = s.transpose() * s;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> base(sts);
      const double lmax = base.eigenvalues()(p - 1);
      RngStream ds(cfg.seed, 0, kSubSigmaD);
      Eigen::VectorXd diag = draw_uniform(ds, p, 0.4, 1.0);
      sigma = sts / lmax;
      sigma.diagonal() += diag;
      out.sigma_chol = sigma.llt().matrixL();
      break;
    }
    case SimCase::kIII:
      break;
    case SimCase::kIV: {
      RngStream ms(cfg.seed, 0, kSubMu);
      out.mu = draw_uniform(ms, p, 1.0, 2.0);
      RngStream xs(cfg.seed, 0, kSubFixedX);
      out.fixed_x.resize(n, p);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) {
          out.fixed_x(i, j) = out.mu(j) + xs.next_normal();
        }
      }
      Eigen::MatrixXd centered = out.fixed_x;
      centered.rowwise() -= out.fixed_x.colwise().mean();
      scatter = centered.transpose() * centered;
      break;
    }
  }

  // Coefficient vector: the case default or an explicit override.
  switch (cfg.beta_mode) {
    case BetaMode::kCaseDefault:
      switch (cfg.sim_case) {
        case SimCase::kI: {
          RngStream bs(cfg.seed, 0, kSubBeta);
          Eigen::VectorXd tilde = draw_uniform(bs, p, 1.0, 2.0);
          t.beta0 = tilde / tilde.norm();
          break;
        }
        case SimCase::kII: {
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
          Eigen::VectorXd v = eig.eigenvectors().col(0); // smallest eigenvalue
          canonical_sign(v);
          double cp = 2.0;
          if (p == 4) {
            cp = 1.0;
          } else if (5 * p == 2 * n) {
            cp = 5.0;
          }
          t.beta0 = cp * v;
          break;
        }
        case SimCase::kIII: {
          t.beta0 = Eigen::VectorXd::Zero(p);
          t.beta0.head(std::min(p, 3)).setOnes();
          break;
        }
        case SimCase::kIV: {
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
          Eigen::VectorXd v = eig.eigenvectors().col(p - 1); // largest eigenvalue
          canonical_sign(v);
          t.beta0 = v;
          break;
        }
      }
      break;
    case BetaMode::kUnifEntries: {
      RngStream bs(cfg.seed, 0, kSubBeta);
      t.beta0 = draw_uniform(bs, p, 0.0, 1.0);
      break;
    }
    case BetaMode::kSignalGrid: {
      const double mag = cfg.delta * std::sqrt(cfg.sigma2_eps) /
                         (std::sqrt(static_cast<double>(n)) *
                          std::pow(static_cast<double>(p), 0.25));
      t.beta0 = Eigen::VectorXd::Constant(p, mag);
      break;
    }
  }

  t.norm2_beta0 = t.beta0.squaredNorm();
  switch (cfg.sim_case) {
    case SimCase::kI:
    case SimCase::kIII:
      t.eta0 = t.norm2_beta0; // identity covariance
      break;
    case SimCase::kII:
      t.eta0 = t.beta0.dot(sigma * t.beta0);
      break;
    case SimCase::kIV:
      t.eta0 = t.beta0.dot(scatter * t.beta0) / n;
      break;
  }
  const double scale = t.eta0 + t.sigma2_eps;
  t.rho0 = scale > 0.0 ? t.eta0 / scale : 0.0;

  if (cfg.test == TestKind::kTwoSampleEquality) {
    t.gamma0 = t.beta0;
    t.theta0 = t.beta0.norm() > 0.0 ? 1.0 : 0.0;
  } else if (cfg.test == TestKind::kCoheritability) {
    if (!(cfg.theta0 >= -1.0 && cfg.theta0 <= 1.0)) {
      throw ConfigError("theta0 must lie in [-1,1]");
    }
    const double nb = t.beta0.norm();
    if (nb > 0.0 && p >= 2) {
      const Eigen::VectorXd bu = t.beta0 / nb;
      RngStream gs(cfg.seed, 0, kSubGamma);
      Eigen::VectorXd u;
      double un = 0.0;
      do {
        Eigen::VectorXd w(p);
        for (int j = 0; j < p; ++j) w(j) = gs.next_normal();
        u = w - bu * bu.dot(w);
        un = u.norm();
      } while (!(un > 1e-12));
      u /= un;
      t.gamma0 =
          nb * (cfg.theta0 * bu + std::sqrt(1.0 - cfg.theta0 * cfg.theta0) * u);
    } else {
      t.gamma0 = t.beta0; // no orthogonal direction available
    }
    t.theta0 = cfg.theta0;
  }

  return out;
}

namespace {

Dataset build_sample(const SimConfig& cfg, const CaseParams& params,
                     std::uint64_t rep, std::uint32_t sub_design,
                     std::uint32_t sub_errors, const Eigen::VectorXd& coef,
                     double noise_var, int rows) {
  const int p = cfg.p;
  RngStream xs(cfg.seed, rep, sub_design);
  RngStream es(cfg.seed, rep, sub_errors);

  Eigen::MatrixXd x(rows, p);
  switch (cfg.sim_case) {
    case SimCase::kI:
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < p; ++j) x(i, j) = params.mu(j) + xs.next_normal();
      }
      break;
    case SimCase::kII:
      for (int i = 0; i < rows; ++i) {
        Eigen::VectorXd z(p);
        for (int j = 0; j < p; ++j) z(j) = xs.next_normal();
        x.row(i) = (params.sigma_chol * z).transpose();
      }
      break;
    case SimCase::kIII:
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < p; ++j) {
          x(i, j) = xs.next_student_t(5.0, kEntryScale);
        }
      }
      break;
    case SimCase::kIV:
      if (rows != params.fixed_x.rows()) {
        throw ConfigError("fixed-design case: sample sizes must match");
      }
      x = params.fixed_x;
      break;
  }

  const double sd = std::sqrt(noise_var);
  Eigen::VectorXd y(rows);
  for (int i = 0; i < rows; ++i) {
    const double eps = cfg.sim_case == SimCase::kIII
                           ? es.next_student_t(16.0, kErrorScale)
                           : es.next_normal();
    y(i) = 1.0 + x.row(i).dot(coef) + sd * eps;
  }

  Dataset raw;
  raw.x = std::move(x);
  raw.y = std::move(y);
  return center_dataset(raw);
}

} // namespace

Dataset generate_case_data(const SimConfig& cfg, const CaseParams& params,
                           std::uint64_t rep_index) {
  return build_sample(cfg, params, rep_index, kSubDesign, kSubErrors,
                      params.truth.beta0, cfg.sigma2_eps, cfg.n);
}

Dataset generate_case_data_b(const SimConfig& cfg, const CaseParams& params,
                             std::uint64_t rep_index) {
  if (params.truth.gamma0.size() == 0) {
    throw ConfigError("second sample requested for a one-sample configuration");
  }
  const int rows = cfg.n2 > 0 ? cfg.n2 : cfg.n;
  return build_sample(cfg, params, rep_index, kSubDesignB, kSubErrorsB,
                      params.truth.gamma0, cfg.sigma2_delta, rows);
}

std::pair<Dataset, Truth> generate_case(const SimConfig& cfg,
                                        std::uint64_t rep_index) {
  CaseParams params = make_case_params(cfg);
  Dataset d = generate_case_data(cfg, params, rep_index);
  return {std::move(d), std::move(params.truth)};
}

KsResult ks_uniformity(const std::vector<double>& p_values) {
  if (p_values.empty()) {
    throw DimensionError("ks_uniformity: empty sample");
  }
  std::vector<double> u = p_values;
  std::sort(u.begin(), u.end());
  const double m = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double hi = (static_cast<double>(i) + 1.0) / m - u[i];
    const double lo = u[i] - static_cast<double>(i) / m;
    d = std::max(d, std::max(hi, lo));
  }

  KsResult out;
  out.d = d;
  const double factor = std::sqrt(m) + 0.12 + 0.11 / std::sqrt(m);
  const double lambda = factor * d;
  if (lambda < 0.2) {
    out.p_value = 1.0; // the Kolmogorov tail is 1 to well past double precision
    return out;
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  out.p_value = std::min(1.0, std::max(0.0, 2.0 * sum));
  return out;
}

SimSummary run_replications(const SimConfig& cfg, int threads) {
  if (cfg.reps < 1) {
    throw ConfigError("run_replications: reps must be positive");
  }
  CaseParams params = make_case_params(cfg);

  std::vector<ReplicationRecord> records(static_cast<std::size_t>(cfg.reps));
  auto worker = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t rep = begin; rep < end; ++rep) {
      ReplicationRecord& rec = records[rep];
      rec.rep_index = rep;
      try {
        run_one(cfg, params, rep, rec);
      } catch (const DegeneracyError&) {
        rec.failed = true;
      }
    }
  };

  const std::uint64_t reps = static_cast<std::uint64_t>(cfg.reps);
  const int nthreads =
      std::max(1, std::min<int>(threads, static_cast<int>(reps)));
  if (nthreads == 1) {
    worker(0, reps);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    const std::uint64_t chunk = (reps + nthreads - 1) / nthreads;
    for (int ti = 0; ti < nthreads; ++ti) {
      const std::uint64_t begin = ti * chunk;
      const std::uint64_t end = std::min(reps, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  SimSummary s;
  s.truth = params.truth;

  // Aggregate strictly in slot order so the summary does not depend on the
  // thread count.
  std::vector<double> pvals, variances, estimates;
  double cov = 0.0, cov_s2 = 0.0, cov_rho = 0.0, cov_eta = 0.0;
  double rej = 0.0, len = 0.0, mean_est = 0.0;
  for (const ReplicationRecord& r : records) {
    if (r.failed) {
      ++s.reps_failed;
      continue;
    }
    ++s.reps_completed;
    if (r.flags != 0) ++s.reps_flagged;
    pvals.push_back(r.p_value);
    estimates.push_back(r.estimate);
    variances.push_back(r.std_error * r.std_error);
    rej += r.p_value < cfg.alpha ? 1.0 : 0.0;
    cov += r.covered ? 1.0 : 0.0;
    cov_s2 += r.covered_sigma2 ? 1.0 : 0.0;
    cov_rho += r.covered_rho ? 1.0 : 0.0;
    cov_eta += r.covered_eta ? 1.0 : 0.0;
    len += r.ci_length;
    mean_est += r.estimate;
  }

  const double m = static_cast<double>(s.reps_completed);
  if (s.reps_completed > 0) {
    s.rejection_rate = rej / m;
    s.coverage = cov / m;
    s.coverage_sigma2 = cov_s2 / m;
    s.coverage_rho = cov_rho / m;
    s.coverage_eta = cov_eta / m;
    s.mean_ci_length = len / m;
    s.mean_estimate = mean_est / m;
    s.ks = ks_uniformity(pvals);

    double ss = 0.0;
    for (double e : estimates) {
      ss += (e - s.mean_estimate) * (e - s.mean_estimate);
    }
    s.var_estimate = s.reps_completed > 1 ? ss / (m - 1.0) : 0.0;

    std::sort(variances.begin(), variances.end());
    const std::size_t half = variances.size() / 2;
    s.median_variance = variances.size() % 2 == 1
                            ? variances[half]
                            : 0.5 * (variances[half - 1] + variances[half]);
  }

  s.records = std::move(records);
  return s;
}

std::vector<PowerPoint> power_curve(SimConfig cfg, const std::vector<double>& grid,
                                    int threads) {
  std::vector<PowerPoint> out;
  out.reserve(grid.size());
  for (double delta : grid) {
    SimConfig point = cfg;
    point.delta = delta;
    if (cfg.test == TestKind::kErrorVariance) {
      point.sigma2_eps =
          cfg.sigma2_eps + delta / std::sqrt(static_cast<double>(cfg.n));
      point.null_value = cfg.sigma2_eps; // null pinned at the baseline variance
      if (!(point.sigma2_eps > 0.0)) {
        throw ConfigError("power_curve: grid pushes the variance nonpositive");
      }
    } else {
      point.beta_mode = BetaMode::kSignalGrid;
    }
    SimSummary s = run_replications(point, threads);
    out.push_back({delta, s.rejection_rate, s.reps_completed});
  }
  return out;
}

const char* to_string(SimCase c) {
  switch (c) {
    case SimCase::kI: return "I";
    case SimCase::kII: return "II";
    case SimCase::kIII: return "III";
    case SimCase::kIV: return "IV";
  }
  return "I";
}

const char* to_string(TestKind k) {
  switch (k) {
    case TestKind::kQuadNorm: return "quad-norm";
    case TestKind::kConventional: return "conventional";
    case TestKind::kSignal: return "signal";
    case TestKind::kGlobal: return "global";
    case TestKind::kErrorVariance: return "error-variance";
    case TestKind::kRho: return "rho";
    case TestKind::kEta: return "eta";
    case TestKind::kLinear: return "linear";
    case TestKind::kTwoSampleEquality: return "two-sample-equality";
    case TestKind::kCoheritability: return "coheritability";
    case TestKind::kCoverageAll: return "coverage-all";
  }
  return "quad-norm";
}

SimCase parse_sim_case(const std::string& text) {
  if (text == "I") return SimCase::kI;
  if (text == "II") return SimCase::kII;
  if (text == "III") return SimCase::kIII;
  if (text == "IV") return SimCase::kIV;
  throw ConfigError("unknown simulation case '" + text + "' (expected I..IV)");
}

TestKind parse_test_kind(const std::string& text) {
  static const std::pair<const char*, TestKind> table[] = {
      {"quad-norm", TestKind::kQuadNorm},
      {"conventional", TestKind::kConventional},
      {"signal", TestKind::kSignal},
      {"global", TestKind::kGlobal},
      {"error-variance", TestKind::kErrorVariance},
      {"rho", TestKind::kRho},
      {"eta", TestKind::kEta},
      {"linear", TestKind::kLinear},
      {"two-sample-equality", TestKind::kTwoSampleEquality},
      {"coheritability", TestKind::kCoheritability},
      {"coverage-all", TestKind::kCoverageAll},
  };
  for (const auto& [name, kind] : table) {
    if (text == name) return kind;
  }
  throw ConfigError("unknown test kind '" + text + "'");
}

} // namespace quadinfer
