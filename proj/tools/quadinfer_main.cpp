// quadinfer: command-line driver for dimension-adaptive inference on
// quadratic functionals of regression coefficients.
//
// Subcommands:
//   test        one-sample inference on a CSV dataset
//   two-sample  equality / coheritability inference on two CSV datasets
//   simulate    Monte Carlo study of one configuration
//   reproduce   bundled experiment grids (coverage / calibration / power)
//
// Exit codes: 0 success, 2 configuration or parse error, 3 numerical
// degeneracy.  All output is a pure function of (inputs, flags, seed).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quadinfer/csv.hpp"
#include "quadinfer/errors.hpp"
#include "quadinfer/estimators.hpp"
#include "quadinfer/inference.hpp"
#include "quadinfer/model_fit.hpp"
#include "quadinfer/report.hpp"
#include "quadinfer/simulation.hpp"
#include "quadinfer/two_sample.hpp"
#include "quadinfer/version.hpp"

namespace {

using namespace quadinfer;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void emit_report(const Report& report, const std::string& out_path) {
  const std::string text = serialize_report(report);
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot open output file '" + out_path + "'");
  }
  out << text;
}

nlohmann::json null_or(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

void add_flag_warnings(Report& report, unsigned flags) {
  if (flags != 0) {
    report.warnings.push_back(flag_names(flags));
  }
}

nlohmann::json data_info_json(const CsvIngestInfo& info) {
  nlohmann::json j;
  j["rows"] = info.rows;
  j["response"] = info.response_name;
  j["columns"] = info.column_names;
  j["dropped_columns"] = info.dropped_names;
  j["imputed_cells"] = info.imputed_cells;
  return j;
}

// ---------------------------------------------------------------- test ----

struct TestArgs {
  std::string input;
  std::string response = "y";
  bool center = true;
  std::string kind = "quad-norm";
  double null_value = kNaN;
  double alpha = 0.05;
  std::vector<double> contrast;
  std::string out;
  std::string timestamp;
};

int cmd_test(const TestArgs& a) {
  const TestKind kind = parse_test_kind(a.kind);
  switch (kind) {
    case TestKind::kTwoSampleEquality:
    case TestKind::kCoheritability:
      throw ConfigError("kind '" + a.kind + "' needs the two-sample subcommand");
    case TestKind::kCoverageAll:
      throw ConfigError("kind 'coverage-all' is simulation-only");
    default:
      break;
  }

  CsvIngestOptions opts;
  opts.response = a.response;
  opts.center = a.center;
  CsvIngestInfo info;
  Dataset d = ingest_csv(a.input, opts, &info);
  ModelFit fit = ols_fit(d);

  const bool has_null = !std::isnan(a.null_value);
  auto require_null = [&](const char* what) {
    if (!has_null) {
      throw ConfigError(std::string("--null is required for kind '") + a.kind +
                        "' (" + what + ")");
    }
  };

  InferenceResult r;
  switch (kind) {
    case TestKind::kQuadNorm:
      require_null("the hypothesized coefficient norm");
      r = test_quad_norm(fit, a.null_value, a.alpha);
      break;
    case TestKind::kConventional:
      require_null("the hypothesized coefficient norm");
      r = test_conventional(fit, a.null_value, a.alpha);
      break;
    case TestKind::kSignal:
      r = test_signal_detection(fit, a.alpha);
      break;
    case TestKind::kGlobal: {
      // Without an explicit point the global test targets the zero vector.
      Eigen::VectorXd beta_null = Eigen::VectorXd::Zero(fit.p);
      r = test_global(fit, beta_null, a.alpha);
      break;
    }
    case TestKind::kErrorVariance:
      require_null("the hypothesized noise variance");
      r = test_error_variance(fit, residuals(fit, d), a.null_value, a.alpha);
      break;
    case TestKind::kRho:
      require_null("the hypothesized variance-explained fraction");
      r = test_rho(fit, d, a.null_value, a.alpha);
      break;
    case TestKind::kEta:
      r = ci_eta(fit, d, a.alpha);
      break;
    case TestKind::kLinear: {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(fit.p);
      if (a.contrast.empty()) {
        c(0) = 1.0;
      } else {
        if (static_cast<int>(a.contrast.size()) != fit.p) {
          throw ConfigError("--contrast needs exactly " + std::to_string(fit.p) +
                            " entries after rank repair");
        }
        for (int j = 0; j < fit.p; ++j) c(j) = a.contrast[j];
      }
      r = linear_functional_inference(fit, c, a.alpha);
      break;
    }
    default:
      throw ConfigError("unhandled kind '" + a.kind + "'");
  }

  Report report;
  report.meta["version"] = kVersion;
  report.meta["command"] = "test";
  report.meta["timestamp"] = a.timestamp;
  report.meta["config"] = {{"input", a.input},     {"response", a.response},
                           {"center", a.center},   {"kind", a.kind},
                           {"null", null_or(a.null_value)}, {"alpha", a.alpha}};
  report.meta["data"] = data_info_json(info);
  report.results.emplace_back(a.kind, r);
  add_flag_warnings(report, r.flags);
  emit_report(report, a.out);
  return 0;
}

// ---------------------------------------------------------- two-sample ----

struct TwoSampleArgs {
  std::string input;
  std::string input2;
  std::string response = "y";
  std::string response2;
  bool center = true;
  std::string kind = "two-sample-equality";
  double null_value = kNaN;
  double alpha = 0.05;
  bool conventional = false;
  std::string out;
  std::string timestamp;
};

int cmd_two_sample(const TwoSampleArgs& a) {
  const TestKind kind = parse_test_kind(a.kind);
  if (kind != TestKind::kTwoSampleEquality && kind != TestKind::kCoheritability) {
    throw ConfigError("two-sample supports kinds 'two-sample-equality' and "
                      "'coheritability'");
  }

  CsvIngestOptions opts;
  opts.response = a.response;
  opts.center = a.center;
  CsvIngestInfo info_a;
  Dataset da = ingest_csv(a.input, opts, &info_a);

  CsvIngestOptions opts_b = opts;
  opts_b.response = a.response2.empty() ? a.response : a.response2;
  CsvIngestInfo info_b;
  Dataset db = ingest_csv(a.input2, opts_b, &info_b);

  TwoSampleFit ts = make_two_sample(ols_fit(da), ols_fit(db));
  InferenceResult r;
  if (kind == TestKind::kTwoSampleEquality) {
    r = test_equality(ts, a.alpha);
  } else {
    const double theta_null = std::isnan(a.null_value) ? 0.0 : a.null_value;
    r = test_coheritability(ts, theta_null, a.alpha, a.conventional);
  }

  Report report;
  report.meta["version"] = kVersion;
  report.meta["command"] = "two-sample";
  report.meta["timestamp"] = a.timestamp;
  report.meta["config"] = {{"input", a.input},
                           {"input2", a.input2},
                           {"response", a.response},
                           {"response2", opts_b.response},
                           {"center", a.center},
                           {"kind", a.kind},
                           {"null", null_or(a.null_value)},
                           {"alpha", a.alpha},
                           {"conventional", a.conventional}};
  report.meta["data"] = data_info_json(info_a);
  report.meta["data2"] = data_info_json(info_b);
  report.results.emplace_back(a.kind, r);
  add_flag_warnings(report, r.flags);
  emit_report(report, a.out);
  return 0;
}

// ------------------------------------------------------------- simulate ----

struct SimulateArgs {
  SimConfig cfg;
  std::string case_name = "I";
  std::string test_name = "quad-norm";
  std::string beta_mode = "default";
  int threads = 1;
  std::string out;
  std::string plot_data;
  std::string timestamp;
};

BetaMode parse_beta_mode(const std::string& text) {
  if (text == "default") return BetaMode::kCaseDefault;
  if (text == "unif-entries") return BetaMode::kUnifEntries;
  if (text == "signal-grid") return BetaMode::kSignalGrid;
  throw ConfigError("unknown beta mode '" + text +
                    "' (default, unif-entries, signal-grid)");
}

nlohmann::json sim_config_json(const SimConfig& cfg) {
  nlohmann::json j;
  j["case"] = to_string(cfg.sim_case);
  j["n"] = cfg.n;
  j["p"] = cfg.p;
  j["n2"] = cfg.n2;
  j["reps"] = cfg.reps;
  j["seed"] = cfg.seed;
  j["test"] = to_string(cfg.test);
  j["alpha"] = cfg.alpha;
  j["null"] = null_or(cfg.null_value);
  j["beta_mode"] = cfg.beta_mode == BetaMode::kCaseDefault ? "default"
                   : cfg.beta_mode == BetaMode::kUnifEntries ? "unif-entries"
                                                             : "signal-grid";
  j["delta"] = cfg.delta;
  j["sigma2_eps"] = cfg.sigma2_eps;
  j["sigma2_delta"] = cfg.sigma2_delta;
  j["theta0"] = cfg.theta0;
  j["conventional"] = cfg.conventional;
  return j;
}

void add_summary_warnings(Report& report, const SimSummary& s) {
  if (s.reps_failed > 0) {
    report.warnings.push_back(std::to_string(s.reps_failed) +
                              " replications failed and were excluded");
  }
  if (s.reps_flagged > 0) {
    report.warnings.push_back(std::to_string(s.reps_flagged) +
                              " replications raised estimator flags");
  }
}

int cmd_simulate(SimulateArgs a) {
  a.cfg.sim_case = parse_sim_case(a.case_name);
  a.cfg.test = parse_test_kind(a.test_name);
  a.cfg.beta_mode = parse_beta_mode(a.beta_mode);

  SimSummary s = run_replications(a.cfg, a.threads);

  Report report;
  report.meta["version"] = kVersion;
  report.meta["command"] = "simulate";
  report.meta["timestamp"] = a.timestamp;
  // threads deliberately not echoed: results are thread-count invariant and
  // reports must be byte-identical across --threads values.
  report.meta["config"] = sim_config_json(a.cfg);
  report.tables["summary"] = summary_to_json(s);
  add_summary_warnings(report, s);
  emit_report(report, a.out);

  if (!a.plot_data.empty()) {
    std::vector<double> pvals;
    pvals.reserve(s.records.size());
    for (const auto& rec : s.records) {
      if (!rec.failed) pvals.push_back(rec.p_value);
    }
    write_qq_csv(a.plot_data, std::move(pvals));
  }
  return 0;
}

// ------------------------------------------------------------ reproduce ----

struct ReproduceArgs {
  std::string table = "coverage";
  std::string case_name = "I"; // power table only
  int reps = 1000;
  int n = 0; // 0 = the full {400, 800} grid
  std::uint64_t seed = 1;
  double alpha = 0.05;
  int threads = 1;
  std::string out;
  std::string plot_data;
  std::string timestamp;
};

std::vector<int> p_grid(int n) {
  return {4, n / 6, n / 4, static_cast<int>(n / 2.5)};
}

std::vector<int> n_grid(const ReproduceArgs& a) {
  if (a.n > 0) return {a.n};
  return {400, 800};
}

int cmd_reproduce(const ReproduceArgs& a) {
  Report report;
  report.meta["version"] = kVersion;
  report.meta["command"] = "reproduce";
  report.meta["timestamp"] = a.timestamp;
  report.meta["config"] = {{"table", a.table}, {"case", a.case_name},
                           {"reps", a.reps},   {"n", a.n},
                           {"seed", a.seed},   {"alpha", a.alpha}};

  std::uint64_t cell = 0;
  if (a.table == "coverage") {
    nlohmann::json rows = nlohmann::json::array();
    for (SimCase c : {SimCase::kI, SimCase::kII, SimCase::kIII, SimCase::kIV}) {
      for (int n : n_grid(a)) {
        for (int p : p_grid(n)) {
          SimConfig cfg;
          cfg.sim_case = c;
          cfg.n = n;
          cfg.p = p;
          cfg.reps = a.reps;
          cfg.seed = a.seed + cell++;
          cfg.alpha = a.alpha;
          cfg.test = TestKind::kCoverageAll;
          SimSummary s = run_replications(cfg, a.threads);
          nlohmann::json row;
          row["case"] = to_string(c);
          row["n"] = n;
          row["p"] = p;
          row["coverage"] = s.coverage;
          row["coverage_sigma2"] = s.coverage_sigma2;
          row["coverage_rho"] = s.coverage_rho;
          row["coverage_eta"] = s.coverage_eta;
          row["mean_ci_length"] = s.mean_ci_length;
          row["reps"] = s.reps_completed;
          rows.push_back(std::move(row));
          add_summary_warnings(report, s);
        }
      }
    }
    report.tables["coverage"] = std::move(rows);
  } else if (a.table == "calibration") {
    nlohmann::json rows = nlohmann::json::array();
    for (SimCase c : {SimCase::kI, SimCase::kII, SimCase::kIII}) {
      for (int n : n_grid(a)) {
        for (int p : p_grid(n)) {
          SimConfig cfg;
          cfg.sim_case = c;
          cfg.n = n;
          cfg.p = p;
          cfg.reps = a.reps;
          cfg.seed = a.seed + cell++;
          cfg.alpha = a.alpha;
          cfg.test = TestKind::kQuadNorm;
          SimSummary s = run_replications(cfg, a.threads);
          nlohmann::json row;
          row["case"] = to_string(c);
          row["n"] = n;
          row["p"] = p;
          row["ks_d"] = s.ks.d;
          row["ks_p_value"] = s.ks.p_value;
          row["rejection_rate"] = s.rejection_rate;
          row["reps"] = s.reps_completed;
          rows.push_back(std::move(row));
          add_summary_warnings(report, s);
        }
      }
    }
    report.tables["calibration"] = std::move(rows);
  } else if (a.table == "power") {
    SimConfig cfg;
    cfg.sim_case = parse_sim_case(a.case_name);
    cfg.n = a.n > 0 ? a.n : 400;
    cfg.p = cfg.n / 4;
    cfg.reps = a.reps;
    cfg.seed = a.seed;
    cfg.alpha = a.alpha;
    cfg.test = TestKind::kSignal;
    std::vector<double> grid;
    for (double d = 0.0; d <= 6.0 + 1e-9; d += 0.5) grid.push_back(d);
    std::vector<PowerPoint> pts = power_curve(cfg, grid, a.threads);
    nlohmann::json rows = nlohmann::json::array();
    for (const PowerPoint& pt : pts) {
      rows.push_back({{"delta", pt.delta},
                      {"rejection_rate", pt.rejection_rate},
                      {"reps", pt.reps}});
    }
    report.tables["power"] = std::move(rows);
    if (!a.plot_data.empty()) write_power_csv(a.plot_data, pts);
  } else {
    throw ConfigError("unknown table '" + a.table +
                      "' (coverage, calibration, power)");
  }

  emit_report(report, a.out);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"dimension-adaptive inference for quadratic functionals of "
               "regression coefficients"};
  app.require_subcommand(1);

  TestArgs ta;
  CLI::App* test = app.add_subcommand("test", "one-sample inference on a CSV file");
  test->add_option("--input", ta.input, "input CSV path")->required();
  test->add_option("--response", ta.response, "response column name or 0-based index");
  test->add_flag("--center,!--no-center", ta.center, "center the data (default on)");
  test->add_option("--kind", ta.kind, "procedure to run");
  test->add_option("--null", ta.null_value, "null value for the chosen kind");
  test->add_option("--alpha", ta.alpha, "test level");
  test->add_option("--contrast", ta.contrast, "weights for kind 'linear'");
  test->add_option("--out", ta.out, "report path (default stdout)");
  test->add_option("--timestamp", ta.timestamp, "timestamp string for the report");

  TwoSampleArgs wa;
  CLI::App* two = app.add_subcommand("two-sample",
                                     "two-sample inference on two CSV files");
  two->add_option("--input", wa.input, "first-sample CSV path")->required();
  two->add_option("--input2", wa.input2, "second-sample CSV path")->required();
  two->add_option("--response", wa.response, "first response column");
  two->add_option("--response2", wa.response2, "second response column");
  two->add_flag("--center,!--no-center", wa.center, "center the data (default on)");
  two->add_option("--kind", wa.kind, "two-sample-equality or coheritability");
  two->add_option("--null", wa.null_value, "null angle for coheritability");
  two->add_option("--alpha", wa.alpha, "test level");
  two->add_flag("--conventional", wa.conventional,
                "use the uncorrected comparison statistic");
  two->add_option("--out", wa.out, "report path (default stdout)");
  two->add_option("--timestamp", wa.timestamp, "timestamp string for the report");

  SimulateArgs sa;
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo study of one cell");
  sim->add_option("--case", sa.case_name, "design case I..IV");
  sim->add_option("--n", sa.cfg.n, "sample size");
  sim->add_option("--p", sa.cfg.p, "number of predictors");
  sim->add_option("--n2", sa.cfg.n2, "second sample size (two-sample kinds)");
  sim->add_option("--reps", sa.cfg.reps, "number of replications");
  sim->add_option("--seed", sa.cfg.seed, "stream seed");
  sim->add_option("--test,--kind", sa.test_name, "procedure to run per replication");
  sim->add_option("--null,--null-norm", sa.cfg.null_value,
                  "null value (default: the generated truth)");
  sim->add_option("--alpha", sa.cfg.alpha, "test level");
  sim->add_option("--beta-mode", sa.beta_mode,
                  "coefficient override: default, unif-entries, signal-grid");
  sim->add_option("--delta", sa.cfg.delta, "signal-grid magnitude");
  sim->add_option("--sigma2", sa.cfg.sigma2_eps, "true noise variance");
  sim->add_option("--sigma2-delta", sa.cfg.sigma2_delta,
                  "second-sample noise variance");
  sim->add_option("--theta0", sa.cfg.theta0, "designed two-sample angle");
  sim->add_flag("--conventional", sa.cfg.conventional,
                "use the uncorrected comparison statistic");
  sim->add_option("--threads", sa.threads, "worker threads (output-invariant)");
  sim->add_option("--out", sa.out, "report path (default stdout)");
  sim->add_option("--plot-data", sa.plot_data, "QQ-plot CSV path");
  sim->add_option("--timestamp", sa.timestamp, "timestamp string for the report");

  ReproduceArgs ra;
  CLI::App* rep = app.add_subcommand("reproduce", "bundled experiment grids");
  rep->add_option("--table", ra.table, "coverage, calibration, or power")
      ->required();
  rep->add_option("--case", ra.case_name, "design case for the power table");
  rep->add_option("--reps", ra.reps, "replications per cell");
  rep->add_option("--n", ra.n, "restrict to one sample size (default 400 and 800)");
  rep->add_option("--seed", ra.seed, "base stream seed");
  rep->add_option("--alpha", ra.alpha, "test level");
  rep->add_option("--threads", ra.threads, "worker threads (output-invariant)");
  rep->add_option("--out", ra.out, "report path (default stdout)");
  rep->add_option("--plot-data", ra.plot_data, "power-curve CSV path");
  rep->add_option("--timestamp", ra.timestamp, "timestamp string for the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (test->parsed()) return cmd_test(ta);
    if (two->parsed()) return cmd_two_sample(wa);
    if (sim->parsed()) return cmd_simulate(sa);
    return cmd_reproduce(ra);
  } catch (const DegeneracyError& e) {
    std::cerr << "degeneracy error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
