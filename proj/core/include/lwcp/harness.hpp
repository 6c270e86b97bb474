#ifndef LWCP_HARNESS_HPP
#define LWCP_HARNESS_HPP

#include <array>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lwcp/conformal.hpp"
#include "lwcp/dgp.hpp"
#include "lwcp/metrics.hpp"

namespace lwcp {

/// Invalid configuration (bad flags, bad config file). CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid input data (CSV parse problems, bad shapes). CLI exit code 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MethodSpec {
  Method method = Method::vanilla;
  WeightSpec weight = WeightSpec::inverse_root();

  bool needs_sigma() const {
    return method == Method::studentized || method == Method::lwcp_plus;
  }
  bool needs_weight() const { return method == Method::lwcp || method == Method::lwcp_plus; }
};

struct CsvSource {
  std::string path;
  std::string target_column;
  std::array<double, 3> fractions{0.4, 0.4, 0.2};  // train / calib / test
};

struct ExperimentConfig {
  std::string id = "experiment";
  std::optional<DgpSpec> dgp;
  std::optional<CsvSource> csv;
  std::vector<MethodSpec> methods;
  double alpha = 0.1;
  int reps = 200;
  double ridge_lambda = 0.0;              // > 0: ridge predictor + ridge leverage
  std::optional<int> truncation_rank;     // approximate leverage
  std::uint64_t master_seed = 20260811ull;
  int worker_count = 0;                   // 0 = hardware concurrency
  std::string output_path;                // empty: caller handles output

  // Alternative experiment kinds driven by presets.
  std::optional<int> recovery_n;               // width-vs-classical protocol
  std::vector<WeightSpec> select_candidates;   // data-driven weight selection
};

/// One aggregated output line per (experiment, method). Later columns are
/// blank (NaN) where a row kind does not produce them. time_ms is
/// informational and excluded from determinism comparisons.
struct ResultRow {
  int schema_version = 1;
  std::string experiment;
  std::string dataset;
  std::string method;
  std::string weight;
  double alpha = 0.1;
  int reps = 0;
  int n1 = 0, n2 = 0, n_test = 0, p = 0;
  double ridge_lambda = 0.0;
  int truncation_rank = 0;  // 0 = exact

  double coverage_mean = nan_(), coverage_std = nan_();
  double width_mean = nan_(), width_std = nan_();
  double width_ratio = nan_();  // vs the vanilla row of the same experiment
  double gap_rep_mean = nan_(), gap_rep_std = nan_();
  double gap_mean_curve = nan_();
  double extreme_gap_mean = nan_(), extreme_gap_std = nan_(), extreme_gap_curve = nan_();
  double median_split_gap_mean = nan_(), median_split_gap_std = nan_();
  double mscce_mean = nan_(), mscce_std = nan_();
  long n_infinite = 0;
  std::array<double, 10> decile_mean{};
  double eta_hat_mean = nan_();
  double calib_p99_mean = nan_();
  double recovery_ratio_mean = nan_(), recovery_ratio_std = nan_();
  double sel_fraction = nan_();
  double time_ms = nan_();

  static double nan_() { return std::numeric_limits<double>::quiet_NaN(); }
};

/// Per-replication outcome of the shared pipeline, one entry per method.
struct RepOutcome {
  std::vector<RunMetrics> per_method;
  double eta_hat = 0.0;
  double calib_p99 = 0.0;
  std::vector<double> time_ms;
};

/// Standardize with training statistics, fit the predictor (OLS, or ridge
/// when ridge_lambda > 0) and the leverage model, then calibrate and score
/// every requested method on the test block.
RepOutcome run_single_rep(const GeneratedData& data, const std::vector<MethodSpec>& methods,
                          double alpha, double ridge_lambda,
                          std::optional<int> truncation_rank, std::uint64_t rep_seed);

/// Replications run in parallel (rep index is the unit of work); results are
/// gathered by index so aggregation and CSV bytes do not depend on
/// worker_count. Writes output_path when set.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

std::string csv_header();
std::string csv_line(const ResultRow& row);
void write_csv(const std::string& path, const std::vector<ResultRow>& rows);

/// Parsed numeric dataset in canonical row order (rows content-sorted so
/// splits are invariant to the order rows appear in the file).
struct CsvDataset {
  std::vector<std::string> feature_names;
  std::string target_name;
  Matrix features;
  Vector target;
};

CsvDataset read_csv_dataset(const std::string& path, const std::string& target_column);

/// Parse-and-validate only: header plus all-numeric cells. Returns
/// (data rows, total columns).
std::pair<long, long> validate_csv_numeric(const std::string& path);

/// Seeded shuffle + split of a CSV file into train/calib/test blocks.
GeneratedData ingest_csv(const std::string& path, const std::string& target_column,
                         const std::array<double, 3>& fractions, std::uint64_t seed);
GeneratedData split_dataset(const CsvDataset& ds, const std::array<double, 3>& fractions,
                            std::uint64_t seed);

struct DiagnoseResult {
  LeverageDiagnostics diag;
  std::string recommendation;
};

std::string recommendation_for(double eta_hat);
DiagnoseResult diagnose_dgp(DgpFamily family, std::uint64_t seed);
DiagnoseResult diagnose_csv(const std::string& path, const std::string& target_column,
                            std::uint64_t seed);

/// JSON config file -> ExperimentConfig (schema documented in the README).
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

std::vector<std::string> preset_names();
std::vector<ExperimentConfig> make_preset(const std::string& name, std::uint64_t master_seed,
                                          std::optional<int> reps_override = std::nullopt,
                                          int worker_count = 0);

}  // namespace lwcp

#endif  // LWCP_HARNESS_HPP
