#include "lwcp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "lwcp/oracles.hpp"
#include "lwcp/predictors.hpp"

namespace lwcp {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point from) {
  return std::chrono::duration<double, std::milli>(Clock::now() - from).count();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

RepOutcome run_single_rep(const GeneratedData& data, const std::vector<MethodSpec>& methods,
                          double alpha, double ridge_lambda,
                          std::optional<int> truncation_rank, std::uint64_t rep_seed) {
  const auto t_shared = Clock::now();

  const StandardizedDesign std_design = fit_standardizer(data.train_x);
  LeverageModel lev = fit_leverage(std_design, ridge_lambda, truncation_rank);
  const LinearModel fhat =
      ridge_lambda > 0.0 ? fit_ridge(std_design.matrix, data.train_y, ridge_lambda)
                         : fit_ols(std_design.matrix, data.train_y);

  const Matrix calib_std = apply_standardizer_rows(std_design, data.calib_x);
  const Matrix test_std = apply_standardizer_rows(std_design, data.test_x);
  const Vector calib_resid = (data.calib_y - predict_rows(fhat, calib_std)).cwiseAbs();
  const Vector calib_h = leverage_of_rows(lev, calib_std);
  const Vector test_h = leverage_of_rows(lev, test_std);
  const Vector centers = predict_rows(fhat, test_std);
  lev.calib_p99 = interpolated_quantile(calib_h, 0.99);
  const double calib_p99 = lev.calib_p99;
  const LeverageDiagnostics diag = diagnostics(lev, calib_h);

  const double shared_ms = elapsed_ms(t_shared);

  // The residual-scale forest is shared by studentized and lwcp_plus.
  std::optional<Vector> calib_scales, test_scales;
  double sigma_ms = 0.0;
  const bool any_sigma = std::any_of(methods.begin(), methods.end(),
                                     [](const MethodSpec& m) { return m.needs_sigma(); });
  if (any_sigma) {
    const auto t_sigma = Clock::now();
    const Vector train_resid =
        (data.train_y - predict_rows(fhat, std_design.matrix)).cwiseAbs();
    const ScaleEstimator sigma_hat = fit_scale_estimator(std_design.matrix, train_resid, 10, 6,
                                                         5, derive_rep_seed(rep_seed, 1));
    calib_scales = predict_scale_rows(sigma_hat, calib_std);
    test_scales = predict_scale_rows(sigma_hat, test_std);
    sigma_ms = elapsed_ms(t_sigma);
  }

  RepOutcome out;
  out.eta_hat = diag.eta_hat;
  out.calib_p99 = calib_p99;

  for (const MethodSpec& m : methods) {
    const auto t_method = Clock::now();
    const WeightSpec w = m.needs_weight() ? m.weight : WeightSpec::constant();
    const std::optional<Vector>& scales =
        m.needs_sigma() ? calib_scales : std::optional<Vector>{};
    const CalibrationResult calib = calibrate(calib_resid, calib_h, scales, w, alpha);

    std::vector<std::uint8_t> covered(static_cast<std::size_t>(test_std.rows()));
    Vector widths(test_std.rows());
    for (Eigen::Index i = 0; i < test_std.rows(); ++i) {
      const std::optional<double> s =
          m.needs_sigma() ? std::optional<double>((*test_scales)[i]) : std::nullopt;
      const PredictionInterval iv = build_interval(calib, centers[i], test_h[i], s, calib_p99);
      covered[static_cast<std::size_t>(i)] = covers(iv, data.test_y[i]) ? 1 : 0;
      widths[i] = 2.0 * iv.half_width;
    }
    out.per_method.push_back(compute_metrics(covered, widths, test_h, alpha));
    out.time_ms.push_back(shared_ms + (m.needs_sigma() ? sigma_ms : 0.0) +
                          elapsed_ms(t_method));
  }
  return out;
}

namespace {

std::string method_label(const MethodSpec& m) { return method_name(m.method); }

std::string weight_label(const MethodSpec& m) {
  return m.needs_weight() ? m.weight.label() : "constant";
}

// Runs `reps` jobs on `workers` threads, results gathered by index.
template <typename Fn>
void parallel_reps(int reps, int workers, Fn&& fn) {
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
  }
  workers = std::min(workers, reps);
  if (workers <= 1) {
    for (int i = 0; i < reps; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= reps || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct ExperimentShape {
  int n1 = 0, n2 = 0, n_test = 0, p = 0;
  std::string dataset;
};

std::string path_stem(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return name;
}

void fill_summary(ResultRow& row, const MetricsSummary& s) {
  row.reps = s.reps;
  row.coverage_mean = s.mean.marginal_coverage;
  row.coverage_std = s.stddev.marginal_coverage;
  row.width_mean = s.mean.mean_width;
  row.width_std = s.stddev.mean_width;
  row.gap_rep_mean = s.mean.max_decile_gap;
  row.gap_rep_std = s.stddev.max_decile_gap;
  row.gap_mean_curve = s.gap_of_mean_curve;
  row.extreme_gap_mean = s.mean.extreme_gap;
  row.extreme_gap_std = s.stddev.extreme_gap;
  row.extreme_gap_curve = s.extreme_gap_of_mean_curve;
  row.median_split_gap_mean = s.mean.median_split_gap;
  row.median_split_gap_std = s.stddev.median_split_gap;
  row.mscce_mean = s.mean.mscce;
  row.mscce_std = s.stddev.mscce;
  row.n_infinite = s.mean.n_infinite;
  row.decile_mean = s.mean_decile;
}

std::vector<ResultRow> run_recovery_experiment(const ExperimentConfig& config) {
  const int n = *config.recovery_n;
  const RecoveryStats stats =
      gaussian_recovery_stats(n, config.reps, config.alpha, config.master_seed);
  ResultRow row;
  row.experiment = config.id;
  row.dataset = "gaussian_recovery";
  row.method = "lwcp";
  row.weight = "inverse_root";
  row.alpha = config.alpha;
  row.reps = config.reps;
  row.n1 = n - n / 2;
  row.n2 = n / 2;
  row.n_test = 100;
  row.p = 5;
  row.recovery_ratio_mean = stats.mean;
  row.recovery_ratio_std = stats.stddev;
  return {row};
}

std::vector<ResultRow> run_selection_experiment(const ExperimentConfig& config) {
  if (!config.dgp) {
    throw ConfigError(config.id + ": weight selection requires a DGP source");
  }
  const auto& candidates = config.select_candidates;
  const int reps = config.reps;

  struct RepSel {
    std::size_t chosen = 0;
    RunMetrics metrics;
  };
  std::vector<RepSel> results(static_cast<std::size_t>(reps));

  parallel_reps(reps, config.worker_count, [&](int rep) {
    DgpSpec spec = *config.dgp;
    spec.seed = derive_rep_seed(config.master_seed, static_cast<std::uint64_t>(rep));
    spec.leverage_ridge_lambda = config.ridge_lambda;
    const GeneratedData data = generate(spec);

    const StandardizedDesign std_design = fit_standardizer(data.train_x);
    const LeverageModel lev = fit_leverage(std_design, config.ridge_lambda);
    const LinearModel fhat =
        config.ridge_lambda > 0.0
            ? fit_ridge(std_design.matrix, data.train_y, config.ridge_lambda)
            : fit_ols(std_design.matrix, data.train_y);

    const Matrix calib_std = apply_standardizer_rows(std_design, data.calib_x);
    const Vector calib_resid = (data.calib_y - predict_rows(fhat, calib_std)).cwiseAbs();
    const Vector calib_h = leverage_of_rows(lev, calib_std);

    // First half of the calibration block selects, second half calibrates.
    const Eigen::Index n_val = calib_resid.size() / 2;
    const Eigen::Index n_rem = calib_resid.size() - n_val;
    ScoredSplit validation{calib_resid.head(n_val), calib_h.head(n_val), std::nullopt};
    ScoredSplit remainder{calib_resid.tail(n_rem), calib_h.tail(n_rem), std::nullopt};
    const WeightSelection sel = select_weight(validation, remainder, candidates, config.alpha);

    const Matrix test_std = apply_standardizer_rows(std_design, data.test_x);
    const Vector test_h = leverage_of_rows(lev, test_std);
    const Vector centers = predict_rows(fhat, test_std);
    const double p99 = interpolated_quantile(Vector(calib_h.tail(n_rem)), 0.99);

    std::vector<std::uint8_t> covered(static_cast<std::size_t>(test_std.rows()));
    Vector widths(test_std.rows());
    for (Eigen::Index i = 0; i < test_std.rows(); ++i) {
      const PredictionInterval iv =
          build_interval(sel.calibration, centers[i], test_h[i], std::nullopt, p99);
      covered[static_cast<std::size_t>(i)] = covers(iv, data.test_y[i]) ? 1 : 0;
      widths[i] = 2.0 * iv.half_width;
    }
    results[static_cast<std::size_t>(rep)] = {
        sel.chosen_index, compute_metrics(covered, widths, test_h, config.alpha)};
  });

  const std::string dataset = family_name(config.dgp->family);
  std::vector<ResultRow> rows;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    std::vector<RunMetrics> wins;
    for (const auto& r : results) {
      if (r.chosen == c) wins.push_back(r.metrics);
    }
    ResultRow row;
    row.experiment = config.id;
    row.dataset = dataset;
    row.method = "candidate";
    row.weight = candidates[c].label();
    row.alpha = config.alpha;
    row.n1 = config.dgp->n1;
    row.n2 = config.dgp->n2;
    row.n_test = config.dgp->n_test;
    row.p = config.dgp->p;
    row.sel_fraction = static_cast<double>(wins.size()) / static_cast<double>(reps);
    if (!wins.empty()) fill_summary(row, aggregate(wins));
    row.reps = static_cast<int>(wins.size());
    rows.push_back(std::move(row));
  }

  std::vector<RunMetrics> all;
  all.reserve(results.size());
  for (const auto& r : results) all.push_back(r.metrics);
  ResultRow auto_row;
  auto_row.experiment = config.id;
  auto_row.dataset = dataset;
  auto_row.method = "lwcp_auto";
  auto_row.weight = "selected";
  auto_row.alpha = config.alpha;
  auto_row.n1 = config.dgp->n1;
  auto_row.n2 = config.dgp->n2;
  auto_row.n_test = config.dgp->n_test;
  auto_row.p = config.dgp->p;
  fill_summary(auto_row, aggregate(all));
  rows.push_back(std::move(auto_row));
  return rows;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  if (config.reps < 1) throw ConfigError(config.id + ": reps must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw ConfigError(config.id + ": alpha must be in (0, 1)");
  }

  std::vector<ResultRow> rows;
  if (config.recovery_n) {
    rows = run_recovery_experiment(config);
  } else if (!config.select_candidates.empty()) {
    rows = run_selection_experiment(config);
  } else {
    if (config.methods.empty()) throw ConfigError(config.id + ": at least one method required");
    if (!config.dgp == !config.csv) {
      throw ConfigError(config.id + ": exactly one of dgp/csv must be set");
    }

    ExperimentShape shape;
    std::optional<CsvDataset> dataset;
    if (config.csv) {
      dataset = read_csv_dataset(config.csv->path, config.csv->target_column);
      const auto n = dataset->features.rows();
      shape.n1 = static_cast<int>(std::floor(config.csv->fractions[0] * n));
      shape.n2 = static_cast<int>(std::floor(config.csv->fractions[1] * n));
      shape.n_test = static_cast<int>(n) - shape.n1 - shape.n2;
      shape.p = static_cast<int>(dataset->features.cols());
      shape.dataset = path_stem(config.csv->path);
    } else {
      shape.n1 = config.dgp->n1;
      shape.n2 = config.dgp->n2;
      shape.n_test = config.dgp->n_test;
      shape.p = config.dgp->p;
      shape.dataset = family_name(config.dgp->family);
    }

    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(config.reps));
    parallel_reps(config.reps, config.worker_count, [&](int rep) {
      const std::uint64_t rep_seed =
          derive_rep_seed(config.master_seed, static_cast<std::uint64_t>(rep));
      GeneratedData data;
      if (dataset) {
        data = split_dataset(*dataset, config.csv->fractions, rep_seed);
      } else {
        DgpSpec spec = *config.dgp;
        spec.seed = rep_seed;
        spec.leverage_ridge_lambda = config.ridge_lambda;
        data = generate(spec);
      }
      outcomes[static_cast<std::size_t>(rep)] = run_single_rep(
          data, config.methods, config.alpha, config.ridge_lambda, config.truncation_rank,
          rep_seed);
    });

    double eta_sum = 0.0, p99_sum = 0.0;
    for (const auto& o : outcomes) {
      eta_sum += o.eta_hat;
      p99_sum += o.calib_p99;
    }

    std::optional<std::size_t> vanilla_idx;
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      if (config.methods[m].method == Method::vanilla) vanilla_idx = m;
    }

    std::vector<MetricsSummary> summaries;
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      std::vector<RunMetrics> per_rep;
      per_rep.reserve(outcomes.size());
      for (const auto& o : outcomes) per_rep.push_back(o.per_method[m]);
      summaries.push_back(aggregate(per_rep));
    }

    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      ResultRow row;
      row.experiment = config.id;
      row.dataset = shape.dataset;
      row.method = method_label(config.methods[m]);
      row.weight = weight_label(config.methods[m]);
      row.alpha = config.alpha;
      row.n1 = shape.n1;
      row.n2 = shape.n2;
      row.n_test = shape.n_test;
      row.p = shape.p;
      row.ridge_lambda = config.ridge_lambda;
      row.truncation_rank = config.truncation_rank.value_or(0);
      fill_summary(row, summaries[m]);
      if (vanilla_idx && summaries[*vanilla_idx].mean.mean_width > 0.0) {
        row.width_ratio =
            summaries[m].mean.mean_width / summaries[*vanilla_idx].mean.mean_width;
      }
      row.eta_hat_mean = eta_sum / static_cast<double>(config.reps);
      row.calib_p99_mean = p99_sum / static_cast<double>(config.reps);
      double t = 0.0;
      for (const auto& o : outcomes) t += o.time_ms[m];
      row.time_ms = t / static_cast<double>(config.reps);
      rows.push_back(std::move(row));
    }
  }

  if (!config.output_path.empty()) write_csv(config.output_path, rows);
  return rows;
}

std::string csv_header() {
  std::string h =
      "schema_version,experiment,dataset,method,weight,alpha,reps,n1,n2,n_test,p,"
      "ridge_lambda,truncation_rank,coverage_mean,coverage_std,width_mean,width_std,"
      "width_ratio,gap_rep_mean,gap_rep_std,gap_mean_curve,extreme_gap_mean,"
      "extreme_gap_std,extreme_gap_curve,median_split_gap_mean,median_split_gap_std,"
      "mscce_mean,mscce_std,n_infinite";
  for (int b = 1; b <= 10; ++b) h += ",decile" + std::to_string(b);
  h += ",eta_hat_mean,calib_p99_mean,recovery_ratio_mean,recovery_ratio_std,sel_fraction,";
  h += "time_ms";
  return h;
}

std::string csv_line(const ResultRow& r) {
  std::string line;
  auto add = [&line](const std::string& s) {
    line += s;
    line += ',';
  };
  add(std::to_string(r.schema_version));
  add(r.experiment);
  add(r.dataset);
  add(r.method);
  add(r.weight);
  add(format_double(r.alpha));
  add(std::to_string(r.reps));
  add(std::to_string(r.n1));
  add(std::to_string(r.n2));
  add(std::to_string(r.n_test));
  add(std::to_string(r.p));
  add(format_double(r.ridge_lambda));
  add(std::to_string(r.truncation_rank));
  add(format_double(r.coverage_mean));
  add(format_double(r.coverage_std));
  add(format_double(r.width_mean));
  add(format_double(r.width_std));
  add(format_double(r.width_ratio));
  add(format_double(r.gap_rep_mean));
  add(format_double(r.gap_rep_std));
  add(format_double(r.gap_mean_curve));
  add(format_double(r.extreme_gap_mean));
  add(format_double(r.extreme_gap_std));
  add(format_double(r.extreme_gap_curve));
  add(format_double(r.median_split_gap_mean));
  add(format_double(r.median_split_gap_std));
  add(format_double(r.mscce_mean));
  add(format_double(r.mscce_std));
  add(std::to_string(r.n_infinite));
  for (int b = 0; b < 10; ++b) add(format_double(r.decile_mean[static_cast<std::size_t>(b)]));
  add(format_double(r.eta_hat_mean));
  add(format_double(r.calib_p99_mean));
  add(format_double(r.recovery_ratio_mean));
  add(format_double(r.recovery_ratio_std));
  add(format_double(r.sel_fraction));
  line += format_double(r.time_ms);  // last column, no trailing comma
  return line;
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  out << csv_header() << '\n';
  for (const auto& r : rows) out << csv_line(r) << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, const std::string& column, std::size_t row) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw DataError("non-numeric cell in column '" + column + "' at data row " +
                    std::to_string(row) + ": '" + s + "'");
  }
  return v;
}

}  // namespace

std::pair<long, long> validate_csv_numeric(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  long rows = 0;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError(path + ": row " + std::to_string(row_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      parse_cell(cells[j], trim(header[j]), row_no);
    }
    ++rows;
  }
  return {rows, static_cast<long>(header.size())};
}

CsvDataset read_csv_dataset(const std::string& path, const std::string& target_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);

  int target_idx = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (trim(header[j]) == target_column) target_idx = static_cast<int>(j);
  }
  if (target_idx < 0) {
    throw DataError(path + ": target column '" + target_column + "' not found in header");
  }

  std::vector<std::vector<double>> raw_rows;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError(path + ": row " + std::to_string(row_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    std::vector<double> parsed(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      parsed[j] = parse_cell(cells[j], trim(header[j]), row_no);
    }
    raw_rows.push_back(std::move(parsed));
  }

  const auto n = raw_rows.size();
  const auto p = header.size() - 1;
  if (p < 1) throw DataError(path + ": no feature columns");
  if (n < p + 2) {
    throw DataError(path + ": only " + std::to_string(n) + " rows for p = " +
                    std::to_string(p) + "; need at least p + 2");
  }

  // Canonical order: rows sorted by content, so the seeded split below is
  // invariant to the order rows happen to appear in the file.
  std::sort(raw_rows.begin(), raw_rows.end());

  CsvDataset ds;
  ds.target_name = target_column;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (static_cast<int>(j) != target_idx) ds.feature_names.push_back(trim(header[j]));
  }
  ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  ds.target.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (static_cast<int>(j) == target_idx) {
        ds.target[static_cast<Eigen::Index>(i)] = raw_rows[i][j];
      } else {
        ds.features(static_cast<Eigen::Index>(i), col++) = raw_rows[i][j];
      }
    }
  }
  return ds;
}

GeneratedData split_dataset(const CsvDataset& ds, const std::array<double, 3>& fractions,
                            std::uint64_t seed) {
  for (double f : fractions) {
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("split fractions must be in (0, 1)");
  }
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  const auto n = ds.features.rows();
  const auto n1 = static_cast<Eigen::Index>(std::floor(fractions[0] * static_cast<double>(n)));
  const auto n2 = static_cast<Eigen::Index>(std::floor(fractions[1] * static_cast<double>(n)));
  const auto n_test = n - n1 - n2;
  if (n1 < 2 || n2 < 1 || n_test < 1) {
    throw DataError("split too small: n1=" + std::to_string(n1) + " n2=" + std::to_string(n2) +
                    " n_test=" + std::to_string(n_test));
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  GeneratedData d;
  auto take = [&](Eigen::Index from, Eigen::Index count, Matrix& x, Vector& y) {
    x.resize(count, ds.features.cols());
    y.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
      x.row(i) = ds.features.row(order[static_cast<std::size_t>(from + i)]);
      y[i] = ds.target[order[static_cast<std::size_t>(from + i)]];
    }
  };
  take(0, n1, d.train_x, d.train_y);
  take(n1, n2, d.calib_x, d.calib_y);
  take(n1 + n2, n_test, d.test_x, d.test_y);
  return d;
}

GeneratedData ingest_csv(const std::string& path, const std::string& target_column,
                         const std::array<double, 3>& fractions, std::uint64_t seed) {
  return split_dataset(read_csv_dataset(path, target_column), fractions, seed);
}

std::string recommendation_for(double eta_hat) {
  if (eta_hat > 1.0) return "LWCP improves conditional coverage (eta_hat > 1)";
  if (eta_hat < 0.5) return "vanilla CP suffices (eta_hat < 0.5)";
  return "moderate leverage spread; inverse-root LWCP is a safe default";
}

namespace {

DiagnoseResult diagnose_data(const GeneratedData& data) {
  const StandardizedDesign std_design = fit_standardizer(data.train_x);
  const LeverageModel lev = fit_leverage(std_design);
  const Vector calib_h =
      leverage_of_rows(lev, apply_standardizer_rows(std_design, data.calib_x));
  DiagnoseResult out;
  out.diag = diagnostics(lev, calib_h);
  out.recommendation = recommendation_for(out.diag.eta_hat);
  return out;
}

}  // namespace

DiagnoseResult diagnose_dgp(DgpFamily family, std::uint64_t seed) {
  DgpSpec spec;
  spec.family = family;
  if (family == DgpFamily::gaussian_recovery) spec.p = 5;
  spec.seed = seed;
  return diagnose_data(generate(spec));
}

DiagnoseResult diagnose_csv(const std::string& path, const std::string& target_column,
                            std::uint64_t seed) {
  return diagnose_data(ingest_csv(path, target_column, {0.4, 0.4, 0.2}, seed));
}

namespace {

using nlohmann::json;

WeightSpec parse_weight(const json& j, const std::string& ctx) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "constant") return WeightSpec::constant();
    if (s == "inverse_root") return WeightSpec::inverse_root();
    throw ConfigError(ctx + ": unknown weight '" + s + "'");
  }
  if (j.is_object()) {
    const std::string kind = j.value("kind", "");
    if (kind == "constant") return WeightSpec::constant();
    if (kind == "inverse_root") return WeightSpec::inverse_root();
    if (kind == "power_law") {
      if (!j.contains("gamma")) throw ConfigError(ctx + ": power_law weight needs gamma");
      const double gamma = j["gamma"].get<double>();
      if (!(gamma > 0.0)) throw ConfigError(ctx + ": power_law gamma must be > 0");
      return WeightSpec::power_law(gamma, j.value("h_clamp", 1e-6));
    }
    throw ConfigError(ctx + ": unknown weight kind '" + kind + "'");
  }
  throw ConfigError(ctx + ": weight must be a string or object");
}

MethodSpec parse_method(const json& j, const std::string& ctx) {
  MethodSpec m;
  std::string kind;
  if (j.is_string()) {
    kind = j.get<std::string>();
  } else if (j.is_object()) {
    kind = j.value("kind", "");
  } else {
    throw ConfigError(ctx + ": method must be a string or object");
  }
  if (kind == "vanilla") {
    m.method = Method::vanilla;
  } else if (kind == "lwcp") {
    m.method = Method::lwcp;
  } else if (kind == "studentized") {
    m.method = Method::studentized;
  } else if (kind == "lwcp_plus") {
    m.method = Method::lwcp_plus;
  } else {
    throw ConfigError(ctx + ": unknown method '" + kind + "'");
  }
  if (j.is_object() && j.contains("weight")) {
    m.weight = parse_weight(j["weight"], ctx);
  }
  return m;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(origin + ": top level must be an object");

  ExperimentConfig cfg;
  cfg.id = j.value("id", std::string("experiment"));

  if (j.contains("dgp")) {
    const json& d = j["dgp"];
    DgpSpec spec;
    try {
      spec.family = family_from_name(d.value("family", std::string("textbook")));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(origin + ": " + e.what());
    }
    spec.n1 = d.value("n1", 300);
    spec.n2 = d.value("n2", 500);
    spec.n_test = d.value("n_test", 500);
    spec.p = d.value("p", 30);
    spec.sigma = d.value("sigma", 1.0);
    if (spec.n1 < 1 || spec.n2 < 1 || spec.n_test < 1 || spec.p < 1) {
      throw ConfigError(origin + ": dgp sizes must be positive");
    }
    if (!(spec.sigma > 0.0)) throw ConfigError(origin + ": dgp.sigma must be > 0");
    cfg.dgp = spec;
  }
  if (j.contains("csv")) {
    const json& c = j["csv"];
    CsvSource src;
    if (!c.contains("path") || !c.contains("target")) {
      throw ConfigError(origin + ": csv requires 'path' and 'target'");
    }
    src.path = c["path"].get<std::string>();
    src.target_column = c["target"].get<std::string>();
    if (c.contains("fractions")) {
      const auto f = c["fractions"];
      if (!f.is_array() || f.size() != 3) {
        throw ConfigError(origin + ": csv.fractions must be an array of 3 numbers");
      }
      src.fractions = {f[0].get<double>(), f[1].get<double>(), f[2].get<double>()};
    }
    cfg.csv = src;
  }
  if (!cfg.dgp == !cfg.csv) {
    throw ConfigError(origin + ": exactly one of 'dgp' or 'csv' must be given");
  }

  if (!j.contains("methods") || !j["methods"].is_array() || j["methods"].empty()) {
    throw ConfigError(origin + ": 'methods' must be a non-empty array");
  }
  for (std::size_t i = 0; i < j["methods"].size(); ++i) {
    cfg.methods.push_back(
        parse_method(j["methods"][i], origin + ": methods[" + std::to_string(i) + "]"));
  }

  cfg.alpha = j.value("alpha", 0.1);
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw ConfigError(origin + ": alpha must be in (0, 1)");
  }
  cfg.reps = j.value("reps", 200);
  if (cfg.reps < 1) throw ConfigError(origin + ": reps must be >= 1");
  cfg.ridge_lambda = j.value("ridge_lambda", 0.0);
  if (cfg.ridge_lambda < 0.0) throw ConfigError(origin + ": ridge_lambda must be >= 0");
  if (j.contains("truncation_rank") && !j["truncation_rank"].is_null()) {
    const int k = j["truncation_rank"].get<int>();
    if (k < 1) throw ConfigError(origin + ": truncation_rank must be >= 1");
    cfg.truncation_rank = k;
  }
  cfg.master_seed = j.value("seed", static_cast<std::uint64_t>(20260811ull));
  cfg.worker_count = j.value("workers", 0);
  cfg.output_path = j.value("out", std::string());
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace lwcp
