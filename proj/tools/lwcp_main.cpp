// Command-line front end: `run` executes experiments (from a config file or
// a named preset) and writes a results CSV; `diagnose` prints the leverage
// diagnostics and a method recommendation; `ingest-check` validates a CSV.
//
// Exit codes: 0 success, 2 configuration error, 3 data error.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lwcp/harness.hpp"
#include "lwcp/oracles.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

int cmd_run(const std::string& config_path, const std::string& preset,
            std::optional<std::uint64_t> seed, std::optional<int> reps,
            const std::string& out, int workers) {
  std::vector<lwcp::ExperimentConfig> experiments;
  std::string default_out = "results.csv";

  if (!preset.empty()) {
    experiments = lwcp::make_preset(preset, seed.value_or(20260811ull), reps, workers);
    default_out = preset + ".csv";
  } else {
    lwcp::ExperimentConfig cfg = lwcp::parse_config_file(config_path);
    if (seed) cfg.master_seed = *seed;
    if (reps) cfg.reps = *reps;
    if (workers > 0) cfg.worker_count = workers;
    if (!cfg.output_path.empty()) default_out = cfg.output_path;
    cfg.output_path.clear();  // written once below
    experiments.push_back(std::move(cfg));
  }

  const std::string out_path = out.empty() ? default_out : out;
  std::vector<lwcp::ResultRow> rows;
  for (const auto& cfg : experiments) {
    std::fprintf(stderr, "[run] %s (%d reps)\n", cfg.id.c_str(), cfg.reps);
    auto part = lwcp::run_experiment(cfg);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  lwcp::write_csv(out_path, rows);
  std::fprintf(stderr, "[run] wrote %zu rows to %s\n", rows.size(), out_path.c_str());
  return 0;
}

int cmd_diagnose(const std::string& csv, const std::string& target, const std::string& dgp,
                 std::uint64_t seed) {
  lwcp::DiagnoseResult res;
  if (!csv.empty()) {
    res = lwcp::diagnose_csv(csv, target, seed);
  } else {
    res = lwcp::diagnose_dgp(lwcp::family_from_name(dgp), seed);
  }
  std::printf("eta_hat      %.4f\n", res.diag.eta_hat);
  std::printf("gamma        %.4f\n", res.diag.gamma);
  std::printf("mean_h       %.6f\n", res.diag.mean_h);
  std::printf("p99_h        %.6f\n", res.diag.p99_h);
  std::printf("max_h        %.6f\n", res.diag.max_h);
  std::printf("recommendation: %s\n", res.recommendation.c_str());
  return 0;
}

int cmd_ingest_check(const std::string& csv, const std::string& target) {
  if (target.empty()) {
    const auto [rows, cols] = lwcp::validate_csv_numeric(csv);
    std::printf("ok: %ld rows, %ld numeric columns (no target named)\n", rows, cols);
    return 0;
  }
  const lwcp::CsvDataset ds = lwcp::read_csv_dataset(csv, target);
  std::printf("ok: %lld rows, %lld feature columns, target '%s'\n",
              static_cast<long long>(ds.features.rows()),
              static_cast<long long>(ds.features.cols()), ds.target_name.c_str());
  for (const auto& name : ds.feature_names) std::printf("  feature: %s\n", name.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leverage-weighted conformal prediction harness"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run experiments and write a results CSV");
  std::string config_path, preset, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  int workers = 0;
  auto* config_opt = run->add_option("--config", config_path, "JSON experiment config");
  auto* preset_opt =
      run->add_option("--preset", preset, "Built-in experiment suite")
          ->check(CLI::IsMember(lwcp::preset_names()));
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--reps", reps, "Replication count override");
  run->add_option("--out", out, "Output CSV path");
  run->add_option("--workers", workers, "Worker threads (0 = hardware)");
  config_opt->excludes(preset_opt);

  // diagnose
  auto* diagnose = app.add_subcommand("diagnose", "Leverage diagnostics and recommendation");
  std::string d_csv, d_target, d_dgp;
  std::uint64_t d_seed = 20260811ull;
  auto* d_csv_opt = diagnose->add_option("--csv", d_csv, "CSV dataset path");
  diagnose->add_option("--target", d_target, "Target column (with --csv)");
  auto* d_dgp_opt = diagnose->add_option("--dgp", d_dgp, "Synthetic family name");
  diagnose->add_option("--seed", d_seed, "Seed");
  d_csv_opt->excludes(d_dgp_opt);

  // ingest-check
  auto* ingest = app.add_subcommand("ingest-check", "Validate a CSV dataset");
  std::string i_csv, i_target;
  ingest->add_option("--csv", i_csv, "CSV dataset path")->required();
  ingest->add_option("--target", i_target, "Target column (optional: also checks the split)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return kExitConfig;
  }

  try {
    if (run->parsed()) {
      if (config_path.empty() && preset.empty()) {
        std::fprintf(stderr, "error: run requires --config or --preset\n");
        return kExitConfig;
      }
      return cmd_run(config_path, preset, seed, reps, out, workers);
    }
    if (diagnose->parsed()) {
      if (d_csv.empty() == d_dgp.empty()) {
        std::fprintf(stderr, "error: diagnose requires exactly one of --csv/--dgp\n");
        return kExitConfig;
      }
      if (!d_csv.empty() && d_target.empty()) {
        std::fprintf(stderr, "error: --csv requires --target\n");
        return kExitConfig;
      }
      return cmd_diagnose(d_csv, d_target, d_dgp, d_seed);
    }
    if (ingest->parsed()) {
      return cmd_ingest_check(i_csv, i_target);
    }
  } catch (const lwcp::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const lwcp::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
