#include <cmath>

#include "lwcp/harness.hpp"

namespace lwcp {

namespace {

const std::vector<DgpFamily> kFiveFamilies = {
    DgpFamily::textbook, DgpFamily::heavy_tailed, DgpFamily::polynomial,
    DgpFamily::homoscedastic, DgpFamily::adversarial};

MethodSpec vanilla_method() { return {Method::vanilla, WeightSpec::constant()}; }
MethodSpec lwcp_method() { return {Method::lwcp, WeightSpec::inverse_root()}; }

DgpSpec default_dgp(DgpFamily family) {
  DgpSpec d;
  d.family = family;
  d.n1 = 300;
  d.n2 = 500;
  d.n_test = 500;
  d.p = 30;
  d.sigma = 1.0;
  return d;
}

ExperimentConfig base_config(const std::string& id, std::uint64_t master_seed, int salt,
                             int worker_count) {
  ExperimentConfig cfg;
  cfg.id = id;
  cfg.master_seed = derive_rep_seed(master_seed, 0x1000000ull + static_cast<std::uint64_t>(salt));
  cfg.worker_count = worker_count;
  return cfg;
}

// The gap/width runs use p/n1 = 0.3 for the homoscedastic family (the
// setting where inverse-root weighting exactly stabilizes the prediction
// variance) and a larger test block so the averaged decile curve is sharp.
int gap_p(DgpFamily family) { return family == DgpFamily::homoscedastic ? 90 : 30; }

std::vector<ExperimentConfig> preset_table1(std::uint64_t seed, std::optional<int> reps,
                                            int workers) {
  std::vector<ExperimentConfig> out;
  int salt = 0;
  for (DgpFamily f : kFiveFamilies) {
    auto cfg = base_config("table1/coverage/" + family_name(f), seed, salt++, workers);
    cfg.dgp = default_dgp(f);
    cfg.methods = {vanilla_method(), lwcp_method()};
    cfg.reps = reps.value_or(1000);
    out.push_back(cfg);
  }
  for (DgpFamily f : kFiveFamilies) {
    auto cfg = base_config("table1/gapwidth/" + family_name(f), seed, salt++, workers);
    cfg.dgp = default_dgp(f);
    cfg.dgp->p = gap_p(f);
    cfg.dgp->n_test = 2000;
    cfg.methods = {vanilla_method(), lwcp_method()};
    cfg.reps = reps.value_or(200);
    out.push_back(cfg);
  }
  return out;
}

std::vector<ExperimentConfig> preset_conditional(std::uint64_t seed, std::optional<int> reps,
                                                 int workers) {
  std::vector<ExperimentConfig> out;
  int salt = 0;
  for (DgpFamily f : kFiveFamilies) {
    auto cfg = base_config("conditional/" + family_name(f), seed, salt++, workers);
    cfg.dgp = default_dgp(f);
    cfg.dgp->p = gap_p(f);
    cfg.dgp->n_test = 1000;
    cfg.methods = {vanilla_method(), lwcp_method(),
                   {Method::studentized, WeightSpec::constant()},
                   {Method::lwcp_plus, WeightSpec::inverse_root()}};
    cfg.reps = reps.value_or(200);
    out.push_back(cfg);
  }
  return out;
}

std::vector<ExperimentConfig> preset_gaussian_recovery(std::uint64_t seed,
                                                       std::optional<int> reps, int workers) {
  std::vector<ExperimentConfig> out;
  int salt = 0;
  for (int n : {50, 100, 200, 500, 1000, 2000, 5000}) {
    auto cfg = base_config("gaussian-recovery/n" + std::to_string(n), seed, salt++, workers);
    cfg.recovery_n = n;
    cfg.reps = reps.value_or(200);
    out.push_back(cfg);
  }
  return out;
}

// n is the per-cell budget: the train and calibration blocks take
// floor(n/3) points each and the test block n. Cells with n1 < 2p are
// skipped as unreliable for OLS.
std::vector<ExperimentConfig> preset_scaling(std::uint64_t seed, std::optional<int> reps,
                                             int workers) {
  std::vector<ExperimentConfig> out;
  int salt = 0;
  for (int p : {5, 20, 50, 100}) {
    for (int n : {200, 500, 1000, 2000, 5000}) {
      const int n1 = n / 3;
      if (n1 < 2 * p) continue;
      auto cfg = base_config(
          "scaling/p" + std::to_string(p) + "/n" + std::to_string(n), seed, salt++, workers);
      cfg.dgp = default_dgp(DgpFamily::textbook);
      cfg.dgp->p = p;
      cfg.dgp->n1 = n1;
      cfg.dgp->n2 = n1;
      cfg.dgp->n_test = n;
      cfg.methods = {lwcp_method()};
      cfg.reps = reps.value_or(100);
      out.push_back(cfg);
    }
  }
  return out;
}

std::vector<ExperimentConfig> preset_approx(std::uint64_t seed, std::optional<int> reps,
                                            int workers) {
  std::vector<ExperimentConfig> out;
  for (int p : {10, 30, 50, 100}) {
    // All truncation variants of one p share the master seed, so their
    // replications see identical data and coverage differences isolate the
    // truncation effect.
    const std::uint64_t seed_p = derive_rep_seed(seed, 0x2000000ull + static_cast<std::uint64_t>(p));
    for (int k : {0, p, p / 2, p / 4}) {
      auto id = "approx/p" + std::to_string(p) + "/" +
                (k == 0 ? std::string("exact") : "k" + std::to_string(k));
      ExperimentConfig cfg;
      cfg.id = id;
      cfg.master_seed = seed_p;
      cfg.worker_count = workers;
      cfg.dgp = default_dgp(DgpFamily::textbook);
      cfg.dgp->p = p;
      cfg.methods = {lwcp_method()};
      cfg.reps = reps.value_or(200);
      if (k > 0) cfg.truncation_rank = k;
      out.push_back(cfg);
    }
  }
  return out;
}

std::vector<ExperimentConfig> preset_ridge(std::uint64_t seed, std::optional<int> reps,
                                           int workers) {
  std::vector<ExperimentConfig> out;
  int salt = 0;
  for (int p : {50, 100, 200, 500}) {
    auto cfg = base_config("ridge/p" + std::to_string(p), seed, salt++, workers);
    cfg.dgp = default_dgp(DgpFamily::textbook);
    cfg.dgp->n1 = 100;
    cfg.dgp->p = p;
    cfg.ridge_lambda = 1.0;
    cfg.methods = {vanilla_method(), lwcp_method()};
    cfg.reps = reps.value_or(200);
    out.push_back(cfg);
  }
  return out;
}

std::vector<ExperimentConfig> preset_highdim(std::uint64_t seed, std::optional<int> reps,
                                             int workers) {
  std::vector<ExperimentConfig> out;
  int salt = 0;
  for (double gamma : {0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9}) {
    auto cfg = base_config("highdim/gamma" + std::to_string(gamma).substr(0, 4), seed, salt++,
                           workers);
    cfg.dgp = default_dgp(DgpFamily::textbook);
    cfg.dgp->p = static_cast<int>(std::lround(gamma * 300.0));
    cfg.methods = {vanilla_method(), lwcp_method()};
    cfg.reps = reps.value_or(50);
    out.push_back(cfg);
  }
  for (double gamma : {1.0, 1.5, 2.0, 5.0, 10.0}) {
    auto cfg = base_config("highdim/ridge/gamma" + std::to_string(gamma).substr(0, 4), seed,
                           salt++, workers);
    cfg.dgp = default_dgp(DgpFamily::textbook);
    cfg.dgp->p = static_cast<int>(std::lround(gamma * 300.0));
    cfg.ridge_lambda = 1.0;
    cfg.methods = {vanilla_method(), lwcp_method()};
    cfg.reps = reps.value_or(20);
    out.push_back(cfg);
  }
  return out;
}

// Three-way split: the pooled non-test data is 800 points, half for
// training and half for calibration, of which the first half selects the
// weight and the second half computes the final quantile.
std::vector<ExperimentConfig> preset_weight_select(std::uint64_t seed, std::optional<int> reps,
                                                   int workers) {
  std::vector<ExperimentConfig> out;
  int salt = 0;
  for (DgpFamily f : kFiveFamilies) {
    auto cfg = base_config("weight-select/" + family_name(f), seed, salt++, workers);
    cfg.dgp = default_dgp(f);
    cfg.dgp->n1 = 400;
    cfg.dgp->n2 = 400;
    cfg.select_candidates = {WeightSpec::constant(), WeightSpec::inverse_root(),
                             WeightSpec::power_law(0.3), WeightSpec::power_law(0.5)};
    cfg.reps = reps.value_or(20);
    out.push_back(cfg);
  }
  return out;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"table1", "conditional", "gaussian-recovery", "scaling",
          "approx", "ridge",       "highdim",           "weight-select"};
}

std::vector<ExperimentConfig> make_preset(const std::string& name, std::uint64_t master_seed,
                                          std::optional<int> reps_override, int worker_count) {
  if (name == "table1") return preset_table1(master_seed, reps_override, worker_count);
  if (name == "conditional") return preset_conditional(master_seed, reps_override, worker_count);
  if (name == "gaussian-recovery") {
    return preset_gaussian_recovery(master_seed, reps_override, worker_count);
  }
  if (name == "scaling") return preset_scaling(master_seed, reps_override, worker_count);
  if (name == "approx") return preset_approx(master_seed, reps_override, worker_count);
  if (name == "ridge") return preset_ridge(master_seed, reps_override, worker_count);
  if (name == "highdim") return preset_highdim(master_seed, reps_override, worker_count);
  if (name == "weight-select") {
    return preset_weight_select(master_seed, reps_override, worker_count);
  }
  throw ConfigError("unknown preset: " + name);
}

}  // namespace lwcp
