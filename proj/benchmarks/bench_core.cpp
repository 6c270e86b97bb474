#include <benchmark/benchmark.h>

#include "lwcp/harness.hpp"
#include "lwcp/predictors.hpp"

namespace {

lwcp::GeneratedData make_data(int n1, int n2, int n_test, int p) {
  lwcp::DgpSpec spec;
  spec.family = lwcp::DgpFamily::textbook;
  spec.n1 = n1;
  spec.n2 = n2;
  spec.n_test = n_test;
  spec.p = p;
  spec.seed = 7;
  return lwcp::generate(spec);
}

void BM_FitLeverage(benchmark::State& state) {
  const auto data = make_data(300, 10, 10, static_cast<int>(state.range(0)));
  const auto std_design = lwcp::fit_standardizer(data.train_x);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lwcp::fit_leverage(std_design));
  }
}
BENCHMARK(BM_FitLeverage)->Arg(30)->Arg(90)->Arg(270);

void BM_LeverageScores(benchmark::State& state) {
  const auto data = make_data(300, static_cast<int>(state.range(0)), 10, 30);
  const auto std_design = lwcp::fit_standardizer(data.train_x);
  const auto lev = lwcp::fit_leverage(std_design);
  const auto calib = lwcp::apply_standardizer_rows(std_design, data.calib_x);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lwcp::leverage_of_rows(lev, calib));
  }
}
BENCHMARK(BM_LeverageScores)->Arg(500)->Arg(5000);

void BM_Calibrate(benchmark::State& state) {
  const auto n2 = state.range(0);
  lwcp::Vector resid = lwcp::Vector::Random(n2).cwiseAbs();
  lwcp::Vector lev = lwcp::Vector::Random(n2).cwiseAbs();
  const auto weight = lwcp::WeightSpec::inverse_root();
  for (auto _ : state) {
    benchmark::DoNotOptimize(lwcp::calibrate(resid, lev, std::nullopt, weight, 0.1));
  }
}
BENCHMARK(BM_Calibrate)->Arg(500)->Arg(5000);

void BM_FullReplication(benchmark::State& state) {
  const auto data = make_data(300, 500, 500, static_cast<int>(state.range(0)));
  const std::vector<lwcp::MethodSpec> methods = {
      {lwcp::Method::vanilla, lwcp::WeightSpec::constant()},
      {lwcp::Method::lwcp, lwcp::WeightSpec::inverse_root()}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        lwcp::run_single_rep(data, methods, 0.1, 0.0, std::nullopt, 1));
  }
}
BENCHMARK(BM_FullReplication)->Arg(30)->Arg(90);

void BM_ScaleEstimator(benchmark::State& state) {
  const auto data = make_data(300, 10, 10, 30);
  const auto std_design = lwcp::fit_standardizer(data.train_x);
  const lwcp::Vector resid = data.train_y.cwiseAbs();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        lwcp::fit_scale_estimator(std_design.matrix, resid, 10, 6, 5, 3));
  }
}
BENCHMARK(BM_ScaleEstimator);

}  // namespace

BENCHMARK_MAIN();
