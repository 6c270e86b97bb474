#include "lwcp/oracles.hpp"

#include <cmath>
#include <stdexcept>

#include "lwcp/metrics.hpp"
#include "lwcp/predictors.hpp"

namespace lwcp {

OracleReport make_report(std::string name, double observed, double expected, double tolerance) {
  OracleReport r;
  r.name = std::move(name);
  r.observed = observed;
  r.expected = expected;
  r.tolerance = tolerance;
  r.pass = std::abs(observed - expected) <= tolerance;
  return r;
}

namespace {
constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
}

double normal_cdf(double x) {
  if (x < -8.5) return 0.0;
  if (x > 8.5) return 1.0;
  // Phi(x) = 1/2 + phi(x) * sum_{k>=0} x^(2k+1) / (1*3*...*(2k+1)).
  // All terms share the sign of x, so there is no cancellation.
  const double x2 = x * x;
  double term = x;
  double sum = x;
  for (int k = 1; k < 400; ++k) {
    term *= x2 / static_cast<double>(2 * k + 1);
    const double prev = sum;
    sum += term;
    if (sum == prev) break;
  }
  return 0.5 + kInvSqrt2Pi * std::exp(-0.5 * x2) * sum;
}

namespace {

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Rational approximation for the initial guess (|error| < 1.2e-9).
double quantile_initial(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must be in (0, 1)");
  }
  double x = quantile_initial(p);
  x -= (normal_cdf(x) - p) / normal_pdf(x);
  return x;
}

double classical_halfwidth(double sigma, double alpha, double h) {
  if (!(sigma > 0.0)) throw std::invalid_argument("classical_halfwidth: sigma must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("classical_halfwidth: alpha must be in (0, 1)");
  }
  if (!(h >= 0.0)) throw std::invalid_argument("classical_halfwidth: h must be >= 0");
  return sigma * normal_quantile(1.0 - alpha / 2.0) * std::sqrt(1.0 + h);
}

OracleReport mc_coverage(Method method, const WeightSpec& weight, const DgpSpec& dgp, int reps,
                         double alpha, double ridge_lambda) {
  if (reps < 100) throw std::invalid_argument("mc_coverage: reps must be >= 100");

  Vector rep_coverage(reps);
  for (int rep = 0; rep < reps; ++rep) {
    DgpSpec spec = dgp;
    spec.seed = derive_rep_seed(dgp.seed, static_cast<std::uint64_t>(rep));
    const GeneratedData data = generate(spec);

    const StandardizedDesign std_design = fit_standardizer(data.train_x);
    const LeverageModel lev = fit_leverage(std_design, ridge_lambda);
    const LinearModel fhat =
        ridge_lambda > 0.0 ? fit_ridge(std_design.matrix, data.train_y, ridge_lambda)
                           : fit_ols(std_design.matrix, data.train_y);

    const Matrix calib_std = apply_standardizer_rows(std_design, data.calib_x);
    const Matrix test_std = apply_standardizer_rows(std_design, data.test_x);
    const Vector calib_resid =
        (data.calib_y - predict_rows(fhat, calib_std)).cwiseAbs();
    const Vector calib_h = leverage_of_rows(lev, calib_std);
    const Vector test_h = leverage_of_rows(lev, test_std);

    std::optional<Vector> calib_scales, test_scales;
    if (method == Method::studentized || method == Method::lwcp_plus) {
      const Vector train_resid =
          (data.train_y - predict_rows(fhat, std_design.matrix)).cwiseAbs();
      const ScaleEstimator sigma_hat = fit_scale_estimator(
          std_design.matrix, train_resid, 10, 6, 5, derive_rep_seed(spec.seed, 1));
      calib_scales = predict_scale_rows(sigma_hat, calib_std);
      test_scales = predict_scale_rows(sigma_hat, test_std);
    }
    const WeightSpec w =
        (method == Method::vanilla || method == Method::studentized) ? WeightSpec::constant()
                                                                     : weight;
    const CalibrationResult calib = calibrate(calib_resid, calib_h, calib_scales, w, alpha);
    const double p99 = interpolated_quantile(calib_h, 0.99);

    const Vector centers = predict_rows(fhat, test_std);
    int covered_count = 0;
    for (Eigen::Index i = 0; i < test_std.rows(); ++i) {
      const std::optional<double> s =
          test_scales ? std::optional<double>((*test_scales)[i]) : std::nullopt;
      const PredictionInterval iv = build_interval(calib, centers[i], test_h[i], s, p99);
      covered_count += covers(iv, data.test_y[i]) ? 1 : 0;
    }
    rep_coverage[rep] = static_cast<double>(covered_count) / static_cast<double>(test_std.rows());
  }

  const double mean = rep_coverage.mean();
  double sd = 0.0;
  if (reps > 1) {
    sd = std::sqrt((rep_coverage.array() - mean).square().sum() / (reps - 1));
  }
  double se = sd / std::sqrt(static_cast<double>(reps));
  if (se == 0.0) {
    se = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(reps));
  }
  const double tolerance = 1.0 / static_cast<double>(dgp.n2 + 1) + 3.0 * se;
  return make_report("mc_coverage[" + method_name(method) + "/" + family_name(dgp.family) + "]",
                     mean, 1.0 - alpha, tolerance);
}

std::pair<OracleReport, OracleReport> variance_mismatch_check(int n1, int p, double sigma,
                                                              int reps, std::uint64_t seed) {
  if (p < 0 || n1 <= p) throw std::invalid_argument("variance_mismatch_check: need n1 > p >= 0");
  const double sigma2 = sigma * sigma;

  if (p == 0) {
    // Intercept-only model: hat diagonal is 1/n1 everywhere.
    double sum_sq = 0.0;
    std::int64_t count = 0;
    for (int rep = 0; rep < reps; ++rep) {
      Rng rng(derive_rep_seed(seed, static_cast<std::uint64_t>(rep)));
      Vector y(n1);
      for (int i = 0; i < n1; ++i) y[i] = sigma * rng.normal();
      const double mean = y.mean();
      sum_sq += (y.array() - mean).square().sum();
      count += n1;
    }
    const double observed = sum_sq / static_cast<double>(count);
    const double expected = sigma2 * (1.0 - 1.0 / static_cast<double>(n1));
    auto train = make_report("train_residual_variance[p=0]", observed, expected, 0.1 * expected);
    auto test = make_report("test_error_variance[p=0]", expected, expected, 0.1 * expected);
    return {train, test};
  }

  double train_zy = 0.0, train_zz = 0.0;
  double test_zy = 0.0, test_zz = 0.0;
  const int n_test = 50;

  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(derive_rep_seed(seed, static_cast<std::uint64_t>(rep)));
    Matrix x(n1, p);
    for (int i = 0; i < n1; ++i) {
      for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
    }
    const Vector beta = Vector::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
    Vector y = x * beta;
    for (int i = 0; i < n1; ++i) y[i] += sigma * rng.normal();

    const StandardizedDesign std_design = fit_standardizer(x);
    const LeverageModel lev = fit_leverage(std_design);
    const LinearModel fhat = fit_ols(std_design.matrix, y);

    const Vector train_resid = y - predict_rows(fhat, std_design.matrix);
    for (int i = 0; i < n1; ++i) {
      const double z = 1.0 - lev.train_leverages[i];
      train_zy += z * train_resid[i] * train_resid[i];
      train_zz += z * z;
    }

    for (int t = 0; t < n_test; ++t) {
      Vector xt(p);
      for (int j = 0; j < p; ++j) xt[j] = rng.normal();
      const double yt = xt.dot(beta) + sigma * rng.normal();
      const Vector xt_std = apply_standardizer(std_design, xt);
      const double err = yt - predict(fhat, xt_std);
      const double z = 1.0 + leverage_of(lev, xt_std);
      test_zy += z * err * err;
      test_zz += z * z;
    }
  }

  auto train = make_report("train_residual_slope", train_zy / train_zz, sigma2, 0.1 * sigma2);
  auto test = make_report("test_error_slope", test_zy / test_zz, sigma2, 0.1 * sigma2);
  return {train, test};
}

RecoveryStats gaussian_recovery_stats(int n, int reps, double alpha, std::uint64_t seed) {
  if (n < 50) throw std::invalid_argument("gaussian_recovery_stats: n must be >= 50");
  if (reps < 1) throw std::invalid_argument("gaussian_recovery_stats: reps must be >= 1");

  DgpSpec spec;
  spec.family = DgpFamily::gaussian_recovery;
  spec.p = 5;
  spec.n2 = n / 2;
  spec.n1 = n - spec.n2;
  spec.n_test = 100;
  spec.sigma = 1.0;

  const WeightSpec weight = WeightSpec::inverse_root();
  Vector ratios(reps);
  for (int rep = 0; rep < reps; ++rep) {
    spec.seed = derive_rep_seed(seed, static_cast<std::uint64_t>(rep));
    const GeneratedData data = generate(spec);
    const StandardizedDesign std_design = fit_standardizer(data.train_x);
    const LeverageModel lev = fit_leverage(std_design);
    const LinearModel fhat = fit_ols(std_design.matrix, data.train_y);

    const Matrix calib_std = apply_standardizer_rows(std_design, data.calib_x);
    const Vector calib_resid = (data.calib_y - predict_rows(fhat, calib_std)).cwiseAbs();
    const Vector calib_h = leverage_of_rows(lev, calib_std);
    const CalibrationResult calib =
        calibrate(calib_resid, calib_h, std::nullopt, weight, alpha);
    const double p99 = interpolated_quantile(calib_h, 0.99);

    const Matrix test_std = apply_standardizer_rows(std_design, data.test_x);
    const Vector test_h = leverage_of_rows(lev, test_std);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < test_std.rows(); ++i) {
      const PredictionInterval iv = build_interval(calib, 0.0, test_h[i], std::nullopt, p99);
      sum += iv.half_width / classical_halfwidth(spec.sigma, alpha, test_h[i]);
    }
    ratios[rep] = sum / static_cast<double>(test_std.rows());
  }

  RecoveryStats out;
  out.mean = ratios.mean();
  out.stddev = reps > 1 ? std::sqrt((ratios.array() - out.mean).square().sum() / (reps - 1)) : 0.0;
  return out;
}

double gaussian_recovery_ratio(int n, int reps) {
  return gaussian_recovery_stats(n, reps).mean;
}

}  // namespace lwcp
