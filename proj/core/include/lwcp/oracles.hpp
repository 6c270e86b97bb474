#ifndef LWCP_ORACLES_HPP
#define LWCP_ORACLES_HPP

#include <cstdint>
#include <string>
#include <utility>

#include "lwcp/conformal.hpp"
#include "lwcp/dgp.hpp"

namespace lwcp {

struct OracleReport {
  std::string name;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

OracleReport make_report(std::string name, double observed, double expected, double tolerance);

/// Standard normal CDF by a positive-term series in phi(x); accurate to
/// ~1e-14 for |x| <= 8 and clamped beyond (no external special functions).
double normal_cdf(double x);

/// Standard normal quantile: rational initial guess refined by one Newton
/// step against normal_cdf. Accurate well below 1e-9 on (1e-12, 1-1e-12).
double normal_quantile(double p);

/// sigma * z_{1-alpha/2} * sqrt(1 + h), the classical Gaussian half-width.
double classical_halfwidth(double sigma, double alpha, double h);

/// Empirical marginal coverage of the full pipeline across replications.
/// Expected 1 - alpha; tolerance is the deterministic 1/(n2+1) slack plus
/// three standard errors of the replication mean.
OracleReport mc_coverage(Method method, const WeightSpec& weight, const DgpSpec& dgp, int reps,
                         double alpha, double ridge_lambda = 0.0);

/// Homoscedastic OLS: through-origin regression of squared training
/// residuals on (1 - h_i) and of squared test errors on (1 + h(x)); both
/// slopes should match sigma^2 within 10%. p == 0 degenerates to the
/// intercept-only check with mean squared residual sigma^2 (1 - 1/n1).
std::pair<OracleReport, OracleReport> variance_mismatch_check(int n1, int p, double sigma,
                                                              int reps,
                                                              std::uint64_t seed = 0x5eedull);

struct RecoveryStats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Mean over replications and test points of LWCP half-width divided by the
/// classical half-width at the true sigma (p = 5, isotropic Gaussian
/// protocol; n is split evenly into training and calibration halves).
RecoveryStats gaussian_recovery_stats(int n, int reps, double alpha = 0.1,
                                      std::uint64_t seed = 0x5eedull);

double gaussian_recovery_ratio(int n, int reps);

}  // namespace lwcp

#endif  // LWCP_ORACLES_HPP
