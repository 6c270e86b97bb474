#ifndef LWCP_METRICS_HPP
#define LWCP_METRICS_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "lwcp/leverage.hpp"

namespace lwcp {

/// Per-replication evaluation of one method on one test set.
struct RunMetrics {
  double marginal_coverage = 0.0;
  double mean_width = 0.0;  // finite widths only
  std::array<double, 10> decile_coverage{};
  double max_decile_gap = 0.0;     // max - min over deciles
  double extreme_gap = 0.0;        // |decile10 - decile1|
  double median_split_gap = 0.0;   // |cov(h <= median) - cov(h > median)|
  double mscce = 0.0;              // mean over deciles of (cov - (1-alpha))^2
  int n_test = 0;
  int n_infinite = 0;
};

/// Marginal-only variant for n_test < 10 where decile bins are undefined.
struct MarginalMetrics {
  double marginal_coverage = 0.0;
  double mean_width = 0.0;
  int n_test = 0;
  int n_infinite = 0;
};

/// Decile bins are equal-count by test leverage, boundaries per run; bin
/// sizes differ by at most one. Throws when n_test < 10.
RunMetrics compute_metrics(const std::vector<std::uint8_t>& covered, const Vector& widths,
                           const Vector& test_leverages, double alpha);

MarginalMetrics compute_marginal_metrics(const std::vector<std::uint8_t>& covered,
                                         const Vector& widths);

/// mean(lwcp widths) / mean(vanilla widths); rejects non-finite input and a
/// zero denominator.
double width_ratio(const Vector& lwcp_widths, const Vector& vanilla_widths);

/// Field-wise mean and sample std across replications. Decile coverage is
/// averaged element-wise; gap_of_mean_curve is the spread of that averaged
/// curve, which is the across-replication reading of the conditional gap.
struct MetricsSummary {
  RunMetrics mean;
  RunMetrics stddev;
  std::array<double, 10> mean_decile{};
  double gap_of_mean_curve = 0.0;
  double extreme_gap_of_mean_curve = 0.0;
  int reps = 0;
};

MetricsSummary aggregate(const std::vector<RunMetrics>& per_rep);

}  // namespace lwcp

#endif  // LWCP_METRICS_HPP
