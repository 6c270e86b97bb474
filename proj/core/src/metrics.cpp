#include "lwcp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lwcp {

MarginalMetrics compute_marginal_metrics(const std::vector<std::uint8_t>& covered,
                                         const Vector& widths) {
  const auto n = covered.size();
  if (n == 0 || widths.size() != static_cast<Eigen::Index>(n)) {
    throw std::invalid_argument("compute_marginal_metrics: bad input lengths");
  }
  MarginalMetrics m;
  m.n_test = static_cast<int>(n);
  double cov_sum = 0.0, width_sum = 0.0;
  int finite = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cov_sum += covered[i] ? 1.0 : 0.0;
    if (std::isfinite(widths[static_cast<Eigen::Index>(i)])) {
      width_sum += widths[static_cast<Eigen::Index>(i)];
      ++finite;
    } else {
      ++m.n_infinite;
    }
  }
  m.marginal_coverage = cov_sum / static_cast<double>(n);
  m.mean_width = finite > 0 ? width_sum / finite : 0.0;
  return m;
}

RunMetrics compute_metrics(const std::vector<std::uint8_t>& covered, const Vector& widths,
                           const Vector& test_leverages, double alpha) {
  const auto n = covered.size();
  if (widths.size() != static_cast<Eigen::Index>(n) ||
      test_leverages.size() != static_cast<Eigen::Index>(n)) {
    throw std::invalid_argument("compute_metrics: length mismatch");
  }
  if (n < 10) {
    throw std::invalid_argument(
        "compute_metrics: n_test < 10, decile metrics undefined; use "
        "compute_marginal_metrics");
  }

  const MarginalMetrics marginal = compute_marginal_metrics(covered, widths);

  RunMetrics m;
  m.marginal_coverage = marginal.marginal_coverage;
  m.mean_width = marginal.mean_width;
  m.n_test = marginal.n_test;
  m.n_infinite = marginal.n_infinite;

  // Equal-count bins by leverage; ties broken by index so the partition is
  // deterministic. The first (n mod 10) bins take the extra point.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (test_leverages[a] != test_leverages[b]) return test_leverages[a] < test_leverages[b];
    return a < b;
  });

  const std::size_t base = n / 10, extra = n % 10;
  std::size_t pos = 0;
  const double nominal = 1.0 - alpha;
  double mscce = 0.0;
  for (int b = 0; b < 10; ++b) {
    const std::size_t size = base + (static_cast<std::size_t>(b) < extra ? 1 : 0);
    double sum = 0.0;
    for (std::size_t i = 0; i < size; ++i) sum += covered[order[pos + i]] ? 1.0 : 0.0;
    pos += size;
    const double cov = sum / static_cast<double>(size);
    m.decile_coverage[b] = cov;
    mscce += (cov - nominal) * (cov - nominal);
  }
  m.mscce = mscce / 10.0;

  const auto [lo, hi] =
      std::minmax_element(m.decile_coverage.begin(), m.decile_coverage.end());
  m.max_decile_gap = *hi - *lo;
  m.extreme_gap = std::abs(m.decile_coverage[9] - m.decile_coverage[0]);

  const double median = interpolated_quantile(test_leverages, 0.5);
  double low_sum = 0.0, high_sum = 0.0;
  std::size_t low_n = 0, high_n = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (test_leverages[static_cast<Eigen::Index>(i)] <= median) {
      low_sum += covered[i] ? 1.0 : 0.0;
      ++low_n;
    } else {
      high_sum += covered[i] ? 1.0 : 0.0;
      ++high_n;
    }
  }
  m.median_split_gap =
      (low_n > 0 && high_n > 0)
          ? std::abs(low_sum / static_cast<double>(low_n) - high_sum / static_cast<double>(high_n))
          : 0.0;
  return m;
}

double width_ratio(const Vector& lwcp_widths, const Vector& vanilla_widths) {
  if (lwcp_widths.size() == 0 || vanilla_widths.size() == 0) {
    throw std::invalid_argument("width_ratio: empty input");
  }
  if (!lwcp_widths.allFinite() || !vanilla_widths.allFinite()) {
    throw std::invalid_argument("width_ratio: widths must be finite");
  }
  const double denom = vanilla_widths.mean();
  if (denom == 0.0) {
    throw std::invalid_argument("width_ratio: zero denominator");
  }
  return lwcp_widths.mean() / denom;
}

namespace {

template <typename Get>
void mean_std(const std::vector<RunMetrics>& reps, Get get, double& mean_out,
              double& std_out) {
  const auto r = reps.size();
  double sum = 0.0;
  for (const auto& m : reps) sum += get(m);
  const double mean = sum / static_cast<double>(r);
  double ss = 0.0;
  for (const auto& m : reps) {
    const double d = get(m) - mean;
    ss += d * d;
  }
  mean_out = mean;
  std_out = r > 1 ? std::sqrt(ss / static_cast<double>(r - 1)) : 0.0;
}

}  // namespace

MetricsSummary aggregate(const std::vector<RunMetrics>& per_rep) {
  if (per_rep.empty()) {
    throw std::invalid_argument("aggregate: no replications");
  }
  MetricsSummary s;
  s.reps = static_cast<int>(per_rep.size());

  mean_std(per_rep, [](const RunMetrics& m) { return m.marginal_coverage; },
           s.mean.marginal_coverage, s.stddev.marginal_coverage);
  mean_std(per_rep, [](const RunMetrics& m) { return m.mean_width; }, s.mean.mean_width,
           s.stddev.mean_width);
  mean_std(per_rep, [](const RunMetrics& m) { return m.max_decile_gap; },
           s.mean.max_decile_gap, s.stddev.max_decile_gap);
  mean_std(per_rep, [](const RunMetrics& m) { return m.extreme_gap; }, s.mean.extreme_gap,
           s.stddev.extreme_gap);
  mean_std(per_rep, [](const RunMetrics& m) { return m.median_split_gap; },
           s.mean.median_split_gap, s.stddev.median_split_gap);
  mean_std(per_rep, [](const RunMetrics& m) { return m.mscce; }, s.mean.mscce, s.stddev.mscce);

  double n_test_sum = 0.0, inf_sum = 0.0;
  for (const auto& m : per_rep) {
    n_test_sum += m.n_test;
    inf_sum += m.n_infinite;
  }
  s.mean.n_test = static_cast<int>(n_test_sum / static_cast<double>(per_rep.size()));
  s.mean.n_infinite = static_cast<int>(inf_sum);

  for (int b = 0; b < 10; ++b) {
    double sum = 0.0;
    for (const auto& m : per_rep) sum += m.decile_coverage[b];
    s.mean_decile[b] = sum / static_cast<double>(per_rep.size());
  }
  s.mean.decile_coverage = s.mean_decile;
  const auto [lo, hi] = std::minmax_element(s.mean_decile.begin(), s.mean_decile.end());
  s.gap_of_mean_curve = *hi - *lo;
  s.extreme_gap_of_mean_curve = std::abs(s.mean_decile[9] - s.mean_decile[0]);
  return s;
}

}  // namespace lwcp
