#include "lwcp/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lwcp/metrics.hpp"

namespace lwcp {

std::string WeightSpec::label() const {
  switch (kind) {
    case Kind::constant:
      return "constant";
    case Kind::inverse_root:
      return "inverse_root";
    case Kind::power_law: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "power(%.3g)", gamma);
      return buf;
    }
    case Kind::variance_stabilized:
      return "variance_stabilized";
  }
  return "?";
}

std::string method_name(Method m) {
  switch (m) {
    case Method::vanilla:
      return "vanilla";
    case Method::lwcp:
      return "lwcp";
    case Method::studentized:
      return "studentized";
    case Method::lwcp_plus:
      return "lwcp_plus";
  }
  return "?";
}

double eval_weight(const WeightSpec& spec, double h) {
  if (!(h >= 0.0)) {
    throw std::invalid_argument("eval_weight: h must be >= 0");
  }
  switch (spec.kind) {
    case WeightSpec::Kind::constant:
      return 1.0;
    case WeightSpec::Kind::inverse_root:
      return 1.0 / std::sqrt(1.0 + h);
    case WeightSpec::Kind::power_law:
      return std::pow(std::max(h, spec.h_clamp), -spec.gamma);
    case WeightSpec::Kind::variance_stabilized: {
      if (!spec.g) {
        throw std::invalid_argument("eval_weight: variance_stabilized spec without g");
      }
      const double gh = spec.g(h);
      if (!(gh > 0.0)) {
        throw std::invalid_argument("eval_weight: g(h) must be > 0");
      }
      return 1.0 / std::sqrt(gh);
    }
  }
  throw std::logic_error("eval_weight: unknown kind");
}

std::optional<int> conformal_index(double alpha, int n2) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("conformal_index: alpha must be in (0, 1)");
  }
  if (n2 < 1) {
    throw std::invalid_argument("conformal_index: n2 must be >= 1");
  }
  // Nudge below by 1e-9 so exact integers (e.g. 0.9 * 10) survive the
  // binary representation of (1 - alpha).
  const int k = static_cast<int>(
      std::ceil((1.0 - alpha) * static_cast<double>(n2 + 1) - 1e-9));
  if (k > n2) return std::nullopt;
  return std::max(k, 1);
}

CalibrationResult calibrate(const Vector& residuals_abs, const Vector& leverages,
                            const std::optional<Vector>& scales, const WeightSpec& weight,
                            double alpha) {
  const auto n2 = residuals_abs.size();
  if (n2 == 0) {
    throw std::invalid_argument("calibrate: empty calibration set");
  }
  if (leverages.size() != n2 || (scales && scales->size() != n2)) {
    throw std::invalid_argument("calibrate: length mismatch");
  }

  CalibrationResult out;
  out.alpha = alpha;
  out.n2 = static_cast<int>(n2);
  out.weight = weight;
  out.method = scales ? (weight.is_constant() ? Method::studentized : Method::lwcp_plus)
                      : (weight.is_constant() ? Method::vanilla : Method::lwcp);

  out.sorted_scores.resize(n2);
  for (Eigen::Index i = 0; i < n2; ++i) {
    if (residuals_abs[i] < 0.0) {
      throw std::invalid_argument("calibrate: residuals_abs must be non-negative");
    }
    double s = residuals_abs[i] * eval_weight(weight, leverages[i]);
    if (scales) {
      if (!((*scales)[i] > 0.0)) {
        throw std::invalid_argument("calibrate: scales must be > 0");
      }
      s /= (*scales)[i];
    }
    out.sorted_scores[i] = s;
  }
  std::sort(out.sorted_scores.data(), out.sorted_scores.data() + n2);

  const auto k = conformal_index(alpha, out.n2);
  if (k) {
    out.q_hat = out.sorted_scores[*k - 1];
    out.infinite = false;
  } else {
    out.q_hat = std::numeric_limits<double>::infinity();
    out.infinite = true;
  }
  return out;
}

PredictionInterval build_interval(const CalibrationResult& calib, double center, double h,
                                  std::optional<double> sigma_hat, double calib_p99) {
  if (!(h >= 0.0)) {
    throw std::invalid_argument("build_interval: h must be >= 0");
  }
  const bool needs_sigma =
      calib.method == Method::studentized || calib.method == Method::lwcp_plus;
  if (needs_sigma && !sigma_hat) {
    throw std::invalid_argument("build_interval: method requires sigma_hat");
  }
  if (!needs_sigma && sigma_hat) {
    throw std::invalid_argument("build_interval: sigma_hat given for a method without scales");
  }
  if (sigma_hat && !(*sigma_hat > 0.0)) {
    throw std::invalid_argument("build_interval: sigma_hat must be > 0");
  }

  PredictionInterval out;
  out.center = center;
  out.leverage = h;
  out.half_width = calib.q_hat * (sigma_hat ? *sigma_hat : 1.0) / eval_weight(calib.weight, h);
  out.extrapolation_flag = h > calib_p99;
  return out;
}

bool covers(const PredictionInterval& interval, double y) {
  if (std::isinf(interval.half_width)) return true;
  return std::abs(y - interval.center) <= interval.half_width;
}

namespace {

// In-sample decile MSCE of one candidate on the validation split: calibrate
// there, mark the points its own quantile covers, bin by validation
// leverage deciles.
double validation_mscce(const ScoredSplit& validation, const WeightSpec& candidate,
                        double alpha) {
  CalibrationResult calib =
      calibrate(validation.residuals_abs, validation.leverages, validation.scales, candidate, alpha);
  const auto n = validation.residuals_abs.size();
  std::vector<std::uint8_t> covered(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = validation.residuals_abs[i] * eval_weight(candidate, validation.leverages[i]);
    if (validation.scales) s /= (*validation.scales)[i];
    covered[i] = s <= calib.q_hat ? 1 : 0;
  }
  const RunMetrics m =
      compute_metrics(covered, Vector::Zero(n), validation.leverages, alpha);
  return m.mscce;
}

}  // namespace

WeightSelection select_weight(const ScoredSplit& validation, const ScoredSplit& calib_remainder,
                              const std::vector<WeightSpec>& candidates, double alpha,
                              SelectionMetric metric) {
  if (candidates.empty()) {
    throw std::invalid_argument("select_weight: empty candidate list");
  }
  (void)metric;  // single metric for now

  WeightSelection out;
  out.candidate_mscce.reserve(candidates.size());
  std::size_t best = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double score = validation_mscce(validation, candidates[c], alpha);
    out.candidate_mscce.push_back(score);
    if (score < out.candidate_mscce[best]) best = c;  // ties keep the earliest
  }
  out.chosen_index = best;
  out.chosen = candidates[best];
  out.calibration = calibrate(calib_remainder.residuals_abs, calib_remainder.leverages,
                              calib_remainder.scales, out.chosen, alpha);
  return out;
}

}  // namespace lwcp
