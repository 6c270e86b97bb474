#ifndef LWCP_CONFORMAL_HPP
#define LWCP_CONFORMAL_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lwcp/leverage.hpp"

namespace lwcp {

/// Declarative weight function on leverage. Every kind evaluates to a
/// strictly positive finite value for all h >= 0; the power law is clamped
/// at h_clamp because h^-gamma is singular at zero.
struct WeightSpec {
  enum class Kind { constant, inverse_root, power_law, variance_stabilized };

  Kind kind = Kind::constant;
  double gamma = 0.0;       // power_law exponent
  double h_clamp = 1e-6;    // power_law only
  std::function<double(double)> g;  // variance_stabilized: w = 1/sqrt(g(h))

  static WeightSpec constant() { return {}; }
  static WeightSpec inverse_root() { return {Kind::inverse_root, 0.0, 1e-6, nullptr}; }
  static WeightSpec power_law(double gamma, double h_clamp = 1e-6) {
    return {Kind::power_law, gamma, h_clamp, nullptr};
  }
  static WeightSpec variance_stabilized(std::function<double(double)> g) {
    return {Kind::variance_stabilized, 0.0, 1e-6, std::move(g)};
  }

  bool is_constant() const { return kind == Kind::constant; }
  std::string label() const;
};

double eval_weight(const WeightSpec& spec, double h);

/// Index (1-based) of the conformal quantile among n2 sorted scores:
/// ceil((1-alpha)(n2+1)). nullopt when the index exceeds n2, in which case
/// the interval is infinite.
std::optional<int> conformal_index(double alpha, int n2);

enum class Method { vanilla, lwcp, studentized, lwcp_plus };

std::string method_name(Method m);

struct CalibrationResult {
  Vector sorted_scores;  // ascending
  double q_hat = 0.0;    // +inf when infinite == true
  double alpha = 0.0;
  int n2 = 0;
  Method method = Method::vanilla;
  WeightSpec weight;
  bool infinite = false;
};

/// score_i = residuals_abs[i] * w(leverages[i]) / scales[i] (scales default
/// to 1), sorted ascending; q_hat is the conformal_index-th smallest.
CalibrationResult calibrate(const Vector& residuals_abs, const Vector& leverages,
                            const std::optional<Vector>& scales, const WeightSpec& weight,
                            double alpha);

struct PredictionInterval {
  double center = 0.0;
  double half_width = 0.0;  // may be +inf
  double leverage = 0.0;
  bool extrapolation_flag = false;
};

/// half_width = q_hat * (sigma_hat or 1) / w(h). sigma_hat is required for
/// studentized and lwcp_plus calibrations and rejected otherwise.
PredictionInterval build_interval(const CalibrationResult& calib, double center, double h,
                                  std::optional<double> sigma_hat, double calib_p99);

/// Closed-interval membership; infinite intervals cover everything.
bool covers(const PredictionInterval& interval, double y);

/// Residual/leverage view of one data split, scores already D1-measurable.
struct ScoredSplit {
  Vector residuals_abs;
  Vector leverages;
  std::optional<Vector> scales;  // sigma_hat per point, when applicable
};

enum class SelectionMetric { mscce };

struct WeightSelection {
  WeightSpec chosen;
  std::size_t chosen_index = 0;
  CalibrationResult calibration;       // recalibrated on the held-out remainder
  std::vector<double> candidate_mscce; // selection score per candidate
};

/// Three-way-split weight selection: score each candidate by the MSCE of
/// its in-sample decile coverage on the validation split, pick the argmin
/// (ties -> earliest candidate), then calibrate the winner on
/// calib_remainder, which selection never saw.
WeightSelection select_weight(const ScoredSplit& validation, const ScoredSplit& calib_remainder,
                              const std::vector<WeightSpec>& candidates, double alpha,
                              SelectionMetric metric = SelectionMetric::mscce);

}  // namespace lwcp

#endif  // LWCP_CONFORMAL_HPP
