#ifndef LWCP_LEVERAGE_HPP
#define LWCP_LEVERAGE_HPP

#include <Eigen/Dense>
#include <limits>
#include <optional>

namespace lwcp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Column statistics of the training design plus the standardized matrix.
/// Scales use the population convention (divide by n); constant columns get
/// scale 1 so they standardize to all-zeros instead of erroring.
struct StandardizedDesign {
  Vector means;
  Vector scales;
  Matrix matrix;  // (train - means) / scales, row-wise

  Eigen::Index n() const { return matrix.rows(); }
  Eigen::Index p() const { return matrix.cols(); }
};

StandardizedDesign fit_standardizer(const Matrix& train_design);

Vector apply_standardizer(const StandardizedDesign& std_design, const Vector& x);
Matrix apply_standardizer_rows(const StandardizedDesign& std_design, const Matrix& rows);

/// Thin-SVD factors of a standardized design, with optional ridge term and
/// optional rank truncation. Immutable after fit except for calib_p99,
/// which is recorded once calibration leverages are known.
struct LeverageModel {
  Matrix right_singular_vectors;  // p x r
  Vector singular_values;         // length r, strictly positive, descending
  double ridge_lambda = 0.0;
  int truncation_rank = 0;  // == r means no truncation was requested
  Vector train_leverages;
  double calib_p99 = std::numeric_limits<double>::quiet_NaN();
  Eigen::Index n1 = 0;
  Eigen::Index p = 0;

  int rank() const { return static_cast<int>(singular_values.size()); }
};

/// SVD of the standardized design. Singular values below 1e-12 * s_max are
/// dropped as numerical rank; if nothing survives and ridge_lambda == 0 the
/// design is unusable and we refuse to fit.
LeverageModel fit_leverage(const StandardizedDesign& std_design, double ridge_lambda = 0.0,
                           std::optional<int> truncation_rank = std::nullopt);

/// Leverage of an already-standardized point.
/// lambda == 0: ||S^-1 V^T x||^2 over the retained spectrum.
/// lambda  > 0: sum (v_j.x)^2/(s_j^2+lambda) plus residual-energy/lambda for
/// the component of x outside the retained subspace, which keeps the
/// h <= ||x||^2/lambda bound intact under truncation.
double leverage_of(const LeverageModel& model, const Vector& x_std);

/// Batched leverage_of over matrix rows.
Vector leverage_of_rows(const LeverageModel& model, const Matrix& rows_std);

/// Ridge leverage in a raw feature space (no centering or scaling):
/// phi(x)^T (Phi^T Phi + lambda I)^-1 phi(x). Requires lambda > 0 so the
/// inverse exists for any feature dimension.
double feature_leverage(const Matrix& train_features, const Vector& x_features,
                        double ridge_lambda);

struct LeverageDiagnostics {
  double eta_hat = 0.0;  // std(h) / mean(h), sample std
  double mean_h = 0.0;
  double max_h = 0.0;
  double p99_h = 0.0;
  double gamma = 0.0;  // p / n1
};

LeverageDiagnostics diagnostics(const LeverageModel& model, const Vector& leverages);

/// Linear-interpolation quantile of an unsorted sample (q in [0,1]).
double interpolated_quantile(Vector values, double q);

}  // namespace lwcp

#endif  // LWCP_LEVERAGE_HPP
