#ifndef LWCP_PREDICTORS_HPP
#define LWCP_PREDICTORS_HPP

#include <cstdint>
#include <vector>

#include "lwcp/leverage.hpp"

namespace lwcp {

/// Linear predictor fitted on a standardized (centered) design, so the
/// intercept is just the target mean.
struct LinearModel {
  Vector coefficients;
  double intercept = 0.0;
  double ridge_lambda = 0.0;
};

LinearModel fit_ols(const Matrix& std_design, const Vector& targets);
LinearModel fit_ridge(const Matrix& std_design, const Vector& targets, double lambda);

double predict(const LinearModel& model, const Vector& x_std);
Vector predict_rows(const LinearModel& model, const Matrix& rows_std);

/// Bagged regression trees for the local residual scale sigma_hat(x).
/// Axis-aligned splits, squared-error criterion, sqrt(p) feature candidates
/// per split, bootstrap of size n per tree. Predictions are clamped below
/// by `floor` so downstream score divisions stay finite.
struct ScaleEstimator {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  struct Tree {
    std::vector<Node> nodes;
  };

  std::vector<Tree> trees;
  int tree_count = 10;
  int max_depth = 6;
  int min_leaf = 5;
  double floor = 0.0;
};

ScaleEstimator fit_scale_estimator(const Matrix& train_features, const Vector& abs_residuals,
                                   int tree_count = 10, int max_depth = 6, int min_leaf = 5,
                                   std::uint64_t rng_seed = 0);

double predict_scale(const ScaleEstimator& est, const Vector& x);
Vector predict_scale_rows(const ScaleEstimator& est, const Matrix& rows);

}  // namespace lwcp

#endif  // LWCP_PREDICTORS_HPP
