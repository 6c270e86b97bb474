#include "lwcp/predictors.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lwcp/rng.hpp"

namespace lwcp {

namespace {

struct DesignSvd {
  Matrix u, v;
  Vector s;
};

DesignSvd svd_of(const Matrix& x) {
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  DesignSvd out;
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  out.s = svd.singularValues();
  return out;
}

}  // namespace

LinearModel fit_ols(const Matrix& std_design, const Vector& targets) {
  if (std_design.rows() != targets.size()) {
    throw std::invalid_argument("fit_ols: design/target length mismatch");
  }
  if (std_design.rows() <= std_design.cols()) {
    throw std::invalid_argument("fit_ols: n1 <= p; use fit_ridge with lambda > 0");
  }
  DesignSvd svd = svd_of(std_design);
  const double smax = svd.s.size() > 0 ? svd.s[0] : 0.0;
  if (smax <= 0.0 || svd.s[svd.s.size() - 1] <= 1e-12 * smax) {
    throw std::invalid_argument("fit_ols: rank-deficient design; use fit_ridge with lambda > 0");
  }
  LinearModel model;
  model.intercept = targets.mean();
  const Vector uty = svd.u.transpose() * targets;
  model.coefficients = svd.v * (uty.array() / svd.s.array()).matrix();
  model.ridge_lambda = 0.0;
  return model;
}

LinearModel fit_ridge(const Matrix& std_design, const Vector& targets, double lambda) {
  if (std_design.rows() != targets.size()) {
    throw std::invalid_argument("fit_ridge: design/target length mismatch");
  }
  if (lambda <= 0.0) {
    throw std::invalid_argument("fit_ridge: lambda must be > 0");
  }
  DesignSvd svd = svd_of(std_design);
  LinearModel model;
  model.intercept = targets.mean();
  const Vector uty = svd.u.transpose() * targets;
  const Vector shrink =
      (svd.s.array() / (svd.s.array().square() + lambda)).matrix();
  model.coefficients = svd.v * uty.cwiseProduct(shrink);
  model.ridge_lambda = lambda;
  return model;
}

double predict(const LinearModel& model, const Vector& x_std) {
  if (x_std.size() != model.coefficients.size()) {
    throw std::invalid_argument("predict: dimension mismatch");
  }
  return model.intercept + model.coefficients.dot(x_std);
}

Vector predict_rows(const LinearModel& model, const Matrix& rows_std) {
  if (rows_std.cols() != model.coefficients.size()) {
    throw std::invalid_argument("predict: dimension mismatch");
  }
  return (rows_std * model.coefficients).array() + model.intercept;
}

namespace {

struct TreeBuilder {
  const Matrix& x;
  const Vector& y;
  int max_depth;
  int min_leaf;
  int n_candidates;
  Rng& rng;
  ScaleEstimator::Tree& tree;
  std::vector<int> feature_pool;

  int make_leaf(const std::vector<int>& idx) {
    double sum = 0.0;
    for (int i : idx) sum += y[i];
    ScaleEstimator::Node node;
    node.value = idx.empty() ? 0.0 : sum / static_cast<double>(idx.size());
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  // Pick n_candidates distinct features by partial Fisher-Yates.
  void sample_features(std::vector<int>& out) {
    out.clear();
    const auto p = feature_pool.size();
    for (std::size_t i = 0; i < static_cast<std::size_t>(n_candidates) && i < p; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.bounded(p - i));
      std::swap(feature_pool[i], feature_pool[j]);
      out.push_back(feature_pool[i]);
    }
  }

  int build(std::vector<int>& idx, int depth) {
    const auto n = idx.size();
    if (depth >= max_depth || n < 2 * static_cast<std::size_t>(min_leaf)) {
      return make_leaf(idx);
    }

    std::vector<int> candidates;
    sample_features(candidates);

    double best_score = -1.0;  // S_L^2/n_L + S_R^2/n_R, larger is better
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, double>> col(n);  // (feature value, target)
    for (int f : candidates) {
      for (std::size_t i = 0; i < n; ++i) {
        col[i] = {x(idx[i], f), y[idx[i]]};
      }
      std::sort(col.begin(), col.end());
      double left_sum = 0.0;
      double total = 0.0;
      for (const auto& c : col) total += c.second;
      for (std::size_t i = 1; i < n; ++i) {
        left_sum += col[i - 1].second;
        if (i < static_cast<std::size_t>(min_leaf) ||
            n - i < static_cast<std::size_t>(min_leaf)) {
          continue;
        }
        if (col[i].first <= col[i - 1].first) continue;  // no distinct cut here
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(i) +
                             right_sum * right_sum / static_cast<double>(n - i);
        if (score > best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (col[i - 1].first + col[i].first);
        }
      }
    }

    if (best_feature < 0) {
      return make_leaf(idx);
    }

    std::vector<int> left_idx, right_idx;
    for (int i : idx) {
      (x(i, best_feature) <= best_threshold ? left_idx : right_idx).push_back(i);
    }
    if (left_idx.empty() || right_idx.empty()) {
      return make_leaf(idx);
    }

    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[node_id].feature = best_feature;
    tree.nodes[node_id].threshold = best_threshold;
    const int left = build(left_idx, depth + 1);
    const int right = build(right_idx, depth + 1);
    tree.nodes[node_id].left = left;
    tree.nodes[node_id].right = right;
    return node_id;
  }
};

double tree_predict(const ScaleEstimator::Tree& tree, const Vector& x) {
  int node = 0;
  while (tree.nodes[node].feature >= 0) {
    const auto& nd = tree.nodes[node];
    node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return tree.nodes[node].value;
}

}  // namespace

ScaleEstimator fit_scale_estimator(const Matrix& train_features, const Vector& abs_residuals,
                                   int tree_count, int max_depth, int min_leaf,
                                   std::uint64_t rng_seed) {
  if (train_features.rows() != abs_residuals.size()) {
    throw std::invalid_argument("fit_scale_estimator: length mismatch");
  }
  if (abs_residuals.size() == 0) {
    throw std::invalid_argument("fit_scale_estimator: empty sample");
  }
  if (abs_residuals.minCoeff() < 0.0) {
    throw std::invalid_argument("fit_scale_estimator: residuals must be non-negative");
  }
  if (tree_count < 1 || min_leaf < 1 || max_depth < 0) {
    throw std::invalid_argument("fit_scale_estimator: bad hyperparameters");
  }

  const auto n = train_features.rows();
  const auto p = train_features.cols();

  ScaleEstimator est;
  est.tree_count = tree_count;
  est.max_depth = max_depth;
  est.min_leaf = min_leaf;
  est.trees.resize(tree_count);

  const double med = interpolated_quantile(abs_residuals, 0.5);
  est.floor = med > 0.0 ? 1e-6 * med : 1e-12;

  const bool degenerate = n < 2 * static_cast<Eigen::Index>(min_leaf);
  const double global_mean = abs_residuals.mean();
  const int n_candidates = std::max(1, static_cast<int>(std::ceil(std::sqrt(
                                           static_cast<double>(p)))));

  for (int t = 0; t < tree_count; ++t) {
    auto& tree = est.trees[t];
    if (degenerate) {
      tree.nodes.push_back({-1, 0.0, -1, -1, global_mean});
      continue;
    }
    Rng rng(derive_rep_seed(rng_seed, static_cast<std::uint64_t>(t)));
    std::vector<int> idx(n);
    for (auto& i : idx) i = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n)));
    std::vector<int> pool(p);
    std::iota(pool.begin(), pool.end(), 0);
    TreeBuilder builder{train_features, abs_residuals, max_depth, min_leaf,
                        n_candidates,   rng,           tree,      std::move(pool)};
    builder.build(idx, 0);
  }
  return est;
}

double predict_scale(const ScaleEstimator& est, const Vector& x) {
  double sum = 0.0;
  for (const auto& tree : est.trees) sum += tree_predict(tree, x);
  return std::max(est.floor, sum / static_cast<double>(est.trees.size()));
}

Vector predict_scale_rows(const ScaleEstimator& est, const Matrix& rows) {
  Vector out(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    out[i] = predict_scale(est, rows.row(i).transpose());
  }
  return out;
}

}  // namespace lwcp
