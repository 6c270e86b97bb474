#include "lwcp/leverage.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lwcp {

namespace {
constexpr double kSingularDropRel = 1e-12;
}

StandardizedDesign fit_standardizer(const Matrix& train_design) {
  if (train_design.rows() == 0 || train_design.cols() == 0) {
    throw std::invalid_argument("fit_standardizer: empty design");
  }
  const auto n = train_design.rows();
  StandardizedDesign out;
  out.means = train_design.colwise().mean();
  Matrix centered = train_design.rowwise() - out.means.transpose();
  // population standard deviation (divide by n)
  out.scales = (centered.array().square().colwise().sum() / static_cast<double>(n))
                   .sqrt()
                   .transpose();
  for (Eigen::Index j = 0; j < out.scales.size(); ++j) {
    const double ref = std::max(train_design.col(j).cwiseAbs().maxCoeff(), 1e-300);
    if (!(out.scales[j] > kSingularDropRel * ref)) {
      out.scales[j] = 1.0;  // constant column: keep centered zeros
      centered.col(j).setZero();
    }
  }
  out.matrix = centered.array().rowwise() / out.scales.transpose().array();
  return out;
}

Vector apply_standardizer(const StandardizedDesign& std_design, const Vector& x) {
  if (x.size() != std_design.means.size()) {
    throw std::invalid_argument("apply_standardizer: dimension mismatch");
  }
  return (x - std_design.means).cwiseQuotient(std_design.scales);
}

Matrix apply_standardizer_rows(const StandardizedDesign& std_design, const Matrix& rows) {
  if (rows.cols() != std_design.means.size()) {
    throw std::invalid_argument("apply_standardizer: dimension mismatch");
  }
  return (rows.rowwise() - std_design.means.transpose()).array().rowwise() /
         std_design.scales.transpose().array();
}

namespace {

struct ThinSvd {
  Matrix v;  // p x r
  Vector s;  // descending, > drop threshold
  Matrix u;  // n x r
};

ThinSvd thin_svd_dropped(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  int r = 0;
  while (r < sv.size() && sv[r] > kSingularDropRel * smax && sv[r] > 0.0) ++r;
  ThinSvd out;
  out.s = sv.head(r);
  out.v = svd.matrixV().leftCols(r);
  out.u = svd.matrixU().leftCols(r);
  return out;
}

}  // namespace

LeverageModel fit_leverage(const StandardizedDesign& std_design, double ridge_lambda,
                           std::optional<int> truncation_rank) {
  if (ridge_lambda < 0.0) {
    throw std::invalid_argument("fit_leverage: ridge_lambda must be >= 0");
  }
  const Matrix& x = std_design.matrix;
  if (truncation_rank && *truncation_rank > std::min(x.rows(), x.cols())) {
    throw std::invalid_argument("fit_leverage: truncation_rank exceeds min(n1, p)");
  }
  if (truncation_rank && *truncation_rank < 1) {
    throw std::invalid_argument("fit_leverage: truncation_rank must be >= 1");
  }

  ThinSvd svd = thin_svd_dropped(x);
  if (svd.s.size() == 0 && ridge_lambda == 0.0) {
    throw std::invalid_argument("fit_leverage: rank-deficient design; use ridge_lambda > 0");
  }
  int r = static_cast<int>(svd.s.size());
  if (truncation_rank && *truncation_rank < r) {
    r = *truncation_rank;
  }

  LeverageModel model;
  model.right_singular_vectors = svd.v.leftCols(r);
  model.singular_values = svd.s.head(r);
  model.ridge_lambda = ridge_lambda;
  model.truncation_rank = r;
  model.n1 = x.rows();
  model.p = x.cols();
  model.train_leverages = leverage_of_rows(model, x);
  return model;
}

double leverage_of(const LeverageModel& model, const Vector& x_std) {
  if (x_std.size() != model.p) {
    throw std::invalid_argument("leverage_of: dimension mismatch");
  }
  const Vector t = model.right_singular_vectors.transpose() * x_std;
  double h = 0.0;
  if (model.ridge_lambda > 0.0) {
    for (Eigen::Index j = 0; j < t.size(); ++j) {
      const double s2 = model.singular_values[j] * model.singular_values[j];
      h += t[j] * t[j] / (s2 + model.ridge_lambda);
    }
    const double residual = std::max(0.0, x_std.squaredNorm() - t.squaredNorm());
    h += residual / model.ridge_lambda;
  } else {
    for (Eigen::Index j = 0; j < t.size(); ++j) {
      const double s = model.singular_values[j];
      h += (t[j] / s) * (t[j] / s);
    }
  }
  return h;
}

Vector leverage_of_rows(const LeverageModel& model, const Matrix& rows_std) {
  if (rows_std.cols() != model.p) {
    throw std::invalid_argument("leverage_of: dimension mismatch");
  }
  const Matrix t = rows_std * model.right_singular_vectors;  // n x r
  Vector h(rows_std.rows());
  if (model.ridge_lambda > 0.0) {
    Vector inv = (model.singular_values.array().square() + model.ridge_lambda).inverse();
    h = (t.array().square().rowwise() * inv.transpose().array()).rowwise().sum();
    Vector residual =
        (rows_std.rowwise().squaredNorm() - t.rowwise().squaredNorm()).cwiseMax(0.0);
    h += residual / model.ridge_lambda;
  } else {
    Vector inv = model.singular_values.array().square().inverse();
    h = (t.array().square().rowwise() * inv.transpose().array()).rowwise().sum();
  }
  return h;
}

double feature_leverage(const Matrix& train_features, const Vector& x_features,
                        double ridge_lambda) {
  if (ridge_lambda <= 0.0) {
    throw std::invalid_argument("feature_leverage: ridge_lambda must be > 0");
  }
  if (train_features.cols() != x_features.size()) {
    throw std::invalid_argument("feature_leverage: dimension mismatch");
  }
  ThinSvd svd = thin_svd_dropped(train_features);
  const Vector t = svd.v.transpose() * x_features;
  double h = 0.0;
  for (Eigen::Index j = 0; j < t.size(); ++j) {
    h += t[j] * t[j] / (svd.s[j] * svd.s[j] + ridge_lambda);
  }
  h += std::max(0.0, x_features.squaredNorm() - t.squaredNorm()) / ridge_lambda;
  return h;
}

double interpolated_quantile(Vector values, double q) {
  if (values.size() == 0) {
    throw std::invalid_argument("interpolated_quantile: empty sample");
  }
  std::sort(values.data(), values.data() + values.size());
  const auto n = values.size();
  if (n == 1) return values[0];
  const double pos = q * static_cast<double>(n - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(pos));
  const auto hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

LeverageDiagnostics diagnostics(const LeverageModel& model, const Vector& leverages) {
  if (leverages.size() == 0) {
    throw std::invalid_argument("diagnostics: empty leverage vector");
  }
  LeverageDiagnostics d;
  const auto n = leverages.size();
  d.mean_h = leverages.mean();
  d.max_h = leverages.maxCoeff();
  double sd = 0.0;
  if (n > 1) {
    sd = std::sqrt((leverages.array() - d.mean_h).square().sum() /
                   static_cast<double>(n - 1));
  }
  d.eta_hat = d.mean_h > 0.0 ? sd / d.mean_h : 0.0;
  d.p99_h = interpolated_quantile(leverages, 0.99);
  d.gamma = model.n1 > 0 ? static_cast<double>(model.p) / static_cast<double>(model.n1) : 0.0;
  return d;
}

}  // namespace lwcp
