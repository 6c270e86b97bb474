#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "lwcp/predictors.hpp"
#include "lwcp/rng.hpp"

using lwcp::Matrix;
using lwcp::Vector;

namespace {

Matrix random_matrix(lwcp::Rng& rng, int n, int p) {
  Matrix m(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) m(i, j) = rng.normal();
  }
  return m;
}

Matrix centered(lwcp::Rng& rng, int n, int p) {
  Matrix m = random_matrix(rng, n, p);
  m.rowwise() -= m.colwise().mean();
  return m;
}

}  // namespace

TEST_SUITE("predictors") {
  TEST_CASE("ols interpolates noiseless linear data") {
    lwcp::Rng rng(31);
    const Matrix x = centered(rng, 50, 4);
    Vector beta(4);
    beta << 1.0, -2.0, 0.5, 3.0;
    const Vector y = x * beta;
    const auto model = lwcp::fit_ols(x, y);
    CHECK((model.coefficients - beta).norm() < 1e-8);
    CHECK(std::abs(model.intercept) < 1e-10);
  }

  TEST_CASE("ols on constant targets returns the constant") {
    lwcp::Rng rng(32);
    const Matrix x = centered(rng, 40, 3);
    const auto model = lwcp::fit_ols(x, Vector::Constant(40, 7.25));
    CHECK(model.intercept == doctest::Approx(7.25));
    CHECK(model.coefficients.norm() < 1e-8);
  }

  TEST_CASE("ols error norm shrinks like the root sample size") {
    const int reps = 50;
    double norm_small = 0.0, norm_large = 0.0;
    Vector beta = Vector::Constant(30, 1.0 / std::sqrt(30.0));
    for (int rep = 0; rep < reps; ++rep) {
      lwcp::Rng rng(lwcp::derive_rep_seed(33, static_cast<std::uint64_t>(rep)));
      for (int n1 : {300, 1200}) {
        const Matrix x = centered(rng, n1, 30);
        Vector y = x * beta;
        for (int i = 0; i < n1; ++i) y[i] += rng.normal();
        const double err = (lwcp::fit_ols(x, y).coefficients - beta).norm();
        (n1 == 300 ? norm_small : norm_large) += err;
      }
    }
    const double ratio = norm_small / norm_large;
    CHECK(ratio > 1.4);  // 2.0 +- 30%
    CHECK(ratio < 2.6);
  }

  TEST_CASE("ols rejects underdetermined or rank-deficient designs") {
    lwcp::Rng rng(34);
    const Matrix wide = random_matrix(rng, 5, 8);
    CHECK_THROWS_WITH_AS(static_cast<void>(lwcp::fit_ols(wide, Vector::Zero(5))),
                         doctest::Contains("fit_ridge"), std::invalid_argument);
    Matrix rank1 = Matrix::Zero(20, 3);
    rank1.col(0) = random_matrix(rng, 20, 1);
    rank1.col(1) = 2.0 * rank1.col(0);
    rank1.col(2) = -rank1.col(0);
    CHECK_THROWS_WITH_AS(static_cast<void>(lwcp::fit_ols(rank1, Vector::Zero(20))),
                         doctest::Contains("fit_ridge"), std::invalid_argument);
  }

  TEST_CASE("ridge at tiny lambda matches ols, at huge lambda vanishes") {
    lwcp::Rng rng(35);
    const Matrix x = centered(rng, 60, 5);
    Vector y = x * Vector::Constant(5, 1.0);
    for (int i = 0; i < 60; ++i) y[i] += 0.1 * rng.normal();
    const auto ols = lwcp::fit_ols(x, y);
    const auto almost = lwcp::fit_ridge(x, y, 1e-8);
    CHECK((almost.coefficients - ols.coefficients).norm() < 1e-6);
    CHECK(lwcp::fit_ridge(x, y, 1e12).coefficients.norm() < 1e-6);
    CHECK_THROWS_AS(static_cast<void>(lwcp::fit_ridge(x, y, 0.0)), std::invalid_argument);
  }

  TEST_CASE("ridge matches the dense normal-equations solve when p = 2 n1") {
    lwcp::Rng rng(36);
    const int n1 = 20, p = 40;
    const Matrix x = centered(rng, n1, p);
    const Vector y = random_matrix(rng, n1, 1);
    const double lambda = 0.8;
    const auto model = lwcp::fit_ridge(x, y, lambda);
    CHECK(model.coefficients.allFinite());

    Matrix gram = x.transpose() * x;
    gram.diagonal().array() += lambda;
    const Vector dense = gram.ldlt().solve(x.transpose() * Vector(y.array() - y.mean()));
    CHECK((model.coefficients - dense).norm() < 1e-8 * (1.0 + dense.norm()));
  }

  TEST_CASE("predict is the affine form") {
    lwcp::LinearModel model;
    model.coefficients = Vector::Zero(3);
    model.coefficients << 1.0, 2.0, -1.0;
    model.intercept = 0.5;
    CHECK(lwcp::predict(model, Vector::Zero(3)) == 0.5);
    CHECK(lwcp::predict(model, Vector::Unit(3, 1)) == doctest::Approx(2.5));
    lwcp::Rng rng(37);
    const Vector x = random_matrix(rng, 1, 3).row(0);
    CHECK(lwcp::predict(model, x) ==
          doctest::Approx(0.5 + 1.0 * x[0] + 2.0 * x[1] - 1.0 * x[2]));
    CHECK_THROWS_AS(lwcp::predict(model, Vector::Zero(4)), std::invalid_argument);
  }

  TEST_CASE("ols residuals are orthogonal to the design") {
    lwcp::Rng rng(38);
    const Matrix x = centered(rng, 200, 6);
    Vector y = x * Vector::Constant(6, 0.4);
    for (int i = 0; i < 200; ++i) y[i] += rng.normal();
    const auto model = lwcp::fit_ols(x, y);
    const Vector resid = y - lwcp::predict_rows(model, x);
    CHECK((x.transpose() * resid).cwiseAbs().maxCoeff() < 1e-6);
  }

  TEST_CASE("ridge shrinks monotonically in lambda") {
    lwcp::Rng rng(39);
    const Matrix x = centered(rng, 80, 6);
    Vector y = x * Vector::Constant(6, 1.0);
    for (int i = 0; i < 80; ++i) y[i] += rng.normal();
    double prev = lwcp::fit_ridge(x, y, 0.01).coefficients.norm();
    for (double lambda : {0.1, 1.0, 10.0, 100.0}) {
      const double cur = lwcp::fit_ridge(x, y, lambda).coefficients.norm();
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
  }

  TEST_CASE("scale estimator reproduces a constant residual field") {
    lwcp::Rng rng(40);
    const Matrix x = random_matrix(rng, 60, 3);
    const auto est = lwcp::fit_scale_estimator(x, Vector::Constant(60, 2.5), 10, 6, 5, 41);
    for (int i = 0; i < 10; ++i) {
      CHECK(lwcp::predict_scale(est, random_matrix(rng, 1, 3).row(0)) ==
            doctest::Approx(2.5));
    }
  }

  TEST_CASE("scale estimator beats the constant predictor on |x|") {
    const int n = 400;
    Matrix x(n, 1);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = -2.0 + 4.0 * static_cast<double>(i) / (n - 1);
      y[i] = std::abs(x(i, 0));
    }
    const auto est = lwcp::fit_scale_estimator(x, y, 10, 6, 5, 42);
    double mse = 0.0;
    for (int i = 0; i < n; ++i) {
      const double pred = lwcp::predict_scale(est, x.row(i).transpose());
      mse += (pred - y[i]) * (pred - y[i]);
    }
    mse /= n;
    const double variance = (y.array() - y.mean()).square().mean();
    CHECK(mse < variance);
    CHECK(mse < 0.05);  // a depth-6 tree resolves |x| on a grid quite well
  }

  TEST_CASE("depth zero gives the mean of bootstrap means") {
    lwcp::Rng rng(43);
    const Matrix x = random_matrix(rng, 300, 2);
    Vector y(300);
    for (int i = 0; i < 300; ++i) y[i] = std::abs(rng.normal());
    const auto est = lwcp::fit_scale_estimator(x, y, 10, 0, 5, 44);
    const double pred = lwcp::predict_scale(est, Vector::Zero(2));
    const double sd = std::sqrt((y.array() - y.mean()).square().mean());
    CHECK(std::abs(pred - y.mean()) < 0.2 * sd);
  }

  TEST_CASE("scale estimator is deterministic in the seed") {
    lwcp::Rng rng(45);
    const Matrix x = random_matrix(rng, 100, 4);
    Vector y(100);
    for (int i = 0; i < 100; ++i) y[i] = std::abs(rng.normal());
    const auto a = lwcp::fit_scale_estimator(x, y, 10, 6, 5, 46);
    const auto b = lwcp::fit_scale_estimator(x, y, 10, 6, 5, 46);
    const auto c = lwcp::fit_scale_estimator(x, y, 10, 6, 5, 47);
    bool any_diff_c = false;
    for (int i = 0; i < 20; ++i) {
      const Vector q = random_matrix(rng, 1, 4).row(0);
      CHECK(lwcp::predict_scale(a, q) == lwcp::predict_scale(b, q));
      any_diff_c |= lwcp::predict_scale(a, q) != lwcp::predict_scale(c, q);
    }
    CHECK(any_diff_c);
  }

  TEST_CASE("prediction floor binds on all-zero residuals") {
    lwcp::Rng rng(48);
    const Matrix x = random_matrix(rng, 50, 2);
    const auto est = lwcp::fit_scale_estimator(x, Vector::Zero(50), 10, 6, 5, 49);
    const double pred = lwcp::predict_scale(est, Vector::Zero(2));
    CHECK(pred == est.floor);
    CHECK(pred > 0.0);
  }

  TEST_CASE("tiny samples degrade to the global mean") {
    Matrix x(4, 2);
    x << 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0;
    Vector y(4);
    y << 1.0, 2.0, 3.0, 4.0;
    const auto est = lwcp::fit_scale_estimator(x, y, 5, 6, 5, 50);
    CHECK(lwcp::predict_scale(est, Vector::Zero(2)) == doctest::Approx(2.5));
  }

  TEST_CASE("scale estimator input validation") {
    Matrix x(3, 1);
    x << 1.0, 2.0, 3.0;
    Vector bad(3);
    bad << 1.0, -0.5, 2.0;
    CHECK_THROWS_AS(lwcp::fit_scale_estimator(x, bad), std::invalid_argument);
    CHECK_THROWS_AS(lwcp::fit_scale_estimator(x, Vector::Ones(2)), std::invalid_argument);
  }
}
