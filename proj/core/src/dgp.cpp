#include "lwcp/dgp.hpp"

#include <cmath>
#include <stdexcept>

namespace lwcp {

std::string family_name(DgpFamily f) {
  switch (f) {
    case DgpFamily::textbook: return "textbook";
    case DgpFamily::heavy_tailed: return "heavy_tailed";
    case DgpFamily::polynomial: return "polynomial";
    case DgpFamily::homoscedastic: return "homoscedastic";
    case DgpFamily::adversarial: return "adversarial";
    case DgpFamily::nonlinear_sin: return "nonlinear_sin";
    case DgpFamily::gaussian_recovery: return "gaussian_recovery";
  }
  return "?";
}

DgpFamily family_from_name(const std::string& name) {
  if (name == "textbook") return DgpFamily::textbook;
  if (name == "heavy_tailed") return DgpFamily::heavy_tailed;
  if (name == "polynomial") return DgpFamily::polynomial;
  if (name == "homoscedastic") return DgpFamily::homoscedastic;
  if (name == "adversarial") return DgpFamily::adversarial;
  if (name == "nonlinear_sin") return DgpFamily::nonlinear_sin;
  if (name == "gaussian_recovery") return DgpFamily::gaussian_recovery;
  throw std::invalid_argument("unknown DGP family: " + name);
}

namespace {

// X rows ~ N(0, diag(1, 1/2, ..., 1/p)).
Matrix draw_decaying_gaussian(Rng& rng, int n, int p) {
  Matrix x(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      x(i, j) = rng.normal() / std::sqrt(static_cast<double>(j + 1));
    }
  }
  return x;
}

Matrix draw_isotropic_gaussian(Rng& rng, int n, int p) {
  Matrix x(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
  }
  return x;
}

// One latent u per row expanded to (u, u^2, ..., u^8); remaining columns iid
// standard normal. The latent is uniform on [-sqrt(3), sqrt(3)] (unit
// variance): a bounded latent keeps the leverage of fresh points bounded,
// which an eighth power of a Gaussian draw does not.
Matrix draw_polynomial(Rng& rng, int n, int p) {
  const double half_width = std::sqrt(3.0);
  Matrix x(n, p);
  for (int i = 0; i < n; ++i) {
    const double u = (2.0 * rng.uniform01() - 1.0) * half_width;
    double power = 1.0;
    for (int j = 0; j < 8; ++j) {
      power *= u;
      x(i, j) = power;
    }
    for (int j = 8; j < p; ++j) x(i, j) = rng.normal();
  }
  return x;
}

bool uses_leverage_noise(DgpFamily f) {
  return f == DgpFamily::textbook || f == DgpFamily::heavy_tailed ||
         f == DgpFamily::polynomial;
}

// Unit-variance innovation; t3 draws are rescaled by 1/sqrt(3).
double innovation(Rng& rng, DgpFamily f) {
  if (f == DgpFamily::heavy_tailed) return rng.student_t3() / std::sqrt(3.0);
  return rng.normal();
}

}  // namespace

GeneratedData generate(const DgpSpec& spec) {
  if (spec.n1 < 1 || spec.n2 < 1 || spec.n_test < 1 || spec.p < 1) {
    throw std::invalid_argument("generate: sizes must be positive");
  }
  if (!(spec.sigma > 0.0)) {
    throw std::invalid_argument("generate: sigma must be > 0");
  }
  if (spec.family == DgpFamily::polynomial && spec.p < 8) {
    throw std::invalid_argument("generate: polynomial family requires p >= 8");
  }
  if (spec.family == DgpFamily::gaussian_recovery && spec.p != 5) {
    throw std::invalid_argument("generate: gaussian_recovery uses p = 5");
  }

  Rng rng(spec.seed);
  GeneratedData d;

  switch (spec.family) {
    case DgpFamily::polynomial:
      d.train_x = draw_polynomial(rng, spec.n1, spec.p);
      d.calib_x = draw_polynomial(rng, spec.n2, spec.p);
      d.test_x = draw_polynomial(rng, spec.n_test, spec.p);
      break;
    case DgpFamily::gaussian_recovery:
      d.train_x = draw_isotropic_gaussian(rng, spec.n1, spec.p);
      d.calib_x = draw_isotropic_gaussian(rng, spec.n2, spec.p);
      d.test_x = draw_isotropic_gaussian(rng, spec.n_test, spec.p);
      break;
    default:
      d.train_x = draw_decaying_gaussian(rng, spec.n1, spec.p);
      d.calib_x = draw_decaying_gaussian(rng, spec.n2, spec.p);
      d.test_x = draw_decaying_gaussian(rng, spec.n_test, spec.p);
      break;
  }

  // Signal: Y = X beta* with beta* = ones/sqrt(p), except the sine family.
  Vector signal_train, signal_calib, signal_test;
  if (spec.family == DgpFamily::nonlinear_sin) {
    signal_train = d.train_x.array().sin().rowwise().sum();
    signal_calib = d.calib_x.array().sin().rowwise().sum();
    signal_test = d.test_x.array().sin().rowwise().sum();
  } else {
    const Vector beta = Vector::Constant(spec.p, 1.0 / std::sqrt(static_cast<double>(spec.p)));
    signal_train = d.train_x * beta;
    signal_calib = d.calib_x * beta;
    signal_test = d.test_x * beta;
  }

  // Conditional noise SD per point.
  Vector sd_train, sd_calib, sd_test;
  if (uses_leverage_noise(spec.family)) {
    const StandardizedDesign std_design = fit_standardizer(d.train_x);
    const LeverageModel lev = fit_leverage(std_design, spec.leverage_ridge_lambda);
    const Vector h_train = lev.train_leverages;
    const Vector h_calib = leverage_of_rows(lev, apply_standardizer_rows(std_design, d.calib_x));
    const Vector h_test = leverage_of_rows(lev, apply_standardizer_rows(std_design, d.test_x));
    sd_train = spec.sigma * (1.0 + h_train.array()).sqrt();
    sd_calib = spec.sigma * (1.0 + h_calib.array()).sqrt();
    sd_test = spec.sigma * (1.0 + h_test.array()).sqrt();
  } else if (spec.family == DgpFamily::adversarial) {
    const StandardizedDesign std_design = fit_standardizer(d.train_x);
    const double p = static_cast<double>(spec.p);
    auto adversarial_sd = [&](const Matrix& rows) -> Vector {
      const Matrix rows_std = apply_standardizer_rows(std_design, rows);
      return spec.sigma *
             ((1.0 + rows_std.rowwise().squaredNorm().array() / p) / 2.0).sqrt();
    };
    sd_train = adversarial_sd(d.train_x);
    sd_calib = adversarial_sd(d.calib_x);
    sd_test = adversarial_sd(d.test_x);
  } else {
    sd_train = Vector::Constant(spec.n1, spec.sigma);
    sd_calib = Vector::Constant(spec.n2, spec.sigma);
    sd_test = Vector::Constant(spec.n_test, spec.sigma);
  }

  auto add_noise = [&](const Vector& signal, const Vector& sd) -> Vector {
    Vector y(signal.size());
    for (Eigen::Index i = 0; i < signal.size(); ++i) {
      y[i] = signal[i] + sd[i] * innovation(rng, spec.family);
    }
    return y;
  };
  d.train_y = add_noise(signal_train, sd_train);
  d.calib_y = add_noise(signal_calib, sd_calib);
  d.test_y = add_noise(signal_test, sd_test);
  d.true_sigma_of_x = sd_test;
  return d;
}

}  // namespace lwcp
