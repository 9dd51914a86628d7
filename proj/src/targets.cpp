#include "steinflow/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace steinflow {

Vector Target::potential_rows(const Matrix& positions) const {
  Vector out(positions.rows());
  for (Index i = 0; i < positions.rows(); ++i) out(i) = potential(positions.row(i).transpose());
  return out;
}

Matrix Target::gradient_rows(const Matrix& positions) const {
  Matrix out(positions.rows(), positions.cols());
  for (Index i = 0; i < positions.rows(); ++i) out.row(i) = gradient(positions.row(i).transpose()).transpose();
  return out;
}

namespace {

void require_dim(const Vector& x, Index dim) {
  if (x.size() != dim) throw std::invalid_argument("target evaluated at a point of the wrong dimension");
}

// exp(-f) < 1e-12 needs 7.43 standard deviations from the mean.
std::vector<Interval> gaussian_box(const Matrix& covariance, const Vector& mean) {
  std::vector<Interval> box;
  for (Index i = 0; i < mean.size(); ++i) {
    const double half = 8.0 * std::max(1.0, std::sqrt(covariance(i, i)));
    box.push_back({mean(i) - half, mean(i) + half});
  }
  return box;
}

Target make_gaussian(const Matrix& precision, const Matrix& covariance, const Vector& mean) {
  const Index d = mean.size();
  Target t;
  t.name = "gaussian";
  t.dim = d;
  t.potential = [precision, mean](const Vector& x) {
    require_dim(x, mean.size());
    const Vector c = x - mean;
    return 0.5 * c.dot(precision * c);
  };
  t.gradient = [precision, mean](const Vector& x) -> Vector {
    require_dim(x, mean.size());
    return precision * (x - mean);
  };
  const Eigen::LLT<Matrix> llt(precision);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  t.analytic_log_z = 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
  t.quad_box = gaussian_box(covariance, mean);
  return t;
}

void require_spd(const Matrix& m, Index dim, const char* what) {
  if (dim < 1) throw std::invalid_argument("gaussian target mean must be non-empty");
  if (m.rows() != dim || m.cols() != dim) throw std::invalid_argument(std::string(what) + " must be d x d");
  if (!m.isApprox(m.transpose(), 1e-12)) throw std::invalid_argument(std::string(what) + " is not symmetric");
  if (Eigen::LLT<Matrix>(m).info() != Eigen::Success)
    throw std::invalid_argument(std::string(what) + " is not positive definite");
}

}  // namespace

Target gaussian_target(const Matrix& precision, const Vector& mean) {
  require_spd(precision, mean.size(), "gaussian target precision");
  return make_gaussian(precision, precision.inverse(), mean);
}

Target gaussian_target_from_covariance(const Matrix& covariance, const Vector& mean) {
  require_spd(covariance, mean.size(), "gaussian target covariance");
  return make_gaussian(covariance.inverse(), covariance, mean);
}

Target quartic_target() {
  Target t;
  t.name = "quartic";
  t.dim = 2;
  t.potential = [](const Vector& x) {
    require_dim(x, 2);
    return 0.25 * (std::pow(x(0), 4) + std::pow(x(1), 4));
  };
  t.gradient = [](const Vector& x) -> Vector {
    require_dim(x, 2);
    return x.array().cube().matrix();
  };
  t.quad_box = {{-4.0, 4.0}, {-4.0, 4.0}};
  return t;
}

namespace {

constexpr double kBananaPriorScale = 1.0;
constexpr double kBananaNoiseScale = 0.3;
constexpr double kBananaLogArgFloor = 1e-300;

double banana_observation() { return std::log(30.0); }

double banana_arg(const Vector& x) {
  const double r = x(1) - x(0) * x(0);
  return std::max((1.0 - x(0)) * (1.0 - x(0)) + 100.0 * r * r, kBananaLogArgFloor);
}

}  // namespace

Target double_bananas_target() {
  Target t;
  t.name = "double-bananas";
  t.dim = 2;
  t.potential = [](const Vector& x) {
    require_dim(x, 2);
    const double misfit = banana_observation() - std::log(banana_arg(x));
    return x.squaredNorm() / (2.0 * kBananaPriorScale * kBananaPriorScale) +
           misfit * misfit / (2.0 * kBananaNoiseScale * kBananaNoiseScale);
  };
  t.gradient = [](const Vector& x) -> Vector {
    require_dim(x, 2);
    const double u = banana_arg(x);
    const double r = x(1) - x(0) * x(0);
    const double misfit = banana_observation() - std::log(u);
    Vector du(2);
    du << -2.0 * (1.0 - x(0)) - 400.0 * x(0) * r, 200.0 * r;
    return x / (kBananaPriorScale * kBananaPriorScale) -
           (misfit / (kBananaNoiseScale * kBananaNoiseScale * u)) * du;
  };
  // The mass follows u = 30 out to |x1| ~ 2.7, x2 ~ 7.5 before the prior
  // pushes exp(-f) below 1e-12.
  t.quad_box = {{-4.0, 4.0}, {-3.0, 12.0}};
  return t;
}

double log_normalizer(const Target& target, int grid_points_per_dim) {
  if (target.analytic_log_z) return *target.analytic_log_z;
  if (target.dim != 2 || target.quad_box.size() != 2)
    throw std::invalid_argument("numerical normalisation is only available in two dimensions");
  if (grid_points_per_dim < kMinGridPointsPerDim)
    throw std::invalid_argument("quadrature grid needs at least 16 points per dimension");

  const auto& bx = target.quad_box[0];
  const auto& by = target.quad_box[1];
  if (!(bx.hi > bx.lo) || !(by.hi > by.lo) || !std::isfinite(bx.lo) || !std::isfinite(bx.hi) ||
      !std::isfinite(by.lo) || !std::isfinite(by.hi))
    throw std::invalid_argument("quadrature box must be finite and non-empty");

  const int m = grid_points_per_dim;
  const double hx = (bx.hi - bx.lo) / (m - 1);
  const double hy = (by.hi - by.lo) / (m - 1);
  auto log_weight = [m](int i) { return (i == 0 || i == m - 1) ? std::log(0.5) : 0.0; };

  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
  Vector x(2);
  for (int i = 0; i < m; ++i) {
    x(0) = bx.lo + i * hx;
    for (int j = 0; j < m; ++j) {
      x(1) = by.lo + j * hy;
      terms.push_back(-target.potential(x) + log_weight(i) + log_weight(j));
    }
  }
  const double peak = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double v : terms) sum += std::exp(v - peak);
  return std::log(hx * hy) + peak + std::log(sum);
}

}  // namespace steinflow
