#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "steinflow/types.hpp"

namespace steinflow {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Target density pi proportional to exp(-f).
struct Target {
  std::string name;
  Index dim = 0;
  std::function<double(const Vector&)> potential;
  std::function<Vector(const Vector&)> gradient;
  std::optional<double> analytic_log_z;
  std::vector<Interval> quad_box;

  // Row-wise evaluation over an N x d particle matrix.
  Vector potential_rows(const Matrix& positions) const;
  Matrix gradient_rows(const Matrix& positions) const;
};

// f(x) = 1/2 (x - mean)^T Q (x - mean) with Q the precision matrix.
Target gaussian_target(const Matrix& precision, const Vector& mean);

// Same target parameterised by its covariance (Q = covariance^-1).
Target gaussian_target_from_covariance(const Matrix& covariance, const Vector& mean);

// f(x, y) = (x^4 + y^4) / 4.
Target quartic_target();

// Two-mode banana posterior: standard normal prior and a Rosenbrock-type
// log observation model,
//   f(x) = |x|^2 / 2 + (y_obs - log u(x))^2 / (2 s^2),
//   u(x) = (1 - x1)^2 + 100 (x2 - x1^2)^2,  y_obs = log 30,  s = 0.3.
Target double_bananas_target();

inline constexpr int kMinGridPointsPerDim = 16;

// log of the integral of exp(-f) over the target's quadrature box (2-D only),
// by the trapezoidal rule in log-sum-exp form. Returns analytic_log_z when set.
double log_normalizer(const Target& target, int grid_points_per_dim);

}  // namespace steinflow
