#pragma once

#include <cstddef>

#include "steinflow/ensemble.hpp"
#include "steinflow/sampler.hpp"
#include "steinflow/targets.hpp"

namespace steinflow {

// log of (1/N) sum_i N(query; X_i, h^2 I), evaluated with log-sum-exp.
double kde_log_density(const Matrix& particles, double bandwidth, const Vector& query);

// Plug-in estimate (1/N) sum_i [log rho_h(X_i) + f(X_i) + log Z] of KL(rho || pi),
// with rho_h the Gaussian KDE of the particles themselves.
double kl_estimate(const Matrix& particles, const Target& target, double bandwidth, double log_z);

inline constexpr double kMinBandwidth = 1e-6;

struct Bandwidth {
  double h = 0.0;
  bool degenerate = false;  // floored at kMinBandwidth
};

// Silverman's rule h = s (4 / ((d + 2) N))^(1 / (d + 4)), s the mean
// per-coordinate sample standard deviation.
Bandwidth silverman_bandwidth(const Matrix& particles);

struct StepRecord {
  std::size_t step = 0;
  double kl_estimate = 0.0;
  Vector mean;
  double cov_trace = 0.0;
  double restart_fraction = 0.0;
  double alpha_mean = 0.0;
};

// kl_estimate is NaN for a single particle, where no density estimate exists.
StepRecord make_step_record(const Ensemble& e, const StepStats& stats, const Target& target, double log_z);

}  // namespace steinflow
