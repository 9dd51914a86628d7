#include "steinflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace steinflow {

double kde_log_density(const Matrix& particles, double bandwidth, const Vector& query) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kde bandwidth must be positive");
  const Index n = particles.rows();
  const Index d = particles.cols();
  if (n < 2) throw std::invalid_argument("kde needs at least two particles");
  if (query.size() != d) throw std::invalid_argument("kde query has the wrong dimension");

  const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  Vector exponents(n);
  for (Index i = 0; i < n; ++i) exponents(i) = -(particles.row(i).transpose() - query).squaredNorm() * inv_two_h2;
  const double peak = exponents.maxCoeff();
  const double sum = (exponents.array() - peak).exp().sum();
  const double log_norm = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * bandwidth * bandwidth);
  return peak + std::log(sum) - std::log(static_cast<double>(n)) + log_norm;
}

double kl_estimate(const Matrix& particles, const Target& target, double bandwidth, double log_z) {
  const Index n = particles.rows();
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Vector x = particles.row(i).transpose();
    total += kde_log_density(particles, bandwidth, x) + target.potential(x) + log_z;
  }
  return total / static_cast<double>(n);
}

Bandwidth silverman_bandwidth(const Matrix& particles) {
  const Index n = particles.rows();
  const Index d = particles.cols();
  if (n < 2) throw std::invalid_argument("silverman bandwidth needs at least two particles");
  const Matrix centered = particles.rowwise() - particles.colwise().mean();
  const Vector sd = (centered.colwise().squaredNorm() / static_cast<double>(n - 1)).array().sqrt().transpose();
  const double spread = sd.mean();
  const double factor =
      std::pow(4.0 / (static_cast<double>(d + 2) * static_cast<double>(n)), 1.0 / static_cast<double>(d + 4));
  Bandwidth out{spread * factor, false};
  if (!(out.h >= kMinBandwidth)) {
    out.h = kMinBandwidth;
    out.degenerate = true;
  }
  return out;
}

StepRecord make_step_record(const Ensemble& e, const StepStats& stats, const Target& target, double log_z) {
  const MeanCov mc = sample_mean_cov(e);
  StepRecord r;
  r.step = e.step_index;
  r.mean = mc.mean;
  r.cov_trace = mc.covariance.trace();
  r.restart_fraction = stats.restart_fraction;
  r.alpha_mean = stats.alpha_mean;
  r.kl_estimate = e.size() < 2 ? std::numeric_limits<double>::quiet_NaN()
                              : kl_estimate(e.positions, target, silverman_bandwidth(e.positions).h, log_z);
  return r;
}

}  // namespace steinflow
