#include "steinflow/asvgd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace steinflow {

void AsvgdConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("asvgd: tau must be positive");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw std::invalid_argument("asvgd: eps must be non-negative");
  if (const auto* c = std::get_if<ConstantDamping>(&damping); c && !(c->beta > 0.0 && c->beta < 1.0))
    throw std::invalid_argument("asvgd: constant damping beta must lie in (0, 1)");
}

void position_step(Ensemble& e, double tau) {
  e.prev_positions = e.positions;
  e.positions += std::sqrt(tau) * e.momenta;
}

DensityMomentumSolve density_momentum_update(const Matrix& momenta, const Matrix& kernel, double eps) {
  const Index n = momenta.rows();
  if (kernel.rows() != n || kernel.cols() != n)
    throw std::invalid_argument("kernel matrix must be N x N with N the number of particles");

  Matrix system = kernel;
  system.diagonal().array() += eps;
  const Matrix rhs = static_cast<double>(n) * momenta;

  const Eigen::LLT<Matrix> llt(system);
  const auto advise = [eps](const char* what) {
    std::ostringstream msg;
    msg << what << " for K + eps I with eps = " << eps
        << "; coincident particles make K singular, use eps > 0 (Wasserstein regularisation)";
    return msg.str();
  };
  if (llt.info() != Eigen::Success) throw std::runtime_error(advise("Cholesky factorisation failed"));

  DensityMomentumSolve out;
  out.density_momenta = llt.solve(rhs);
  out.residual = (system * out.density_momenta - rhs).norm();
  out.bound = 1e-8 * std::max(1.0, rhs.norm());
  if (!(out.residual <= out.bound)) throw std::runtime_error(advise("solve residual exceeds its bound"));
  return out;
}

std::size_t speed_restart(std::span<int> counts, const Matrix& next, const Matrix& current,
                          const Matrix& previous) {
  std::size_t resets = 0;
  for (Index i = 0; i < next.rows(); ++i) {
    const double now = (next.row(i) - current.row(i)).norm();
    const double before = (current.row(i) - previous.row(i)).norm();
    auto& c = counts[static_cast<std::size_t>(i)];
    if (now < before) {
      c = 1;
      ++resets;
    } else {
      ++c;
    }
  }
  return resets;
}

double gradient_restart_stat(const Matrix& kernel, const Matrix& density_momenta, const Matrix& grad,
                             const Matrix& positions) {
  const Vector row_sums = kernel.rowwise().sum();
  const Matrix inner = kernel * grad + kernel * positions - row_sums.asDiagonal() * positions;
  return (density_momenta.array() * inner.array()).sum();
}

bool gradient_restart_triggered(double stat, GradientRestartRule rule) {
  return rule == GradientRestartRule::AsPrinted ? stat < 0.0 : stat > 0.0;
}

Vector damping_values(std::span<const int> counts, const Damping& mode) {
  Vector alpha(static_cast<Index>(counts.size()));
  if (const auto* c = std::get_if<ConstantDamping>(&mode)) {
    alpha.setConstant(c->beta);
    return alpha;
  }
  for (std::size_t i = 0; i < counts.size(); ++i)
    alpha(static_cast<Index>(i)) = (counts[i] - 1.0) / (counts[i] + 2.0);
  return alpha;
}

Matrix momentum_step_bilinear(const Matrix& momenta, const Matrix& kernel, const Matrix& grad,
                              const Matrix& positions, const Matrix& a, const Matrix& v_next,
                              const Matrix& v_lag, double tau, const Vector& alpha) {
  const double n = static_cast<double>(positions.rows());
  const double root_tau = std::sqrt(tau);
  const double trace = (v_next.array() * (kernel * v_lag).array()).sum();
  const double scale = 1.0 + trace / (n * n);
  return alpha.asDiagonal() * momenta - (root_tau / n) * (kernel * grad) + (root_tau * scale) * (positions * a);
}

Matrix momentum_step_gaussian(const Matrix& momenta, const Matrix& kernel, const Matrix& grad,
                              const Matrix& positions, const Matrix& v_next, double sigma2, double tau,
                              const Vector& alpha, GaussianInteraction mode) {
  const double n = static_cast<double>(positions.rows());
  const double root_tau = std::sqrt(tau);
  // K (V V^T) is formed as (K V) V^T to stay O(N^2 d).
  const Matrix kvv = (kernel * v_next) * v_next.transpose();
  const Matrix w = n * kernel + kvv.cwiseProduct(kernel) - kernel.cwiseProduct(kvv);
  const Vector w_rows = w.rowwise().sum();
  const Matrix interaction = w_rows.asDiagonal() * positions - w * positions;
  const double denominator = (mode == GaussianInteraction::AsPrinted ? 2.0 : 1.0) * n * n * sigma2;
  return alpha.asDiagonal() * momenta - (root_tau / n) * (kernel * grad) + (root_tau / denominator) * interaction;
}

AsvgdSampler::AsvgdSampler(AsvgdConfig config, const Target& target, Ensemble initial)
    : config_(std::move(config)), target_(target), state_(std::move(initial)) {
  config_.validate();
  state_.validate();
  if (target_.dim != state_.dim()) throw std::invalid_argument("asvgd: ensemble and target dimensions differ");
  validate_kernel(config_.kernel, state_.dim());
}

StepStats AsvgdSampler::step() {
  Ensemble& e = state_;
  const std::size_t k = e.step_index + 1;
  const Index n = e.size();

  const Matrix lagged = e.prev_positions;
  position_step(e, config_.tau);
  if (!e.positions.allFinite()) throw NumericalAbort(k, "non-finite particle positions");

  const Matrix kernel = kernel_matrix(config_.kernel, e.positions);
  DensityMomentumSolve solve;
  try {
    solve = density_momentum_update(e.momenta, kernel, config_.eps);
  } catch (const std::runtime_error& err) {
    throw NumericalAbort(k, err.what());
  }
  const Matrix grad = target_.gradient_rows(e.positions);

  StepStats stats;
  stats.step = k;
  stats.solve_residual = solve.residual;
  stats.solve_bound = solve.bound;

  if (std::holds_alternative<AdaptiveRestart>(config_.damping)) {
    std::size_t resets = speed_restart(e.restart_counts, e.positions, e.prev_positions, lagged);
    if (is_gaussian(config_.kernel) &&
        gradient_restart_triggered(gradient_restart_stat(kernel, solve.density_momenta, grad, e.positions),
                                   config_.restart_rule)) {
      std::fill(e.restart_counts.begin(), e.restart_counts.end(), 1);
      stats.gradient_restart = true;
      resets = static_cast<std::size_t>(n);
    }
    stats.restart_fraction = static_cast<double>(resets) / static_cast<double>(n);
  }
  const Vector alpha = damping_values(e.restart_counts, config_.damping);
  stats.alpha_mean = alpha.mean();

  Matrix next_momenta;
  if (const auto* bilinear = std::get_if<BilinearKernel>(&config_.kernel)) {
    const Matrix& v_lag =
        config_.trace_lag == BilinearTraceLag::Mixed ? e.density_momenta : solve.density_momenta;
    next_momenta = momentum_step_bilinear(e.momenta, kernel, grad, e.positions, bilinear->a,
                                          solve.density_momenta, v_lag, config_.tau, alpha);
  } else {
    const double sigma2 = std::get<GaussianKernel>(config_.kernel).sigma2;
    next_momenta = momentum_step_gaussian(e.momenta, kernel, grad, e.positions, solve.density_momenta, sigma2,
                                          config_.tau, alpha, config_.gaussian_interaction);
  }
  if (!next_momenta.allFinite() || !solve.density_momenta.allFinite())
    throw NumericalAbort(k, "non-finite momenta");

  e.momenta = std::move(next_momenta);
  e.density_momenta = std::move(solve.density_momenta);
  e.step_index = k;
  return stats;
}

RunRecord asvgd_run(const AsvgdConfig& config, const Target& target, const InitSpec& init, const StepHook& hook) {
  AsvgdSampler sampler(config, target, init_ensemble(init));
  return run_sampler(sampler, config.steps, hook);
}

}  // namespace steinflow
