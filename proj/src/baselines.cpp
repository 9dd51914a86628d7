#include "steinflow/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace steinflow {

void BaselineConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("baseline: tau must be positive");
  if (!(friction > 0.0) || !std::isfinite(friction)) throw std::invalid_argument("baseline: friction must be positive");
}

Matrix svgd_step(const Matrix& positions, const KernelSpec& kernel, const Target& target, double tau) {
  const double n = static_cast<double>(positions.rows());
  const Matrix k = kernel_matrix(kernel, positions);
  const Matrix drive = -(k * target.gradient_rows(positions)) + kernel_grad1_row_sums(kernel, positions, k);
  return positions + (tau / n) * drive;
}

Matrix ula_step(const Matrix& positions, const Target& target, double tau, Rng& rng) {
  const Matrix noise = rng.normal_matrix(positions.rows(), positions.cols());
  return positions - tau * target.gradient_rows(positions) + std::sqrt(2.0 * tau) * noise;
}

double mala_log_accept_ratio(const Target& target, const Vector& x, const Vector& proposal, double tau) {
  auto log_q = [&](const Vector& to, const Vector& from) {
    return -(to - from + tau * target.gradient(from)).squaredNorm() / (4.0 * tau);
  };
  return -target.potential(proposal) + target.potential(x) + log_q(x, proposal) - log_q(proposal, x);
}

MalaStep mala_step(const Matrix& positions, const Target& target, double tau, Rng& rng) {
  const Index n = positions.rows();
  const Matrix noise = rng.normal_matrix(n, positions.cols());
  Vector uniforms(n);
  for (Index i = 0; i < n; ++i) uniforms(i) = rng.uniform();

  MalaStep out{positions, 0};
  const double noise_scale = std::sqrt(2.0 * tau);
  for (Index i = 0; i < n; ++i) {
    const Vector x = positions.row(i).transpose();
    const Vector proposal = x - tau * target.gradient(x) + noise_scale * noise.row(i).transpose();
    const double log_ratio = mala_log_accept_ratio(target, x, proposal, tau);
    if (std::log(uniforms(i)) < log_ratio) {
      out.positions.row(i) = proposal.transpose();
      ++out.accepted;
    }
  }
  return out;
}

UldState uld_step(const Matrix& positions, const Matrix& velocities, const Target& target, double tau,
                  double gamma, Rng& rng) {
  UldState out;
  out.positions = positions + tau * velocities;
  const Matrix noise = rng.normal_matrix(positions.rows(), positions.cols());
  out.velocities = velocities - tau * (target.gradient_rows(out.positions) + gamma * velocities) +
                   std::sqrt(2.0 * gamma * tau) * noise;
  return out;
}

namespace {

void check_setup(const BaselineConfig& config, const Target& target, const Ensemble& e) {
  config.validate();
  e.validate();
  if (target.dim != e.dim()) throw std::invalid_argument("baseline: ensemble and target dimensions differ");
}

void advance(Ensemble& e, Matrix next_positions) {
  const std::size_t k = e.step_index + 1;
  if (!next_positions.allFinite()) throw NumericalAbort(k, "non-finite particle positions");
  e.prev_positions = std::move(e.positions);
  e.positions = std::move(next_positions);
  e.step_index = k;
}

}  // namespace

SvgdSampler::SvgdSampler(BaselineConfig config, Target target, Ensemble initial)
    : config_(std::move(config)), target_(std::move(target)), state_(std::move(initial)) {
  check_setup(config_, target_, state_);
  if (!config_.kernel) throw std::invalid_argument("svgd: a kernel is required");
  validate_kernel(*config_.kernel, state_.dim());
}

StepStats SvgdSampler::step() {
  advance(state_, svgd_step(state_.positions, *config_.kernel, target_, config_.tau));
  return {.step = state_.step_index};
}

UlaSampler::UlaSampler(BaselineConfig config, Target target, Ensemble initial)
    : config_(std::move(config)),
      target_(std::move(target)),
      state_(std::move(initial)),
      rng_(config_.seed, Rng::kNoiseStream) {
  check_setup(config_, target_, state_);
}

StepStats UlaSampler::step() {
  advance(state_, ula_step(state_.positions, target_, config_.tau, rng_));
  return {.step = state_.step_index};
}

MalaSampler::MalaSampler(BaselineConfig config, Target target, Ensemble initial)
    : config_(std::move(config)),
      target_(std::move(target)),
      state_(std::move(initial)),
      rng_(config_.seed, Rng::kNoiseStream) {
  check_setup(config_, target_, state_);
}

StepStats MalaSampler::step() {
  MalaStep move = mala_step(state_.positions, target_, config_.tau, rng_);
  advance(state_, std::move(move.positions));
  StepStats stats{.step = state_.step_index};
  stats.acceptance_rate = static_cast<double>(move.accepted) / static_cast<double>(state_.size());
  return stats;
}

UldSampler::UldSampler(BaselineConfig config, Target target, Ensemble initial)
    : config_(std::move(config)),
      target_(std::move(target)),
      state_(std::move(initial)),
      rng_(config_.seed, Rng::kNoiseStream) {
  check_setup(config_, target_, state_);
}

StepStats UldSampler::step() {
  UldState next = uld_step(state_.positions, state_.momenta, target_, config_.tau, config_.friction, rng_);
  if (!next.velocities.allFinite()) throw NumericalAbort(state_.step_index + 1, "non-finite velocities");
  advance(state_, std::move(next.positions));
  state_.momenta = std::move(next.velocities);
  return {.step = state_.step_index};
}

}  // namespace steinflow
