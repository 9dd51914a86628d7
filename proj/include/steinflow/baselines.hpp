#pragma once

#include <cstdint>
#include <optional>

#include "steinflow/kernels.hpp"
#include "steinflow/rng.hpp"
#include "steinflow/sampler.hpp"
#include "steinflow/targets.hpp"

namespace steinflow {

struct BaselineConfig {
  double tau = 0.1;
  std::size_t steps = 1000;
  std::optional<KernelSpec> kernel;  // SVGD only
  double friction = 1.0;             // ULD only; mass is fixed to one
  std::uint64_t seed = 0;

  void validate() const;
};

// X_i <- X_i + tau/N sum_j [-K(X_j, X_i) grad f(X_j) + grad_1 K(X_j, X_i)]
Matrix svgd_step(const Matrix& positions, const KernelSpec& kernel, const Target& target, double tau);

// X <- X - tau grad f(X) + sqrt(2 tau) xi
Matrix ula_step(const Matrix& positions, const Target& target, double tau, Rng& rng);

// log of the Metropolis-Hastings ratio for moving x -> proposal under the
// Langevin proposal q(a | b) with log q(a | b) = -|a - b + tau grad f(b)|^2 / (4 tau).
double mala_log_accept_ratio(const Target& target, const Vector& x, const Vector& proposal, double tau);

struct MalaStep {
  Matrix positions;
  std::size_t accepted = 0;
};

// One MALA move per particle. Noise is drawn as the full N x d normal matrix
// (row-major) followed by N uniforms.
MalaStep mala_step(const Matrix& positions, const Target& target, double tau, Rng& rng);

struct UldState {
  Matrix positions;
  Matrix velocities;
};

// Euler-Maruyama for unit-mass underdamped Langevin dynamics:
//   X <- X + tau V;  V <- V - tau (grad f(X) + gamma V) + sqrt(2 gamma tau) xi
// where the force is evaluated at the updated positions.
UldState uld_step(const Matrix& positions, const Matrix& velocities, const Target& target, double tau,
                  double gamma, Rng& rng);

class SvgdSampler final : public Sampler {
 public:
  SvgdSampler(BaselineConfig config, Target target, Ensemble initial);
  StepStats step() override;
  const Ensemble& ensemble() const override { return state_; }
  std::string_view name() const override { return "svgd"; }

 private:
  BaselineConfig config_;
  Target target_;
  Ensemble state_;
};

class UlaSampler final : public Sampler {
 public:
  UlaSampler(BaselineConfig config, Target target, Ensemble initial);
  StepStats step() override;
  const Ensemble& ensemble() const override { return state_; }
  std::string_view name() const override { return "ula"; }

 private:
  BaselineConfig config_;
  Target target_;
  Ensemble state_;
  Rng rng_;
};

class MalaSampler final : public Sampler {
 public:
  MalaSampler(BaselineConfig config, Target target, Ensemble initial);
  StepStats step() override;
  const Ensemble& ensemble() const override { return state_; }
  std::string_view name() const override { return "mala"; }

 private:
  BaselineConfig config_;
  Target target_;
  Ensemble state_;
  Rng rng_;
};

// Velocities live in Ensemble::momenta.
class UldSampler final : public Sampler {
 public:
  UldSampler(BaselineConfig config, Target target, Ensemble initial);
  StepStats step() override;
  const Ensemble& ensemble() const override { return state_; }
  std::string_view name() const override { return "uld"; }

 private:
  BaselineConfig config_;
  Target target_;
  Ensemble state_;
  Rng rng_;
};

}  // namespace steinflow
