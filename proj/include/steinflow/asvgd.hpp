#pragma once

#include <span>
#include <variant>

#include "steinflow/ensemble.hpp"
#include "steinflow/kernels.hpp"
#include "steinflow/sampler.hpp"
#include "steinflow/targets.hpp"

namespace steinflow {

// Damping from speed restart (per particle) and, for the Gaussian kernel,
// gradient restart (all particles): alpha_i = (c_i - 1) / (c_i + 2).
struct AdaptiveRestart {};

struct ConstantDamping {
  double beta = 0.985;
};

using Damping = std::variant<AdaptiveRestart, ConstantDamping>;

// Which density momentum enters the right factor of the bilinear trace term
// tr(V_{k+1}^T K V_?): the previous one (as the algorithm is written) or the
// fresh one.
enum class BilinearTraceLag { Mixed, Current };

// The statistic tr(V^T (K grad + (K - diag(K 1)) X)) is proportional to the
// rate of change of the KL energy along the particle flow. EnergyIncrease
// restarts when it is positive; AsPrinted restarts when it is negative, which
// fires on every descending step and disables the momentum.
enum class GradientRestartRule { EnergyIncrease, AsPrinted };

// Coefficient of the Gaussian-kernel interaction term: sqrt(tau)/(N^2 sigma2)
// (Derived, matching the repulsion of SVGD so that exp(-f) is the fixed point)
// or sqrt(tau)/(2 N^2 sigma2) (AsPrinted, whose fixed point is exp(-2 f)).
enum class GaussianInteraction { Derived, AsPrinted };

struct AsvgdConfig {
  double tau = 0.1;
  double eps = 0.1;
  KernelSpec kernel = GaussianKernel{0.01};
  Damping damping = AdaptiveRestart{};
  std::size_t steps = 1000;
  BilinearTraceLag trace_lag = BilinearTraceLag::Mixed;
  GradientRestartRule restart_rule = GradientRestartRule::EnergyIncrease;
  GaussianInteraction gaussian_interaction = GaussianInteraction::Derived;

  void validate() const;
};

// X <- X + sqrt(tau) Y, remembering the old positions in prev_positions.
void position_step(Ensemble& e, double tau);

struct DensityMomentumSolve {
  Matrix density_momenta;
  double residual = 0.0;  // |(K + eps I) V - N Y|_F
  double bound = 0.0;     // 1e-8 max(1, |N Y|_F)
};

// Solves (K + eps I) V = N Y by Cholesky. Throws std::runtime_error when the
// factorisation fails or the residual exceeds its bound.
DensityMomentumSolve density_momentum_update(const Matrix& momenta, const Matrix& kernel, double eps);

// Resets count_i to one when particle i moved strictly less this step than
// the step before, otherwise increments it. Returns the number of resets.
std::size_t speed_restart(std::span<int> counts, const Matrix& next, const Matrix& current,
                          const Matrix& previous);

// tr(V^T (K grad + (K - diag(K 1)) X)); negative values trigger a global restart.
double gradient_restart_stat(const Matrix& kernel, const Matrix& density_momenta, const Matrix& grad,
                             const Matrix& positions);

bool gradient_restart_triggered(double stat, GradientRestartRule rule);

Vector damping_values(std::span<const int> counts, const Damping& mode);

// Y <- alpha Y - sqrt(tau)/N K grad + sqrt(tau) (1 + tr(V_next^T K V_lag) / N^2) X A
Matrix momentum_step_bilinear(const Matrix& momenta, const Matrix& kernel, const Matrix& grad,
                              const Matrix& positions, const Matrix& a, const Matrix& v_next,
                              const Matrix& v_lag, double tau, const Vector& alpha);

// W = N K + (K V V^T) o K - K o (K V V^T)
// Y <- alpha Y - sqrt(tau)/N K grad + c (diag(W 1) - W) X
// with c = sqrt(tau)/(N^2 sigma2), halved in AsPrinted mode. The two Hadamard
// terms are the same product and cancel, so W = N K.
Matrix momentum_step_gaussian(const Matrix& momenta, const Matrix& kernel, const Matrix& grad,
                              const Matrix& positions, const Matrix& v_next, double sigma2, double tau,
                              const Vector& alpha, GaussianInteraction mode = GaussianInteraction::Derived);

class AsvgdSampler final : public Sampler {
 public:
  AsvgdSampler(AsvgdConfig config, const Target& target, Ensemble initial);

  StepStats step() override;
  const Ensemble& ensemble() const override { return state_; }
  std::string_view name() const override { return "asvgd"; }

 private:
  AsvgdConfig config_;
  Target target_;
  Ensemble state_;
};

// Step 0 from `init`, then config.steps iterations.
RunRecord asvgd_run(const AsvgdConfig& config, const Target& target, const InitSpec& init,
                    const StepHook& hook = {});

}  // namespace steinflow
