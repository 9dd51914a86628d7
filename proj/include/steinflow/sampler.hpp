#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "steinflow/ensemble.hpp"

namespace steinflow {

// Per-step diagnostics common to all samplers. Fields that do not apply to
// a sampler keep their defaults.
struct StepStats {
  std::size_t step = 0;
  double restart_fraction = 0.0;
  double alpha_mean = 0.0;
  double solve_residual = 0.0;
  double solve_bound = 0.0;
  bool gradient_restart = false;
  double acceptance_rate = 1.0;
};

class Sampler {
 public:
  virtual ~Sampler() = default;

  // Advances one step. Throws NumericalAbort on a non-finite state.
  virtual StepStats step() = 0;
  virtual const Ensemble& ensemble() const = 0;
  virtual std::string_view name() const = 0;
};

using StepHook = std::function<void(const Ensemble&, const StepStats&)>;

struct RunRecord {
  Ensemble final_state;
  std::vector<StepStats> steps;
};

// Runs `steps` iterations, calling hook after each one.
RunRecord run_sampler(Sampler& sampler, std::size_t steps, const StepHook& hook = {});

}  // namespace steinflow
