#include "steinflow/sampler.hpp"

namespace steinflow {

RunRecord run_sampler(Sampler& sampler, std::size_t steps, const StepHook& hook) {
  RunRecord record;
  record.steps.reserve(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    record.steps.push_back(sampler.step());
    if (hook) hook(sampler.ensemble(), record.steps.back());
  }
  record.final_state = sampler.ensemble();
  return record;
}

}  // namespace steinflow
