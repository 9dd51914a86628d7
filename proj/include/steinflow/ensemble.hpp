#pragma once

#include <cstdint>
#include <vector>

#include "steinflow/types.hpp"

namespace steinflow {

// Joint particle state shared by every sampler.
//
// ASVGD uses all fields. The Langevin baselines use `positions` and, for
// ULD, `momenta` as velocities; their restart counts stay at one.
struct Ensemble {
  Matrix positions;
  Matrix momenta;
  Matrix density_momenta;
  Matrix prev_positions;
  std::vector<int> restart_counts;
  std::size_t step_index = 0;

  Index size() const { return positions.rows(); }
  Index dim() const { return positions.cols(); }

  // Throws std::invalid_argument when shapes or counts break the invariants.
  void validate() const;
  bool finite() const;
};

struct InitSpec {
  Vector mean;
  Matrix covariance;
  Index count = 0;
  std::uint64_t seed = 0;
};

// Ensemble at rest at the given positions: zero momenta, counts one.
Ensemble make_ensemble(Matrix positions);

// Draws N(mean, covariance) positions as mean + L z with L the Cholesky
// factor and z filled row-major from Rng(seed, Rng::kInitStream).
Ensemble init_ensemble(const InitSpec& spec);

struct MeanCov {
  Vector mean;
  Matrix covariance;  // unbiased; all zero when only one particle
  bool covariance_defined = true;
};

MeanCov sample_mean_cov(const Matrix& positions);
inline MeanCov sample_mean_cov(const Ensemble& e) { return sample_mean_cov(e.positions); }

}  // namespace steinflow
