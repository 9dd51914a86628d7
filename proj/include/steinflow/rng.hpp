#pragma once

#include <cstdint>
#include <random>

#include "steinflow/types.hpp"

namespace steinflow {

// Seeded random stream.
//
// The engine is std::mt19937_64 initialised from a std::seed_seq over the
// 32-bit halves of (seed, stream). Both are fully specified by the standard,
// so the raw bit stream is portable. Normal and uniform variates come from the
// standard library distributions, which are stable for a given standard
// library implementation (libstdc++ here).
//
// Stream ids used by the project: 0 = initial ensemble, 1 = sampler noise.
class Rng {
 public:
  static constexpr std::uint64_t kInitStream = 0;
  static constexpr std::uint64_t kNoiseStream = 1;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  // Fills row by row: particle 0 coordinates first, then particle 1, ...
  void fill_normal(Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) m(i, j) = normal();
  }

  Matrix normal_matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    fill_normal(m);
    return m;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace steinflow
