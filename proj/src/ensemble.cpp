#include "steinflow/ensemble.hpp"

#include <algorithm>
#include <stdexcept>

#include "steinflow/rng.hpp"

namespace steinflow {

void Ensemble::validate() const {
  const Index n = positions.rows();
  const Index d = positions.cols();
  if (n < 1 || d < 1) throw std::invalid_argument("ensemble needs at least one particle and one dimension");
  auto same_shape = [&](const Matrix& m) { return m.rows() == n && m.cols() == d; };
  if (!same_shape(momenta) || !same_shape(density_momenta) || !same_shape(prev_positions))
    throw std::invalid_argument("ensemble matrices must share the positions' shape");
  if (static_cast<Index>(restart_counts.size()) != n)
    throw std::invalid_argument("restart_counts must have one entry per particle");
  if (std::any_of(restart_counts.begin(), restart_counts.end(), [](int c) { return c < 1; }))
    throw std::invalid_argument("restart_counts must be >= 1");
}

bool Ensemble::finite() const {
  return positions.allFinite() && momenta.allFinite() && density_momenta.allFinite() &&
         prev_positions.allFinite();
}

Ensemble make_ensemble(Matrix positions) {
  Ensemble e;
  const Index n = positions.rows();
  const Index d = positions.cols();
  e.momenta = Matrix::Zero(n, d);
  e.density_momenta = Matrix::Zero(n, d);
  e.prev_positions = positions;
  e.positions = std::move(positions);
  e.restart_counts.assign(static_cast<std::size_t>(n), 1);
  e.validate();
  return e;
}

Ensemble init_ensemble(const InitSpec& spec) {
  const Index d = spec.mean.size();
  if (d < 1) throw std::invalid_argument("init mean must have at least one entry");
  if (spec.count < 1) throw std::invalid_argument("init count must be >= 1");
  if (spec.covariance.rows() != d || spec.covariance.cols() != d)
    throw std::invalid_argument("init covariance must be d x d with d = mean size");
  if (!spec.covariance.isApprox(spec.covariance.transpose(), 1e-12))
    throw std::invalid_argument("init covariance is not symmetric");
  Eigen::LLT<Matrix> llt(spec.covariance);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("init covariance is not positive definite");

  Rng rng(spec.seed, Rng::kInitStream);
  Matrix z = rng.normal_matrix(spec.count, d);
  Matrix positions = z * llt.matrixL().transpose();
  positions.rowwise() += spec.mean.transpose();
  return make_ensemble(std::move(positions));
}

MeanCov sample_mean_cov(const Matrix& positions) {
  const Index n = positions.rows();
  const Index d = positions.cols();
  if (n < 1) throw std::invalid_argument("sample_mean_cov needs at least one particle");
  MeanCov out;
  out.mean = positions.colwise().mean().transpose();
  if (n < 2) {
    out.covariance = Matrix::Zero(d, d);
    out.covariance_defined = false;
    return out;
  }
  const Matrix centered = positions.rowwise() - out.mean.transpose();
  out.covariance = (centered.transpose() * centered) / static_cast<double>(n - 1);
  return out;
}

}  // namespace steinflow
