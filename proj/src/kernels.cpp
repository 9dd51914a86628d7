#include "steinflow/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace steinflow {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double gaussian_value(double squared_distance, double sigma2) {
  return std::exp(-squared_distance / (2.0 * sigma2));
}

void check_pair(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw std::invalid_argument("kernel arguments differ in dimension");
}

void check_bilinear(const BilinearKernel& k, Index dim) {
  if (k.a.rows() != dim || k.a.cols() != dim)
    throw std::invalid_argument("bilinear kernel matrix A must be d x d");
}

}  // namespace

void validate_kernel(const KernelSpec& spec, Index dim) {
  std::visit(Overloaded{
                 [&](const BilinearKernel& k) {
                   check_bilinear(k, dim);
                   if (!k.a.isApprox(k.a.transpose(), 1e-12))
                     throw std::invalid_argument("bilinear kernel matrix A is not symmetric");
                   if (Eigen::LLT<Matrix>(k.a).info() != Eigen::Success)
                     throw std::invalid_argument("bilinear kernel matrix A is not positive definite");
                 },
                 [&](const GaussianKernel& k) {
                   if (!(k.sigma2 > 0.0) || !std::isfinite(k.sigma2))
                     throw std::invalid_argument("gaussian kernel bandwidth must be positive");
                 },
             },
             spec);
}

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& y) {
  check_pair(x, y);
  return std::visit(Overloaded{
                        [&](const BilinearKernel& k) {
                          check_bilinear(k, x.size());
                          return x.dot(k.a * y) + 1.0;
                        },
                        [&](const GaussianKernel& k) {
                          return gaussian_value((x - y).squaredNorm(), k.sigma2);
                        },
                    },
                    spec);
}

Vector kernel_grad1(const KernelSpec& spec, const Vector& x, const Vector& y) {
  check_pair(x, y);
  return std::visit(Overloaded{
                        [&](const BilinearKernel& k) -> Vector {
                          check_bilinear(k, x.size());
                          return k.a * y;
                        },
                        [&](const GaussianKernel& k) -> Vector {
                          const Vector diff = x - y;
                          const double value = gaussian_value(diff.squaredNorm(), k.sigma2);
                          return -(value / k.sigma2) * diff;
                        },
                    },
                    spec);
}

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& positions) {
  const Index n = positions.rows();
  // Columns of the transpose are contiguous particles.
  const Matrix pts = positions.transpose();
  Matrix k(n, n);
  std::visit(Overloaded{
                 [&](const BilinearKernel& kb) {
                   check_bilinear(kb, positions.cols());
                   const Matrix ap = kb.a * pts;
                   for (Index j = 0; j < n; ++j)
                     for (Index i = j; i < n; ++i) k(i, j) = k(j, i) = pts.col(i).dot(ap.col(j)) + 1.0;
                 },
                 [&](const GaussianKernel& kg) {
                   for (Index j = 0; j < n; ++j) {
                     k(j, j) = 1.0;
                     for (Index i = j + 1; i < n; ++i)
                       k(i, j) = k(j, i) = gaussian_value((pts.col(i) - pts.col(j)).squaredNorm(), kg.sigma2);
                   }
                 },
             },
             spec);
  return k;
}

Matrix kernel_grad1_row_sums(const KernelSpec& spec, const Matrix& positions, const Matrix& kernel) {
  const Index n = positions.rows();
  if (kernel.rows() != n || kernel.cols() != n) throw std::invalid_argument("kernel matrix must be N x N");
  return std::visit(Overloaded{
                        // grad_1 K(X_j, X_i) = A X_i for every j.
                        [&](const BilinearKernel& k) -> Matrix {
                          check_bilinear(k, positions.cols());
                          return static_cast<double>(n) * (positions * k.a.transpose());
                        },
                        // grad_1 K(X_j, X_i) = (X_i - X_j) K_ij / sigma2.
                        [&](const GaussianKernel& k) -> Matrix {
                          const Vector row_sums = kernel.rowwise().sum();
                          return (row_sums.asDiagonal() * positions - kernel * positions) / k.sigma2;
                        },
                    },
                    spec);
}

}  // namespace steinflow
