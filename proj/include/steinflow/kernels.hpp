#pragma once

#include <variant>

#include "steinflow/types.hpp"

namespace steinflow {

// K(x, y) = x^T A y + 1 with A symmetric positive definite.
struct BilinearKernel {
  Matrix a;
};

// K(x, y) = exp(-|x - y|^2 / (2 sigma2)).
struct GaussianKernel {
  double sigma2 = 0.01;
};

using KernelSpec = std::variant<BilinearKernel, GaussianKernel>;

// Checks the kernel parameters, and for the bilinear kernel that A is d x d.
void validate_kernel(const KernelSpec& spec, Index dim);

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& y);

// Gradient in the first argument. The second-argument gradient follows from
// symmetry: grad_2 K(x, y) = kernel_grad1(y, x).
Vector kernel_grad1(const KernelSpec& spec, const Vector& x, const Vector& y);

// Symmetric N x N matrix of K(X_i, X_j); each unordered pair is evaluated once.
Matrix kernel_matrix(const KernelSpec& spec, const Matrix& positions);

// Row i holds sum_j grad_1 K(X_j, X_i), the SVGD repulsion before the 1/N
// factor. `kernel` must be kernel_matrix(spec, positions).
Matrix kernel_grad1_row_sums(const KernelSpec& spec, const Matrix& positions, const Matrix& kernel);

inline bool is_gaussian(const KernelSpec& spec) { return std::holds_alternative<GaussianKernel>(spec); }

}  // namespace steinflow
