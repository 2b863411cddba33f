#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "hanoi/forms.hpp"
#include "hanoi/spectral.hpp"

namespace hanoi::detail {

/// K u = kappa M u with diagonal M. When `constant_kernel` is set, K has zero row sums and
/// its kernel (the constants) is removed exactly: node 0 is grounded and solutions are
/// projected to M-mean zero, so only the nonzero part of the spectrum is returned.
struct Pencil {
  const SparseMatrix& stiffness;
  const Eigen::VectorXd& mass;
  bool constant_kernel = false;
};

/// Smallest `count` eigenvalues (excluding the kernel), ascending, from the dense inverse
/// M^{1/2} K^+ M^{1/2}.
std::vector<double> dense_smallest(const Pencil& pencil, std::size_t count);

/// Same contract, by block Lanczos with full reorthogonalization and locking on the sparse
/// factorization of the (grounded) stiffness.
std::vector<double> lanczos_smallest(const Pencil& pencil, std::size_t count, const SolverOptions& options);

}  // namespace hanoi::detail
