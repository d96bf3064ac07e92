// SPDX-License-Identifier: Apache-2.0
//
// Inner kernels of the interior-point iteration. Each has an OpenMP version
// used by the solver and a plain serial reference kept for tests and the
// benchmark. The references use dense products and share no code with the
// parallel kernels.

#ifndef ETP_SDP_KERNELS_HPP
#define ETP_SDP_KERNELS_HPP

#include <span>
#include <vector>

#include "etp/hermitian_basis.hpp"
#include "etp/linalg.hpp"

namespace etp::sdp::kernels {

/// Constraint operators restricted to one PSD block. ops[k] belongs to the
/// global constraint row rows[k]; entries are sorted by (row, col) without
/// duplicates.
struct BlockOperators {
  int dim = 0;
  std::vector<int> rows;
  std::vector<SparseMatrix> ops;
};

void canonicalize(SparseMatrix& s);

/// M(i, j) = sum_b Re tr(A_ib X_b A_jb Zinv_b)  (m x m, symmetric).
Eigen::MatrixXd schur_complement(std::span<const BlockOperators> blocks,
                                 std::span<const CMatrix> x, std::span<const CMatrix> zinv,
                                 int m, bool parallel = true);
Eigen::MatrixXd schur_complement_reference(std::span<const BlockOperators> blocks,
                                           std::span<const CMatrix> x,
                                           std::span<const CMatrix> zinv, int m);

/// out(i) = sum_b Re tr(A_ib K_b)
RVector apply_operator(std::span<const BlockOperators> blocks, std::span<const CMatrix> k, int m,
                       bool parallel = true);
RVector apply_operator_reference(std::span<const BlockOperators> blocks,
                                 std::span<const CMatrix> k, int m);

/// out_b = sum_i y(i) A_ib
std::vector<CMatrix> apply_adjoint(std::span<const BlockOperators> blocks, const RVector& y);

}  // namespace etp::sdp::kernels

#endif  // ETP_SDP_KERNELS_HPP
