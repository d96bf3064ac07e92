// SPDX-License-Identifier: Apache-2.0
//
// Orthonormal Hermitian operator basis (identity plus generalized Gell-Mann
// matrices) in sparse form. Coefficients of a Hermitian matrix in this basis
// are real, which is what lets the SDP layer work with real constraint data.

#ifndef ETP_HERMITIAN_BASIS_HPP
#define ETP_HERMITIAN_BASIS_HPP

#include <cstddef>
#include <vector>

#include "etp/linalg.hpp"

namespace etp {

struct SparseEntry {
  int row;
  int col;
  cd value;
};

/// Sparse matrix with every stored entry explicit (both triangles).
using SparseMatrix = std::vector<SparseEntry>;

CMatrix to_dense(const SparseMatrix& s, int dim);
/// Drops entries with |value| <= cutoff.
SparseMatrix to_sparse(const CMatrix& m, double cutoff = 0.0);

/// Element 0 is I/sqrt(d); the remaining d^2-1 are traceless and pairwise
/// orthonormal under (A, B) = tr(A B).
std::vector<SparseMatrix> hermitian_basis(int d);

/// Real coefficients tr(G_k m) of a Hermitian matrix in hermitian_basis(d).
RVector basis_coefficients(const CMatrix& m);

}  // namespace etp

#endif  // ETP_HERMITIAN_BASIS_HPP
