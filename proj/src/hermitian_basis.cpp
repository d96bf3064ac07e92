// SPDX-License-Identifier: Apache-2.0

#include "etp/hermitian_basis.hpp"

#include <cmath>
#include <stdexcept>

namespace etp {

CMatrix to_dense(const SparseMatrix& s, int dim) {
  CMatrix m = CMatrix::Zero(dim, dim);
  for (const auto& e : s) m(e.row, e.col) += e.value;
  return m;
}

SparseMatrix to_sparse(const CMatrix& m, double cutoff) {
  SparseMatrix out;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (std::abs(m(i, j)) > cutoff)
        out.push_back({static_cast<int>(i), static_cast<int>(j), m(i, j)});
  return out;
}

std::vector<SparseMatrix> hermitian_basis(int d) {
  if (d < 1) throw std::invalid_argument("hermitian_basis: dimension < 1");
  std::vector<SparseMatrix> basis;
  basis.reserve(static_cast<std::size_t>(d) * d);

  SparseMatrix id;
  const double s0 = 1.0 / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i) id.push_back({i, i, s0});
  basis.push_back(std::move(id));

  const double r2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      basis.push_back({{j, k, r2}, {k, j, r2}});
      basis.push_back({{j, k, cd(0.0, -r2)}, {k, j, cd(0.0, r2)}});
    }
  }
  for (int l = 1; l < d; ++l) {
    const double c = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
    SparseMatrix g;
    for (int j = 0; j < l; ++j) g.push_back({j, j, c});
    g.push_back({l, l, -c * l});
    basis.push_back(std::move(g));
  }
  return basis;
}

RVector basis_coefficients(const CMatrix& m) {
  const int d = static_cast<int>(m.rows());
  const auto basis = hermitian_basis(d);
  RVector out(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    cd acc = 0.0;
    for (const auto& e : basis[k]) acc += e.value * m(e.col, e.row);
    out(static_cast<Eigen::Index>(k)) = acc.real();
  }
  return out;
}

}  // namespace etp
