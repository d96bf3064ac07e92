// SPDX-License-Identifier: Apache-2.0
//
// Marginal specifications and their translation into SDP equality rows.

#ifndef ETP_MARGINALS_HPP
#define ETP_MARGINALS_HPP

#include <vector>

#include "etp/hermitian_basis.hpp"
#include "etp/linalg.hpp"
#include "etp/sdp.hpp"

namespace etp {

struct MarginalConstraint {
  SubsystemSet parties;
  DensityMatrix sigma;
};

/// A set of prescribed reduced states on subsets of an n-party system.
struct MarginalSpec {
  Dims dims;
  std::vector<MarginalConstraint> constraints;

  std::size_t n_parties() const { return dims.size(); }
  std::size_t dim() const { return total_dim(dims); }
  /// Throws std::invalid_argument on mismatched sides, duplicate subsets,
  /// or a constraint on the whole system.
  void validate() const;
  MarginalSpec& add(SubsystemSet parties, DensityMatrix sigma);
};

/// Tensor products of hermitian_basis(d_k) over the listed dimensions, first
/// factor most significant; element 0 is I/sqrt(prod d_k). Using a product
/// basis makes the rows that two overlapping marginals share identical.
std::vector<SparseMatrix> product_basis(std::span<const int> dims);

/// op (x) identity, with op acting on `parties` (in increasing order).
SparseMatrix embed(const SparseMatrix& op, std::span<const int> dims, const SubsystemSet& parties);

struct MarginalMap {
  std::vector<sdp::Constraint> rows;
  /// rows[first_row[i] + k] fixes tr(G_k sigma_i) with G_k = basis[i][k].
  std::vector<int> first_row;
  std::vector<std::vector<SparseMatrix>> basis;
};

/// One real equality per element of the orthonormal Hermitian basis of each
/// marginal space, acting on PSD block `block`. Together they state
/// tr_{rest}(rho) = sigma_i for every constraint.
MarginalMap build_marginal_map(const MarginalSpec& spec, int block = 0);

/// Applies the marginal map to an operator: one value per row.
RVector apply_marginal_map(const MarginalMap& map, const CMatrix& rho);

/// Trace distance between each prescribed marginal and that of rho.
std::vector<double> marginal_violations(const MarginalSpec& spec, const CMatrix& rho);

}  // namespace etp

#endif  // ETP_MARGINALS_HPP
