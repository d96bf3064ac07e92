// SPDX-License-Identifier: Apache-2.0
//
// Dense complex linear algebra and multipartite index operations.
//
// Tensor ordering: subsystem 0 is the most significant factor, so the basis
// ket |i0 i1 ... i(n-1)> sits at index sum_k i_k * prod_{j>k} d_j.

#ifndef ETP_LINALG_HPP
#define ETP_LINALG_HPP

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace etp {

using cd = std::complex<double>;
using CMatrix = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVector = Eigen::Matrix<cd, Eigen::Dynamic, 1>;
using RVector = Eigen::VectorXd;

namespace tol {
inline constexpr double herm = 1e-12;
inline constexpr double psd = 1e-9;
inline constexpr double trace = 1e-9;
inline constexpr double eig_recon = 1e-10;
}  // namespace tol

using Dims = std::vector<int>;

std::size_t total_dim(std::span<const int> dims);

/// Sorted, duplicate-free list of subsystem positions into a dims list.
class SubsystemSet {
 public:
  SubsystemSet() = default;
  SubsystemSet(std::initializer_list<int> indices);
  explicit SubsystemSet(std::vector<int> indices);

  const std::vector<int>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool contains(int k) const;
  int operator[](std::size_t i) const { return indices_[i]; }

  /// Throws std::out_of_range when any index is >= n_parties.
  void check(std::size_t n_parties) const;
  /// Complement within {0..n_parties-1}.
  SubsystemSet complement(std::size_t n_parties) const;
  /// Dimensions of the selected subsystems, in order.
  Dims restrict_dims(std::span<const int> dims) const;
  /// Positions of `sub` inside this set (sub must be a subset).
  SubsystemSet relative(const SubsystemSet& sub) const;

  bool operator==(const SubsystemSet&) const = default;
  auto operator<=>(const SubsystemSet&) const = default;

 private:
  std::vector<int> indices_;
};

/// Hermitian PSD unit-trace matrix tagged with its subsystem dimensions.
class DensityMatrix {
 public:
  /// Validates every invariant; throws std::invalid_argument on failure.
  DensityMatrix(Dims dims, CMatrix matrix);

  /// Skips the PSD/trace checks (still checks shape). For intermediate
  /// quantities that are known to be valid up to solver accuracy.
  static DensityMatrix unchecked(Dims dims, CMatrix matrix);
  static DensityMatrix from_pure(Dims dims, const CVector& psi);

  const Dims& dims() const { return dims_; }
  const CMatrix& matrix() const { return matrix_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t n_parties() const { return dims_.size(); }

 private:
  struct NoCheck {};
  DensityMatrix(Dims dims, CMatrix matrix, NoCheck);

  Dims dims_;
  CMatrix matrix_;
};

struct EigenDecomposition {
  RVector values;   // ascending
  CMatrix vectors;  // columns are eigenvectors
};

CMatrix kron(const CMatrix& a, const CMatrix& b);
CVector kron(const CVector& a, const CVector& b);

/// Reduced matrix on `keep` of an arbitrary (not necessarily PSD) operator.
CMatrix partial_trace(const CMatrix& m, std::span<const int> dims, const SubsystemSet& keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const SubsystemSet& keep);

CMatrix partial_transpose(const CMatrix& m, std::span<const int> dims, const SubsystemSet& part);
CMatrix partial_transpose(const DensityMatrix& rho, const SubsystemSet& part);

/// Moves subsystems so that the new ordering is `order` (a permutation of
/// 0..n-1); new factor k is old factor order[k].
CMatrix permute_subsystems(const CMatrix& m, std::span<const int> dims, std::span<const int> order);

/// Realignment of an operator on C^m (x) C^n into an m^2 x n^2 matrix: the
/// row for block (i, j) is vec(block_ij)^T with column-stacking vec, and
/// block rows are enumerated with i fastest.
CMatrix realign(const CMatrix& m, int dim_a, int dim_b);
CMatrix realign(const DensityMatrix& rho);

/// Symmetrizes before decomposing. Throws std::invalid_argument if the input
/// deviates from Hermitian by more than tol::herm (scaled by max |entry|).
EigenDecomposition eigh(const CMatrix& m);
RVector eigvalsh(const CMatrix& m);
double min_eigenvalue(const CMatrix& m);

double trace_norm(const CMatrix& m);
double pure_fidelity(const DensityMatrix& rho, const CVector& psi);

bool is_hermitian(const CMatrix& m, double tolerance = tol::herm);
CMatrix hermitian_part(const CMatrix& m);
double max_abs_diff(const CMatrix& a, const CMatrix& b);
/// (1/2)||a - b||_1 for Hermitian inputs.
double trace_distance(const CMatrix& a, const CMatrix& b);

CMatrix projector(const CVector& psi);
CVector basis_ket(std::size_t dim, std::size_t index);

}  // namespace etp

#endif  // ETP_LINALG_HPP
