// SPDX-License-Identifier: Apache-2.0

#include "etp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "index_util.hpp"

namespace etp {

std::size_t total_dim(std::span<const int> dims) {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

SubsystemSet::SubsystemSet(std::initializer_list<int> indices)
    : SubsystemSet(std::vector<int>(indices)) {}

SubsystemSet::SubsystemSet(std::vector<int> indices) : indices_(std::move(indices)) {
  if (indices_.empty()) throw std::invalid_argument("SubsystemSet: empty");
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
    throw std::invalid_argument("SubsystemSet: duplicate index");
  if (indices_.front() < 0) throw std::out_of_range("SubsystemSet: negative index");
}

bool SubsystemSet::contains(int k) const {
  return std::binary_search(indices_.begin(), indices_.end(), k);
}

void SubsystemSet::check(std::size_t n_parties) const {
  if (indices_.empty()) throw std::invalid_argument("SubsystemSet: empty");
  if (static_cast<std::size_t>(indices_.back()) >= n_parties)
    throw std::out_of_range("SubsystemSet: index " + std::to_string(indices_.back()) +
                            " out of range for " + std::to_string(n_parties) + " parties");
}

SubsystemSet SubsystemSet::complement(std::size_t n_parties) const {
  std::vector<int> out;
  for (int k = 0; k < static_cast<int>(n_parties); ++k)
    if (!contains(k)) out.push_back(k);
  SubsystemSet s;
  s.indices_ = std::move(out);
  return s;
}

Dims SubsystemSet::restrict_dims(std::span<const int> dims) const {
  check(dims.size());
  Dims out;
  out.reserve(indices_.size());
  for (int k : indices_) out.push_back(dims[static_cast<std::size_t>(k)]);
  return out;
}

SubsystemSet SubsystemSet::relative(const SubsystemSet& sub) const {
  std::vector<int> out;
  for (int k : sub.indices()) {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), k);
    if (it == indices_.end() || *it != k)
      throw std::invalid_argument("SubsystemSet::relative: not a subset");
    out.push_back(static_cast<int>(it - indices_.begin()));
  }
  return SubsystemSet(std::move(out));
}

// ---------------------------------------------------------------------------

namespace {

void check_square(const CMatrix& m, std::size_t expected) {
  if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != expected)
    throw std::invalid_argument("matrix side " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + " does not match dims product " +
                                std::to_string(expected));
}

void check_dims(const Dims& dims) {
  if (dims.empty()) throw std::invalid_argument("DensityMatrix: empty dims");
  for (int d : dims)
    if (d < 2) throw std::invalid_argument("DensityMatrix: subsystem dimension < 2");
}

}  // namespace

DensityMatrix::DensityMatrix(Dims dims, CMatrix matrix, NoCheck)
    : dims_(std::move(dims)), matrix_(std::move(matrix)) {
  check_dims(dims_);
  check_square(matrix_, total_dim(dims_));
}

DensityMatrix::DensityMatrix(Dims dims, CMatrix matrix)
    : DensityMatrix(std::move(dims), std::move(matrix), NoCheck{}) {
  if (!is_hermitian(matrix_)) throw std::invalid_argument("DensityMatrix: not Hermitian");
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > tol::trace)
    throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr) + " != 1");
  const double lmin = min_eigenvalue(matrix_);
  if (lmin < -tol::psd)
    throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(lmin));
}

DensityMatrix DensityMatrix::unchecked(Dims dims, CMatrix matrix) {
  return DensityMatrix(std::move(dims), std::move(matrix), NoCheck{});
}

DensityMatrix DensityMatrix::from_pure(Dims dims, const CVector& psi) {
  if (static_cast<std::size_t>(psi.size()) != total_dim(dims))
    throw std::invalid_argument("from_pure: vector length does not match dims");
  const double n = psi.norm();
  if (std::abs(n - 1.0) > 1e-9) throw std::invalid_argument("from_pure: vector not normalized");
  return DensityMatrix(std::move(dims), projector(psi));
}

// ---------------------------------------------------------------------------

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CVector kron(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

CMatrix partial_trace(const CMatrix& m, std::span<const int> dims, const SubsystemSet& keep) {
  keep.check(dims.size());
  check_square(m, total_dim(dims));
  const auto kept = detail::subset_offsets(dims, keep.indices());
  const auto traced = detail::subset_offsets(dims, keep.complement(dims.size()).indices());
  const auto n = static_cast<Eigen::Index>(kept.size());
  CMatrix out = CMatrix::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      cd acc = 0.0;
      for (std::size_t t : traced) acc += m(kept[a] + t, kept[b] + t);
      out(a, b) = acc;
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const SubsystemSet& keep) {
  CMatrix red = partial_trace(rho.matrix(), rho.dims(), keep);
  return DensityMatrix::unchecked(keep.restrict_dims(rho.dims()), std::move(red));
}

CMatrix partial_transpose(const CMatrix& m, std::span<const int> dims, const SubsystemSet& part) {
  part.check(dims.size());
  check_square(m, total_dim(dims));
  const auto p = detail::subset_offsets(dims, part.indices());
  const auto r = detail::subset_offsets(dims, part.complement(dims.size()).indices());
  CMatrix out(m.rows(), m.cols());
  // out[(iR,iP),(jR,jP)] = m[(iR,jP),(jR,iP)]
  for (std::size_t ir : r)
    for (std::size_t ip : p)
      for (std::size_t jr : r)
        for (std::size_t jp : p) out(ir + ip, jr + jp) = m(ir + jp, jr + ip);
  return out;
}

CMatrix partial_transpose(const DensityMatrix& rho, const SubsystemSet& part) {
  return partial_transpose(rho.matrix(), rho.dims(), part);
}

CMatrix permute_subsystems(const CMatrix& m, std::span<const int> dims,
                           std::span<const int> order) {
  check_square(m, total_dim(dims));
  if (order.size() != dims.size())
    throw std::invalid_argument("permute_subsystems: order length mismatch");
  std::vector<int> seen(order.begin(), order.end());
  std::sort(seen.begin(), seen.end());
  for (std::size_t k = 0; k < seen.size(); ++k)
    if (seen[k] != static_cast<int>(k))
      throw std::invalid_argument("permute_subsystems: not a permutation");
  // old offsets enumerated in the new ordering
  const auto map = detail::subset_offsets(dims, order);
  const auto n = static_cast<Eigen::Index>(map.size());
  CMatrix out(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) out(a, b) = m(map[a], map[b]);
  return out;
}

CMatrix realign(const CMatrix& m, int dim_a, int dim_b) {
  const Eigen::Index da = dim_a, db = dim_b;
  check_square(m, static_cast<std::size_t>(da * db));
  CMatrix out(da * da, db * db);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < da; ++j)
      for (Eigen::Index k = 0; k < db; ++k)
        for (Eigen::Index l = 0; l < db; ++l) out(i + da * j, k + db * l) = m(i * db + k, j * db + l);
  return out;
}

CMatrix realign(const DensityMatrix& rho) {
  if (rho.n_parties() != 2) throw std::invalid_argument("realign: needs exactly two parties");
  return realign(rho.matrix(), rho.dims()[0], rho.dims()[1]);
}

// ---------------------------------------------------------------------------

bool is_hermitian(const CMatrix& m, double tolerance) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tolerance * scale;
}

CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) * 0.5; }

EigenDecomposition eigh(const CMatrix& m) {
  if (!is_hermitian(m)) throw std::invalid_argument("eigh: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m));
  if (es.info() != Eigen::Success) throw std::runtime_error("eigh: no convergence");
  return {es.eigenvalues(), es.eigenvectors()};
}

RVector eigvalsh(const CMatrix& m) {
  if (!is_hermitian(m)) throw std::invalid_argument("eigvalsh: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigvalsh: no convergence");
  return es.eigenvalues();
}

double min_eigenvalue(const CMatrix& m) { return eigvalsh(m)(0); }

double trace_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues().sum();
}

double pure_fidelity(const DensityMatrix& rho, const CVector& psi) {
  if (static_cast<std::size_t>(psi.size()) != rho.dim())
    throw std::invalid_argument("pure_fidelity: dimension mismatch");
  return (psi.adjoint() * rho.matrix() * psi)(0, 0).real();
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

double trace_distance(const CMatrix& a, const CMatrix& b) {
  return 0.5 * eigvalsh(hermitian_part(a - b)).cwiseAbs().sum();
}

CMatrix projector(const CVector& psi) { return psi * psi.adjoint(); }

CVector basis_ket(std::size_t dim, std::size_t index) {
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

}  // namespace etp
