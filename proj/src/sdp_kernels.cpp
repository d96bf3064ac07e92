// SPDX-License-Identifier: Apache-2.0

#include "etp/sdp_kernels.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace etp::sdp::kernels {

void canonicalize(SparseMatrix& s) {
  std::sort(s.begin(), s.end(), [](const SparseEntry& a, const SparseEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix out;
  out.reserve(s.size());
  for (const auto& e : s) {
    if (!out.empty() && out.back().row == e.row && out.back().col == e.col)
      out.back().value += e.value;
    else
      out.push_back(e);
  }
  std::erase_if(out, [](const SparseEntry& e) { return e.value == cd(0.0); });
  s = std::move(out);
}

namespace {

// Re sum_{(a,b,alpha) in Ai} sum_{(c,d,beta) in Aj} alpha X(b,c) beta Zinv(d,a)
double pair_term(const SparseMatrix& ai, const SparseMatrix& aj, const CMatrix& x,
                 const CMatrix& zinv) {
  cd acc = 0.0;
  for (const auto& ea : ai) {
    cd inner = 0.0;
    for (const auto& eb : aj) inner += x(ea.col, eb.row) * eb.value * zinv(eb.col, ea.row);
    acc += ea.value * inner;
  }
  return acc.real();
}

}  // namespace

Eigen::MatrixXd schur_complement(std::span<const BlockOperators> blocks,
                                 std::span<const CMatrix> x, std::span<const CMatrix> zinv, int m,
                                 bool parallel) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    const auto n = static_cast<long>(blk.ops.size());
    const CMatrix& xb = x[b];
    const CMatrix& zb = zinv[b];
    // Row i writes (i, j>=i) and its mirror; rows never collide.
#pragma omp parallel for schedule(dynamic, 1) if (parallel && n > 8)
    for (long i = 0; i < n; ++i) {
      const int ri = blk.rows[static_cast<std::size_t>(i)];
      for (long j = i; j < n; ++j) {
        const int rj = blk.rows[static_cast<std::size_t>(j)];
        const double v = pair_term(blk.ops[static_cast<std::size_t>(i)],
                                   blk.ops[static_cast<std::size_t>(j)], xb, zb);
        out(ri, rj) += v;
        if (ri != rj) out(rj, ri) += v;
      }
    }
  }
  return out;
}

Eigen::MatrixXd schur_complement_reference(std::span<const BlockOperators> blocks,
                                           std::span<const CMatrix> x,
                                           std::span<const CMatrix> zinv, int m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    std::vector<CMatrix> left, right;
    for (const auto& op : blk.ops) {
      const CMatrix a = to_dense(op, blk.dim);
      left.push_back(a * x[b]);
      right.push_back(a * zinv[b]);
    }
    for (std::size_t i = 0; i < blk.ops.size(); ++i)
      for (std::size_t j = 0; j < blk.ops.size(); ++j)
        out(blk.rows[i], blk.rows[j]) += (left[i] * right[j]).trace().real();
  }
  return out;
}

RVector apply_operator(std::span<const BlockOperators> blocks, std::span<const CMatrix> k, int m,
                       bool parallel) {
  RVector out = RVector::Zero(m);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    const auto n = static_cast<long>(blk.ops.size());
    const CMatrix& kb = k[b];
#pragma omp parallel for schedule(static) if (parallel && n > 64)
    for (long i = 0; i < n; ++i) {
      cd acc = 0.0;
      for (const auto& e : blk.ops[static_cast<std::size_t>(i)]) acc += e.value * kb(e.col, e.row);
      out(blk.rows[static_cast<std::size_t>(i)]) += acc.real();
    }
  }
  return out;
}

RVector apply_operator_reference(std::span<const BlockOperators> blocks,
                                 std::span<const CMatrix> k, int m) {
  RVector out = RVector::Zero(m);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    for (std::size_t i = 0; i < blk.ops.size(); ++i)
      out(blk.rows[i]) += (to_dense(blk.ops[i], blk.dim) * k[b]).trace().real();
  }
  return out;
}

std::vector<CMatrix> apply_adjoint(std::span<const BlockOperators> blocks, const RVector& y) {
  std::vector<CMatrix> out;
  out.reserve(blocks.size());
  for (const auto& blk : blocks) {
    CMatrix acc = CMatrix::Zero(blk.dim, blk.dim);
    for (std::size_t i = 0; i < blk.ops.size(); ++i) {
      const double yi = y(blk.rows[i]);
      if (yi == 0.0) continue;
      for (const auto& e : blk.ops[i]) acc(e.row, e.col) += yi * e.value;
    }
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace etp::sdp::kernels
