// SPDX-License-Identifier: Apache-2.0
//
// Dense semidefinite programming for small problems:
//
//   maximize   sum_b tr(C_b X_b) + c . s
//   subject to sum_b tr(A_ib X_b) + a_i . s = b_i,   X_b Hermitian PSD,  s free.
//
// Solved with an infeasible primal-dual interior-point method (HKM search
// direction, Mehrotra predictor-corrector). Constraint operators are sparse
// Hermitian matrices, so the Schur complement is assembled entry by entry
// from their nonzeros (see sdp_kernels.hpp).

#ifndef ETP_SDP_HPP
#define ETP_SDP_HPP

#include <iosfwd>
#include <string_view>
#include <utility>
#include <vector>

#include "etp/hermitian_basis.hpp"
#include "etp/linalg.hpp"

namespace etp::sdp {

struct BlockTerm {
  int block;
  SparseMatrix matrix;  // Hermitian; all nonzeros listed
};

/// Real-linear functional on (blocks, free scalars): sum tr(M_b X_b) + sum a_k s_k.
struct LinearFunctional {
  std::vector<BlockTerm> terms;
  std::vector<std::pair<int, double>> scalars;
};

struct Constraint {
  LinearFunctional lhs;
  double rhs = 0.0;
};

struct SdpProblem {
  std::vector<int> blocks;  // side length of each PSD block
  int free_scalars = 0;
  LinearFunctional objective;  // maximized
  std::vector<Constraint> constraints;

  int add_block(int side) {
    blocks.push_back(side);
    return static_cast<int>(blocks.size()) - 1;
  }
  /// Throws std::invalid_argument on out-of-range blocks/entries, non-finite
  /// data, or non-Hermitian constraint operators.
  void validate() const;
};

enum class Status { Optimal, Infeasible, MaxIterations, NumericalTrouble };
std::string_view to_string(Status s);

struct Residuals {
  double primal = 0.0;  // ||A(X) - b|| / (1 + ||b||)
  double dual = 0.0;    // ||A^T y - C - Z|| / (1 + ||C||)
  double gap = 0.0;     // |primal_objective - dual_objective|
};

struct SdpSolution {
  Status status = Status::NumericalTrouble;
  std::vector<CMatrix> primal_blocks;
  std::vector<double> primal_scalars;
  /// One per constraint (maximization convention): A^T y - C = Z is PSD on
  /// the blocks and vanishes on the free scalars.
  std::vector<double> dual_multipliers;
  std::vector<CMatrix> dual_slacks;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  Residuals residuals;
  int iterations = 0;
  /// Constraints judged linearly dependent on the rest and left out of the
  /// Newton system (their multiplier is 0).
  int dropped_constraints = 0;

  bool optimal() const { return status == Status::Optimal; }
};

struct SolveOptions {
  int max_iters = 200;
  double tol = 1e-11;
  /// Acceptance thresholds for reporting Optimal when the iteration stalls
  /// before reaching `tol` (typical for problems without interior points).
  double accept_residual = 1e-7;
  double accept_gap = 1e-6;
  bool parallel = true;
  /// Optional CSV iteration log: iter,primal_res,dual_res,gap,mu,pobj,dobj
  std::ostream* log = nullptr;
};

SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts = {});

/// Clips negative eigenvalues at zero.
CMatrix psd_project(const CMatrix& m);

}  // namespace etp::sdp

#endif  // ETP_SDP_HPP
