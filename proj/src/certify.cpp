// SPDX-License-Identifier: Apache-2.0

#include "etp/certify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "etp/density_json.hpp"

namespace etp {

std::string to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::LambdaStar: return "LambdaStar";
    case CertificateKind::Witness: return "Witness";
    case CertificateKind::Ccnr: return "Ccnr";
    case CertificateKind::GmeMN: return "GmeMN";
    case CertificateKind::Uniqueness: return "Uniqueness";
  }
  return "?";
}

std::string to_string(MarginalFlag f) {
  switch (f) {
    case MarginalFlag::Entangled: return "Entangled";
    case MarginalFlag::Separable: return "Separable";
    case MarginalFlag::PptUndecided: return "PptUndecided";
  }
  return "?";
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Transitivity: return "Transitivity";
    case Outcome::Metatransitivity: return "Metatransitivity";
    case Outcome::NotCertified: return "NotCertified";
  }
  return "?";
}

namespace {

// Joint-state program skeleton: block 0 is rho, constrained by the spec.
struct Program {
  sdp::SdpProblem problem;
  MarginalMap map;
  int rho_block = 0;
  // Columns span the subspace every compatible rho is supported on; empty
  // when that is the whole space.
  CMatrix face;
};

// Any PSD rho with tr_rest(rho) = sigma_i is supported inside
// supp(sigma_i) (x) H_rest. Intersecting these subspaces removes the
// directions in which no compatible state has weight, which is what keeps
// rank-deficient marginals from stalling the interior-point iteration.
CMatrix feasible_face(const MarginalSpec& spec, bool enabled) {
  if (!enabled) return {};
  const auto n = static_cast<Eigen::Index>(spec.dim());
  CMatrix k = CMatrix::Zero(n, n);
  bool any = false;
  for (const auto& c : spec.constraints) {
    const auto ed = eigh(c.sigma.matrix());
    const double cutoff = 1e-9 * std::max(1.0, ed.values.maxCoeff());
    CMatrix ker = CMatrix::Zero(ed.vectors.rows(), ed.vectors.cols());
    for (Eigen::Index j = 0; j < ed.values.size(); ++j)
      if (ed.values(j) < cutoff) ker += projector(ed.vectors.col(j));
    if (ker.isZero(0.0)) continue;
    any = true;
    for (const auto& e : embed(to_sparse(ker, 1e-15), spec.dims, c.parties)) k(e.row, e.col) += e.value;
  }
  if (!any) return {};
  const auto ed = eigh(hermitian_part(k));
  Eigen::Index r = 0;
  while (r < ed.values.size() && ed.values(r) < 1e-8) ++r;
  if (r == 0) throw InfeasibleSpec("marginal supports have trivial intersection");
  return ed.vectors.leftCols(r);
}

// When the marginal rows leave no freedom inside the face, the one compatible
// state can still be singular there (e.g. a pure state fixed by its
// marginals). Shrinking the face to its range restores an interior point.
void pin_face(Program& pr) {
  const auto n = static_cast<Eigen::Index>(pr.problem.blocks[static_cast<std::size_t>(pr.rho_block)]);
  const CMatrix v = pr.face.size() ? pr.face : CMatrix::Identity(n, n);
  const auto r = static_cast<int>(v.cols());
  const auto m = static_cast<Eigen::Index>(pr.map.rows.size());
  if (static_cast<Eigen::Index>(r) * r > m) return;
  const auto basis = hermitian_basis(r);
  Eigen::MatrixXd a(m, static_cast<Eigen::Index>(basis.size()));
  RVector b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    CMatrix f = CMatrix::Zero(n, n);
    for (const auto& t : pr.map.rows[static_cast<std::size_t>(i)].lhs.terms)
      if (t.block == pr.rho_block)
        for (const auto& e : t.matrix) f(e.row, e.col) += e.value;
    a.row(i) = basis_coefficients(hermitian_part(v.adjoint() * f * v)).transpose();
    b(i) = pr.map.rows[static_cast<std::size_t>(i)].rhs;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < a.cols()) return;
  const RVector x = qr.solve(b);
  if ((a * x - b).norm() > 1e-8 * (1.0 + b.norm())) return;
  CMatrix xm = CMatrix::Zero(r, r);
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (const auto& e : basis[k]) xm(e.row, e.col) += x(static_cast<Eigen::Index>(k)) * e.value;
  const auto ed = eigh(hermitian_part(xm));
  const double top = std::max(ed.values.maxCoeff(), 0.0);
  if (ed.values.minCoeff() < -1e-7 * std::max(top, 1.0))
    throw InfeasibleSpec("marginal constraints admit no joint state");
  Eigen::Index first = 0;
  while (first < ed.values.size() && ed.values(first) <= 1e-9 * top) ++first;
  if (first == 0) return;
  pr.face = v * ed.vectors.rightCols(ed.values.size() - first);
}

// Rewrites every functional on the rho block as one on V^H rho V and
// composes V into the face.
void apply_face(Program& pr, const CMatrix& v) {
  if (v.size() == 0) return;
  const int n = static_cast<int>(v.rows());
  auto rewrite = [&](sdp::LinearFunctional& f) {
    for (auto& t : f.terms) {
      if (t.block != pr.rho_block) continue;
      CMatrix fv = CMatrix::Zero(n, v.cols());
      for (const auto& e : t.matrix) fv.row(e.row) += e.value * v.row(e.col);
      t.matrix = to_sparse(hermitian_part(v.adjoint() * fv), 1e-14);
    }
  };
  rewrite(pr.problem.objective);
  for (auto& c : pr.problem.constraints) rewrite(c.lhs);
  pr.problem.blocks[static_cast<std::size_t>(pr.rho_block)] = static_cast<int>(v.cols());
  pr.face = pr.face.size() ? CMatrix(pr.face * v) : v;
}

// Faces that the marginal supports do not reveal: maximize t subject to
// rho - t I >= 0 over the compatible set. Both sides of this program are
// strictly feasible. When t* = 0 the dual slack Z = A^T y is PSD with
// tr(Z rho) = b.y = 0 for every compatible rho, so all of them live in ker Z.
// The kernel is only as sharp as sqrt(b.y / gap(Z)), hence the tight
// tolerance. Returns the kernel in current coordinates, or an empty matrix
// when rho has an interior point or the auxiliary solve fails.
CMatrix hidden_face(const Program& pr, const CertifyOptions& opts) {
  const int r = pr.problem.blocks[static_cast<std::size_t>(pr.rho_block)];
  sdp::SdpProblem aux;
  aux.free_scalars = 1;
  const int w = aux.add_block(r);
  aux.objective.scalars.push_back({0, 1.0});
  for (std::size_t i = 0; i < pr.map.rows.size(); ++i) {
    const auto& row = pr.problem.constraints[i];
    sdp::Constraint c;
    c.rhs = row.rhs;
    double tr = 0.0;
    for (const auto& t : row.lhs.terms) {
      if (t.block != pr.rho_block) continue;
      c.lhs.terms.push_back({w, t.matrix});
      for (const auto& e : t.matrix)
        if (e.row == e.col) tr += e.value.real();
    }
    if (tr != 0.0) c.lhs.scalars.push_back({0, tr});
    aux.constraints.push_back(std::move(c));
  }
  sdp::SolveOptions so = opts.sdp;
  so.log = nullptr;
  so.tol = std::min(so.tol, 1e-14);
  so.max_iters = std::max(so.max_iters, 400);
  const auto sol = sdp::solve(aux, so);
  if (!sol.optimal() || sol.primal_scalars[0] > 1e-9) return {};
  const auto ez = eigh(hermitian_part(sol.dual_slacks[0]));
  const double top = ez.values.maxCoeff();
  if (!(top > 0.0)) return {};
  Eigen::Index k = 0;
  while (k < ez.values.size() && ez.values(k) <= 1e-6 * top) ++k;
  if (k == 0 || k == ez.values.size()) return {};
  return ez.vectors.leftCols(k);
}

// A numerically computed face is accurate to about 1e-7, so the marginal
// rows restricted to it are consistent only to that level. Replace their
// right-hand sides by the nearest consistent values (least squares over the
// restricted rows, singular values below 1e-5 of the largest treated as
// zero); the certificate still reports violations against the original spec.
void project_rhs(Program& pr) {
  const int r = pr.problem.blocks[static_cast<std::size_t>(pr.rho_block)];
  const auto m = static_cast<Eigen::Index>(pr.map.rows.size());
  const auto basis = hermitian_basis(r);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(basis.size()));
  RVector b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = pr.problem.constraints[static_cast<std::size_t>(i)];
    CMatrix f = CMatrix::Zero(r, r);
    for (const auto& t : row.lhs.terms)
      if (t.block == pr.rho_block)
        for (const auto& e : t.matrix) f(e.row, e.col) += e.value;
    a.row(i) = basis_coefficients(hermitian_part(f)).transpose();
    b(i) = row.rhs;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  const RVector& sv = svd.singularValues();
  Eigen::Index k = 0;
  while (k < sv.size() && sv(k) > 1e-5 * sv(0)) ++k;
  const Eigen::MatrixXd u = svd.matrixU().leftCols(k);
  const RVector proj = u * (u.transpose() * b);
  for (Eigen::Index i = 0; i < m; ++i) pr.problem.constraints[static_cast<std::size_t>(i)].rhs = proj(i);
}

sdp::SdpSolution solve_program(Program& pr, const CertifyOptions& opts) {
  CMatrix v = std::move(pr.face);
  pr.face = CMatrix();
  apply_face(pr, v);
  sdp::SdpSolution sol = sdp::solve(pr.problem, opts.sdp);
  // Only on failure: the auxiliary face is less exact than the support and
  // pinning steps, which already settle most specs.
  for (int round = 0; opts.facial_reduction && round < 4; ++round) {
    if (sol.optimal() || sol.status == sdp::Status::Infeasible) break;
    const CMatrix face = hidden_face(pr, opts);
    if (face.size() == 0) break;
    apply_face(pr, face);
    project_rhs(pr);
    sol = sdp::solve(pr.problem, opts.sdp);
  }
  if (pr.face.size() != 0 && !sol.primal_blocks.empty()) {
    auto& x = sol.primal_blocks[static_cast<std::size_t>(pr.rho_block)];
    x = pr.face * x * pr.face.adjoint();
  }
  return sol;
}

Program start_program(const MarginalSpec& spec, const CertifyOptions& opts) {
  spec.validate();
  Program pr;
  pr.face = feasible_face(spec, opts.facial_reduction);
  pr.rho_block = pr.problem.add_block(static_cast<int>(spec.dim()));
  pr.map = build_marginal_map(spec, pr.rho_block);
  pr.problem.constraints = pr.map.rows;
  if (opts.facial_reduction) pin_face(pr);
  if (spec.constraints.empty()) {
    sdp::Constraint tr;
    SparseMatrix id;
    for (int i = 0; i < static_cast<int>(spec.dim()); ++i) id.push_back({i, i, cd(1.0)});
    tr.lhs.terms.push_back({pr.rho_block, std::move(id)});
    tr.rhs = 1.0;
    pr.problem.constraints.push_back(std::move(tr));
  }
  return pr;
}

void check_target(const MarginalSpec& spec, const SubsystemSet& target) {
  target.check(spec.n_parties());
}

Certificate finish(const MarginalSpec& spec, const Program& pr, const sdp::SdpSolution& sol,
                   CertificateKind kind) {
  if (sol.status == sdp::Status::Infeasible)
    throw InfeasibleSpec("marginal constraints admit no joint state");
  Certificate c;
  c.kind = kind;
  c.status = sol.status;
  c.residuals = sol.residuals;
  c.iterations = sol.iterations;
  const CMatrix rho = hermitian_part(sol.primal_blocks[static_cast<std::size_t>(pr.rho_block)]);
  c.joint_state = DensityMatrix::unchecked(spec.dims, rho);
  c.marginal_violation = marginal_violations(spec, rho);
  for (std::size_t i = 0; i < spec.constraints.size(); ++i) {
    const int side = static_cast<int>(spec.constraints[i].sigma.dim());
    CMatrix h = CMatrix::Zero(side, side);
    const auto& basis = pr.map.basis[i];
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const double y = sol.dual_multipliers[static_cast<std::size_t>(pr.map.first_row[i]) + k];
      for (const auto& e : basis[k]) h(e.row, e.col) += y * e.value;
    }
    c.duals.push_back(std::move(h));
  }
  return c;
}

SparseMatrix scaled_identity(int n, double s) {
  SparseMatrix out;
  for (int i = 0; i < n; ++i) out.push_back({i, i, cd(s)});
  return out;
}

// Hermitian H with tr(H X) = Re X(p, q) (or Im X(p, q)) for Hermitian X.
SparseMatrix entry_functional(int p, int q, bool imag) {
  if (p == q) return imag ? SparseMatrix{} : SparseMatrix{{p, p, cd(1.0)}};
  if (imag) return {{p, q, cd(0.0, 0.5)}, {q, p, cd(0.0, -0.5)}};
  return {{p, q, cd(0.5)}, {q, p, cd(0.5)}};
}

// An index rearrangement of the target marginal: out(r, c) = rho_T(src).
struct IndexMap {
  int rows = 0, cols = 0;
  std::vector<std::pair<int, int>> src;  // row-major over (r, c)
};

template <class F>
IndexMap index_map(int dim_t, F&& transform) {
  CMatrix label(dim_t, dim_t);
  for (int a = 0; a < dim_t; ++a)
    for (int b = 0; b < dim_t; ++b) label(a, b) = static_cast<double>(a * dim_t + b);
  const CMatrix out = transform(label);
  IndexMap m;
  m.rows = static_cast<int>(out.rows());
  m.cols = static_cast<int>(out.cols());
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) {
      const int v = static_cast<int>(std::lround(out(r, c).real()));
      m.src.emplace_back(v / dim_t, v % dim_t);
    }
  return m;
}

// min sum_j weight * ||L_j(rho_T)||_1 via [[P_j, L_j],[L_j^H, Q_j]] >= 0 and
// objective (tr P_j + tr Q_j)/2. Returns the solved program.
struct TraceNormResult {
  Program program;
  sdp::SdpSolution solution;
};

TraceNormResult min_trace_norm(const MarginalSpec& spec, const SubsystemSet& target,
                               const std::vector<IndexMap>& maps, double weight,
                               const CertifyOptions& opts) {
  Program pr = start_program(spec, opts);
  auto& p = pr.problem;
  for (const auto& m : maps) {
    const int side = m.rows + m.cols;
    const int blk = p.add_block(side);
    p.objective.terms.push_back({blk, scaled_identity(side, -0.5 * weight)});
    for (int r = 0; r < m.rows; ++r)
      for (int c = 0; c < m.cols; ++c) {
        const auto [a, b] = m.src[static_cast<std::size_t>(r * m.cols + c)];
        for (bool imag : {false, true}) {
          sdp::Constraint row;
          const SparseMatrix lhs = entry_functional(r, m.rows + c, imag);
          SparseMatrix rhs = entry_functional(a, b, imag);
          for (auto& e : rhs) e.value = -e.value;
          // The big-block entry (r, rows + c) is never on the diagonal, so
          // the imaginary functional is never empty there.
          row.lhs.terms.push_back({blk, lhs});
          if (!rhs.empty()) row.lhs.terms.push_back({pr.rho_block, embed(rhs, spec.dims, target)});
          p.constraints.push_back(std::move(row));
        }
      }
  }
  sdp::SdpSolution sol = solve_program(pr, opts);
  return {std::move(pr), std::move(sol)};
}

}  // namespace

Certificate lambda_star(const MarginalSpec& spec, const SubsystemSet& target, const SubsystemSet& cut,
                        const CertifyOptions& opts) {
  check_target(spec, target);
  const SubsystemSet rel_cut = target.relative(cut);
  const Dims tdims = target.restrict_dims(spec.dims);
  const int dt = static_cast<int>(total_dim(tdims));

  Program pr = start_program(spec, opts);
  auto& p = pr.problem;
  const int y_block = p.add_block(dt);
  // Y = rho_T^Gamma - lambda I with lambda = (1 - tr Y)/d_T: fix the traceless
  // part of Y and maximize -tr(Y)/d_T.
  const auto basis = product_basis(tdims);
  for (std::size_t l = 1; l < basis.size(); ++l) {
    const CMatrix e = to_dense(basis[l], dt);
    const SparseMatrix e_pt = to_sparse(partial_transpose(e, tdims, rel_cut));
    SparseMatrix neg = basis[l];
    for (auto& x : neg) x.value = -x.value;
    sdp::Constraint row;
    row.lhs.terms.push_back({pr.rho_block, embed(e_pt, spec.dims, target)});
    row.lhs.terms.push_back({y_block, std::move(neg)});
    p.constraints.push_back(std::move(row));
  }
  p.objective.terms.push_back({y_block, scaled_identity(dt, -1.0 / dt)});

  const auto sol = solve_program(pr, opts);
  Certificate c = finish(spec, pr, sol, CertificateKind::LambdaStar);
  c.value = 1.0 / dt + sol.primal_objective;
  c.dual_value = 1.0 / dt + sol.dual_objective;
  const CMatrix rho_t = partial_trace(c.joint_state.matrix(), spec.dims, target);
  c.extra["joint_min_pt_eig"] = eigvalsh(hermitian_part(partial_transpose(rho_t, tdims, rel_cut)))(0);
  return c;
}

Certificate lambda_star(const MarginalSpec& spec, const SubsystemSet& target, const CertifyOptions& opts) {
  if (target.size() < 2) throw std::invalid_argument("lambda_star: target needs at least two parties");
  return lambda_star(spec, target, SubsystemSet{target[1]}, opts);
}

Certificate witness_opt(const MarginalSpec& spec, const SubsystemSet& target, const CMatrix& w,
                        const CertifyOptions& opts) {
  check_target(spec, target);
  const Dims tdims = target.restrict_dims(spec.dims);
  if (static_cast<std::size_t>(w.rows()) != total_dim(tdims) || !is_hermitian(w))
    throw std::invalid_argument("witness_opt: W must be Hermitian on the target space");
  Program pr = start_program(spec, opts);
  pr.problem.objective.terms.push_back({pr.rho_block, embed(to_sparse(hermitian_part(w)), spec.dims, target)});
  const auto sol = solve_program(pr, opts);
  Certificate c = finish(spec, pr, sol, CertificateKind::Witness);
  c.value = sol.primal_objective;
  c.dual_value = sol.dual_objective;
  c.extra["energy"] = -c.value;
  return c;
}

Certificate min_ccnr(const MarginalSpec& spec, const SubsystemSet& target, const CertifyOptions& opts) {
  check_target(spec, target);
  if (target.size() != 2) throw std::invalid_argument("min_ccnr: target must have two parties");
  const Dims tdims = target.restrict_dims(spec.dims);
  const int dt = static_cast<int>(total_dim(tdims));
  const IndexMap m = index_map(dt, [&](const CMatrix& x) { return realign(x, tdims[0], tdims[1]); });
  auto res = min_trace_norm(spec, target, {m}, 1.0, opts);
  Certificate c = finish(spec, res.program, res.solution, CertificateKind::Ccnr);
  c.value = -res.solution.primal_objective;
  c.dual_value = -res.solution.dual_objective;
  c.duals.clear();
  return c;
}

Certificate gme_minmax(const MarginalSpec& spec, const SubsystemSet& target, const CertifyOptions& opts) {
  check_target(spec, target);
  if (target.size() != 3) throw std::invalid_argument("gme_minmax: target must have three parties");
  const Dims tdims = target.restrict_dims(spec.dims);
  const int d = tdims[0];
  if (tdims[1] != d || tdims[2] != d) throw std::invalid_argument("gme_minmax: unequal local dimensions");
  const int dt = d * d * d;

  std::vector<IndexMap> pt_maps, re_maps;
  for (int k = 0; k < 3; ++k) {
    pt_maps.push_back(index_map(dt, [&](const CMatrix& x) { return partial_transpose(x, tdims, SubsystemSet{k}); }));
    // k | (k+1, k+2): move party k to the front, then realign d x d^2.
    const std::vector<int> order{k, (k + 1) % 3, (k + 2) % 3};
    re_maps.push_back(index_map(dt, [&](const CMatrix& x) {
      return realign(permute_subsystems(x, tdims, order), d, d * d);
    }));
  }
  auto m_res = min_trace_norm(spec, target, pt_maps, 1.0 / 3.0, opts);
  auto n_res = min_trace_norm(spec, target, re_maps, 1.0 / 3.0, opts);
  const double m_val = -m_res.solution.primal_objective;
  const double n_val = -n_res.solution.primal_objective;

  const bool m_wins = m_val >= n_val;
  auto& win = m_wins ? m_res : n_res;
  Certificate c = finish(spec, win.program, win.solution, CertificateKind::GmeMN);
  // Both programs must have converged for the pair to be meaningful.
  if (m_res.solution.status == sdp::Status::Infeasible || n_res.solution.status == sdp::Status::Infeasible)
    throw InfeasibleSpec("marginal constraints admit no joint state");
  if (!m_res.solution.optimal() || !n_res.solution.optimal())
    c.status = m_res.solution.optimal() ? n_res.solution.status : m_res.solution.status;
  c.duals.clear();
  c.value = std::max(m_val, n_val);
  c.dual_value = std::max(-m_res.solution.dual_objective, -n_res.solution.dual_objective);
  c.extra["M"] = m_val;
  c.extra["N"] = n_val;
  c.extra["bound"] = (1.0 + 2.0 * d) / 3.0;
  return c;
}

Certificate min_fidelity(const MarginalSpec& spec, const CVector& psi, const CertifyOptions& opts) {
  if (static_cast<std::size_t>(psi.size()) != spec.dim())
    throw std::invalid_argument("min_fidelity: state length does not match the spec");
  if (std::abs(psi.norm() - 1.0) > 1e-9) throw std::invalid_argument("min_fidelity: state not normalized");
  Program pr = start_program(spec, opts);
  pr.problem.objective.terms.push_back({pr.rho_block, to_sparse(-projector(psi))});
  const auto sol = solve_program(pr, opts);
  Certificate c = finish(spec, pr, sol, CertificateKind::Uniqueness);
  c.value = -sol.primal_objective;
  c.dual_value = -sol.dual_objective;
  c.duals.clear();
  // The fidelity of the returned state itself (not the objective estimate).
  c.extra["joint_fidelity"] = std::clamp(pure_fidelity(c.joint_state, psi), 0.0, 1.0);
  c.extra["infidelity"] = std::clamp(1.0 - c.value, 0.0, 1.0);
  return c;
}

Certificate min_fidelity(const MarginalSpec& spec, const DensityMatrix& reference, const CertifyOptions& opts) {
  if (reference.dims() != spec.dims) throw std::invalid_argument("min_fidelity: reference dims do not match the spec");
  const auto ed = eigh(reference.matrix());
  const double top = ed.values.maxCoeff();
  CMatrix p = CMatrix::Zero(ed.vectors.rows(), ed.vectors.rows());
  int rank = 0;
  for (Eigen::Index j = 0; j < ed.values.size(); ++j)
    if (ed.values(j) > 1e-9 * top) {
      p += projector(ed.vectors.col(j));
      ++rank;
    }
  if (rank == 1) {
    Certificate c = min_fidelity(spec, CVector(ed.vectors.col(ed.values.size() - 1)), opts);
    c.extra["support_rank"] = 1;
    return c;
  }
  Program pr = start_program(spec, opts);
  pr.problem.objective.terms.push_back({pr.rho_block, to_sparse(-p)});
  const auto sol = solve_program(pr, opts);
  Certificate c = finish(spec, pr, sol, CertificateKind::Uniqueness);
  c.value = -sol.primal_objective;
  c.dual_value = -sol.dual_objective;
  c.duals.clear();
  c.extra["joint_fidelity"] = std::clamp((p * c.joint_state.matrix()).trace().real(), 0.0, 1.0);
  c.extra["infidelity"] = std::clamp(1.0 - c.value, 0.0, 1.0);
  c.extra["support_rank"] = rank;
  c.extra["joint_distance"] = trace_distance(c.joint_state.matrix(), reference.matrix());
  return c;
}

MarginalFlag marginal_flag(const DensityMatrix& sigma, double tol_psd) {
  if (sigma.n_parties() != 2) throw std::invalid_argument("marginal_flag: input must be bipartite");
  const double lmin = min_eigenvalue(partial_transpose(sigma, SubsystemSet{1}));
  if (lmin < -tol_psd) return MarginalFlag::Entangled;
  const int da = sigma.dims()[0], db = sigma.dims()[1];
  if (da * db <= 6) return MarginalFlag::Separable;
  if (trace_norm(realign(sigma)) > 1.0 + tol_psd) return MarginalFlag::Entangled;
  return MarginalFlag::PptUndecided;
}

bool certifies(const Certificate& c, double eps_cert) {
  switch (c.kind) {
    case CertificateKind::LambdaStar:
    case CertificateKind::Witness: return c.value < -eps_cert;
    case CertificateKind::Ccnr: return c.value > 1.0 + eps_cert;
    case CertificateKind::GmeMN: return c.value > c.extra.at("bound") + eps_cert;
    case CertificateKind::Uniqueness: return false;
  }
  return false;
}

TransitivityVerdict verdict(const MarginalSpec& spec, const SubsystemSet& target, const CertifyOptions& opts) {
  std::vector<MarginalFlag> flags;
  for (const auto& c : spec.constraints) flags.push_back(marginal_flag(c.sigma, opts.tol_psd));
  return verdict(spec, target, flags, opts);
}

TransitivityVerdict verdict(const MarginalSpec& spec, const SubsystemSet& target,
                            const std::vector<MarginalFlag>& flags, const CertifyOptions& opts) {
  for (const auto& c : spec.constraints)
    if (c.parties == target) throw std::invalid_argument("verdict: target is one of the given marginals");
  if (flags.size() != spec.constraints.size()) throw std::invalid_argument("verdict: one flag per constraint");
  TransitivityVerdict v{target, flags, Outcome::NotCertified, lambda_star(spec, target, opts), 0.0};
  v.lambda_star = v.certificate.value;
  bool certified = v.certificate.solved() && certifies(v.certificate, opts.eps_cert);
  const Dims tdims = target.restrict_dims(spec.dims);
  // For 2x2 and 2x3 targets a non-negative lambda* exhibits a PPT, hence
  // separable, compatible target, so CCNR cannot certify anything there.
  if (!certified && v.lambda_star >= -opts.eps_cert && target.size() == 2 && total_dim(tdims) > 6) {
    Certificate ccnr = min_ccnr(spec, target, opts);
    if (ccnr.solved() && certifies(ccnr, opts.eps_cert)) {
      v.certificate = std::move(ccnr);
      certified = true;
    }
  }
  if (certified) {
    const bool all_ent = std::all_of(flags.begin(), flags.end(), [](MarginalFlag f) { return f == MarginalFlag::Entangled; });
    v.outcome = all_ent ? Outcome::Transitivity : Outcome::Metatransitivity;
  }
  return v;
}

nlohmann::json to_json(const Certificate& c, bool include_state) {
  nlohmann::json j;
  j["kind"] = to_string(c.kind);
  j["value"] = c.value;
  j["dual_value"] = c.dual_value;
  j["status"] = std::string(sdp::to_string(c.status));
  j["iterations"] = c.iterations;
  j["residuals"] = {{"primal", c.residuals.primal}, {"dual", c.residuals.dual}, {"gap", c.residuals.gap}};
  j["marginal_violation"] = c.marginal_violation;
  for (const auto& [k, x] : c.extra) j["extra"][k] = x;
  if (include_state) j["joint_state"] = to_json(c.joint_state);
  return j;
}

nlohmann::json to_json(const TransitivityVerdict& v) {
  nlohmann::json j;
  j["target"] = v.target.indices();
  std::vector<std::string> flags;
  for (auto f : v.input_flags) flags.push_back(to_string(f));
  j["input_flags"] = flags;
  j["outcome"] = to_string(v.outcome);
  j["lambda_star"] = v.lambda_star;
  j["certificate"] = to_json(v.certificate);
  return j;
}

}  // namespace etp
