// SPDX-License-Identifier: Apache-2.0

#include "etp/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "etp/sdp_kernels.hpp"

namespace etp::sdp {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::MaxIterations: return "MaxIterations";
    case Status::NumericalTrouble: return "NumericalTrouble";
  }
  return "?";
}

void SdpProblem::validate() const {
  for (int s : blocks)
    if (s < 1) throw std::invalid_argument("SdpProblem: block side < 1");
  if (free_scalars < 0) throw std::invalid_argument("SdpProblem: negative scalar count");
  auto check = [&](const LinearFunctional& f, const std::string& what) {
    for (const auto& t : f.terms) {
      if (t.block < 0 || t.block >= static_cast<int>(blocks.size()))
        throw std::invalid_argument(what + ": block index out of range");
      const int n = blocks[static_cast<std::size_t>(t.block)];
      for (const auto& e : t.matrix) {
        if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n)
          throw std::invalid_argument(what + ": entry out of range");
        if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag()))
          throw std::invalid_argument(what + ": non-finite entry");
      }
      if (!is_hermitian(to_dense(t.matrix, n), 1e-12))
        throw std::invalid_argument(what + ": operator is not Hermitian");
    }
    for (const auto& [k, v] : f.scalars) {
      if (k < 0 || k >= free_scalars) throw std::invalid_argument(what + ": scalar out of range");
      if (!std::isfinite(v)) throw std::invalid_argument(what + ": non-finite scalar coefficient");
    }
  };
  check(objective, "objective");
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    check(constraints[i].lhs, "constraint " + std::to_string(i));
    if (!std::isfinite(constraints[i].rhs))
      throw std::invalid_argument("constraint " + std::to_string(i) + ": non-finite rhs");
  }
}

CMatrix psd_project(const CMatrix& m) {
  const auto ed = eigh(m);
  const RVector clipped = ed.values.cwiseMax(0.0);
  return ed.vectors * clipped.cast<cd>().asDiagonal() * ed.vectors.adjoint();
}

namespace {

using Blocks = std::vector<CMatrix>;

// Minimization form: min <C, X> s.t. A(X) = b, X PSD (free scalars split
// into pairs of 1x1 blocks). Rows of A are scaled to unit Frobenius norm.
struct StandardForm {
  std::vector<int> sizes;
  int n_user_blocks = 0;
  int n_scalars = 0;
  Blocks cost;
  std::vector<std::vector<std::pair<int, SparseMatrix>>> rows;  // all constraints
  RVector rhs;                                // all constraints, scaled
  RVector row_scale;                          // original = scaled * row_scale
  std::vector<int> selected;                  // independent subset
  std::vector<kernels::BlockOperators> ops;   // selected rows only, indexed 0..|selected|
};

int scalar_block(const StandardForm& sf, int k, bool negative) {
  return sf.n_user_blocks + 2 * k + (negative ? 1 : 0);
}

std::vector<std::pair<int, SparseMatrix>> lower(const StandardForm& sf, const LinearFunctional& f) {
  std::vector<std::pair<int, SparseMatrix>> out;
  for (const auto& t : f.terms) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == t.block; });
    if (it == out.end()) {
      out.emplace_back(t.block, t.matrix);
    } else {
      it->second.insert(it->second.end(), t.matrix.begin(), t.matrix.end());
    }
  }
  for (const auto& [k, v] : f.scalars) {
    out.emplace_back(scalar_block(sf, k, false), SparseMatrix{{0, 0, cd(v)}});
    out.emplace_back(scalar_block(sf, k, true), SparseMatrix{{0, 0, cd(-v)}});
  }
  for (auto& [b, m] : out) kernels::canonicalize(m);
  std::erase_if(out, [](const auto& p) { return p.second.empty(); });
  // merge duplicate scalar blocks produced by repeated scalar entries
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& c) { return a.first < c.first; });
  std::vector<std::pair<int, SparseMatrix>> merged;
  for (auto& p : out) {
    if (!merged.empty() && merged.back().first == p.first) {
      merged.back().second.insert(merged.back().second.end(), p.second.begin(), p.second.end());
      kernels::canonicalize(merged.back().second);
    } else {
      merged.push_back(std::move(p));
    }
  }
  return merged;
}

double sparse_dot(const SparseMatrix& a, const SparseMatrix& b) {
  // Re tr(A B) for Hermitian A, B = Re sum A(r,c) conj(B(r,c)); both sorted.
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const auto ka = std::make_pair(a[i].row, a[i].col);
    const auto kb = std::make_pair(b[j].row, b[j].col);
    if (ka < kb) {
      ++i;
    } else if (kb < ka) {
      ++j;
    } else {
      acc += (a[i].value * std::conj(b[j].value)).real();
      ++i;
      ++j;
    }
  }
  return acc;
}

double row_dot(const std::vector<std::pair<int, SparseMatrix>>& a,
               const std::vector<std::pair<int, SparseMatrix>>& b) {
  double acc = 0.0;
  for (const auto& [ba, ma] : a)
    for (const auto& [bb, mb] : b)
      if (ba == bb) acc += sparse_dot(ma, mb);
  return acc;
}

struct Selection {
  std::vector<int> selected;
  bool consistent = true;
};

// Pivoted Cholesky on the Gram matrix of the (scaled) constraint rows.
Selection select_independent(const StandardForm& sf) {
  const int m = static_cast<int>(sf.rows.size());
  Eigen::MatrixXd gram(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) gram(i, j) = gram(j, i) = row_dot(sf.rows[i], sf.rows[j]);

  Selection sel;
  if (m == 0) return sel;
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd diag = gram.diagonal();
  std::vector<int> perm(m);
  for (int i = 0; i < m; ++i) perm[i] = i;
  const double scale = std::max(1.0, diag.maxCoeff());
  int rank = 0;
  for (; rank < m; ++rank) {
    int piv = rank;
    for (int i = rank; i < m; ++i)
      if (diag(perm[i]) > diag(perm[piv])) piv = i;
    if (diag(perm[piv]) <= 1e-10 * scale) break;
    std::swap(perm[rank], perm[piv]);
    const int p = perm[rank];
    const double lpp = std::sqrt(diag(p));
    l(p, rank) = lpp;
    for (int i = rank + 1; i < m; ++i) {
      const int r = perm[i];
      double v = gram(r, p);
      for (int k = 0; k < rank; ++k) v -= l(r, k) * l(p, k);
      l(r, rank) = v / lpp;
      diag(r) -= l(r, rank) * l(r, rank);
    }
  }
  sel.selected.assign(perm.begin(), perm.begin() + rank);
  std::sort(sel.selected.begin(), sel.selected.end());

  if (rank < m) {
    Eigen::MatrixXd gss(rank, rank);
    Eigen::VectorXd bs(rank);
    for (int i = 0; i < rank; ++i) {
      bs(i) = sf.rhs(sel.selected[i]);
      for (int j = 0; j < rank; ++j) gss(i, j) = gram(sel.selected[i], sel.selected[j]);
    }
    Eigen::LDLT<Eigen::MatrixXd> fac(gss);
    std::vector<char> is_sel(m, 0);
    for (int s : sel.selected) is_sel[s] = 1;
    for (int r = 0; r < m; ++r) {
      if (is_sel[r]) continue;
      Eigen::VectorXd gsr(rank);
      for (int i = 0; i < rank; ++i) gsr(i) = gram(sel.selected[i], r);
      const Eigen::VectorXd c = fac.solve(gsr);
      const double mismatch = std::abs(sf.rhs(r) - c.dot(bs));
      if (mismatch > 1e-8 * (1.0 + std::abs(sf.rhs(r)) + c.cwiseAbs().dot(bs.cwiseAbs()))) {
        sel.consistent = false;
        break;
      }
    }
  }
  return sel;
}

StandardForm build_standard_form(const SdpProblem& p) {
  StandardForm sf;
  sf.n_user_blocks = static_cast<int>(p.blocks.size());
  sf.n_scalars = p.free_scalars;
  sf.sizes = p.blocks;
  for (int k = 0; k < p.free_scalars; ++k) {
    sf.sizes.push_back(1);
    sf.sizes.push_back(1);
  }
  for (int s : sf.sizes) sf.cost.push_back(CMatrix::Zero(s, s));
  for (const auto& [b, m] : lower(sf, p.objective))
    sf.cost[static_cast<std::size_t>(b)] -= to_dense(m, sf.sizes[static_cast<std::size_t>(b)]);
  for (auto& c : sf.cost) c = hermitian_part(c);

  const int m = static_cast<int>(p.constraints.size());
  sf.rhs.resize(m);
  sf.row_scale.resize(m);
  for (int i = 0; i < m; ++i) {
    auto row = lower(sf, p.constraints[static_cast<std::size_t>(i)].lhs);
    const double nrm = std::sqrt(row_dot(row, row));
    const double s = nrm > 0.0 ? nrm : 1.0;
    for (auto& [b, mat] : row)
      for (auto& e : mat) e.value /= s;
    sf.rows.push_back(std::move(row));
    sf.rhs(i) = p.constraints[static_cast<std::size_t>(i)].rhs / s;
    sf.row_scale(i) = s;
  }
  return sf;
}

void assemble_selected(StandardForm& sf, const std::vector<int>& selected) {
  sf.selected = selected;
  sf.ops.assign(sf.sizes.size(), {});
  for (std::size_t b = 0; b < sf.sizes.size(); ++b) sf.ops[b].dim = sf.sizes[b];
  for (std::size_t k = 0; k < selected.size(); ++k) {
    for (const auto& [b, mat] : sf.rows[static_cast<std::size_t>(selected[k])]) {
      sf.ops[static_cast<std::size_t>(b)].rows.push_back(static_cast<int>(k));
      sf.ops[static_cast<std::size_t>(b)].ops.push_back(mat);
    }
  }
}

double inner(const Blocks& a, const Blocks& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i].conjugate().cwiseProduct(b[i])).sum().real();
  return acc;
}

double fro_norm(const Blocks& a) {
  double acc = 0.0;
  for (const auto& m : a) acc += m.squaredNorm();
  return std::sqrt(acc);
}

// Largest alpha with X + alpha dX PSD (infinity if unbounded).
double max_step(const CMatrix& x, const CMatrix& dx) {
  Eigen::LLT<CMatrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const auto lo = llt.matrixL();
  CMatrix tmp = lo.solve(dx);
  CMatrix w = lo.solve(CMatrix(tmp.adjoint()));
  w = hermitian_part(w);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(w, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double max_step(const Blocks& x, const Blocks& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) a = std::min(a, max_step(x[i], dx[i]));
  return a;
}

struct Iterate {
  Blocks x, z;
  RVector y;
};

struct Metrics {
  double relp = 0, reld = 0, gap = 0, relgap = 0, pobj = 0, dobj = 0, mu = 0;
  double worst() const { return std::max({relp, reld, relgap}); }
};

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts) {
  problem.validate();
  StandardForm sf = build_standard_form(problem);
  const int m_all = static_cast<int>(sf.rows.size());
  const auto nb = sf.sizes.size();

  SdpSolution sol;
  sol.dual_multipliers.assign(static_cast<std::size_t>(m_all), 0.0);

  const Selection sel = select_independent(sf);
  assemble_selected(sf, sel.selected);
  sol.dropped_constraints = m_all - static_cast<int>(sel.selected.size());
  const int m = static_cast<int>(sel.selected.size());
  RVector b(m);
  for (int k = 0; k < m; ++k) b(k) = sf.rhs(sel.selected[static_cast<std::size_t>(k)]);

  auto finish_blocks = [&](const Iterate& it) {
    sol.primal_blocks.assign(it.x.begin(), it.x.begin() + sf.n_user_blocks);
    sol.dual_slacks.assign(it.z.begin(), it.z.begin() + sf.n_user_blocks);
    sol.primal_scalars.assign(static_cast<std::size_t>(sf.n_scalars), 0.0);
    for (int k = 0; k < sf.n_scalars; ++k)
      sol.primal_scalars[static_cast<std::size_t>(k)] =
          it.x[static_cast<std::size_t>(scalar_block(sf, k, false))](0, 0).real() -
          it.x[static_cast<std::size_t>(scalar_block(sf, k, true))](0, 0).real();
  };

  const int n_total = std::accumulate(sf.sizes.begin(), sf.sizes.end(), 0);
  Iterate it;
  {
    // SDPT3-style starting point.
    std::vector<double> max_ratio(nb, 0.0), max_anorm(nb, 0.0);
    for (int k = 0; k < m; ++k)
      for (const auto& [bk, mat] : sf.rows[static_cast<std::size_t>(sel.selected[static_cast<std::size_t>(k)])]) {
        double nrm = 0.0;
        for (const auto& e : mat) nrm += std::norm(e.value);
        nrm = std::sqrt(nrm);
        max_ratio[static_cast<std::size_t>(bk)] =
            std::max(max_ratio[static_cast<std::size_t>(bk)], (1.0 + std::abs(b(k))) / (1.0 + nrm));
        max_anorm[static_cast<std::size_t>(bk)] = std::max(max_anorm[static_cast<std::size_t>(bk)], nrm);
      }
    for (std::size_t i = 0; i < nb; ++i) {
      const double n = sf.sizes[i];
      const double xi = std::max({10.0, std::sqrt(n), n * max_ratio[i]});
      const double eta = std::max({10.0, std::sqrt(n), max_anorm[i], sf.cost[i].norm()});
      it.x.push_back(xi * CMatrix::Identity(sf.sizes[i], sf.sizes[i]));
      it.z.push_back(eta * CMatrix::Identity(sf.sizes[i], sf.sizes[i]));
    }
    it.y = RVector::Zero(m);
  }

  const double bnorm = b.norm();
  const double cnorm = fro_norm(sf.cost);

  auto evaluate = [&](const Iterate& s) {
    Metrics mt;
    const RVector ax = kernels::apply_operator(sf.ops, s.x, m, opts.parallel);
    mt.relp = (b - ax).norm() / (1.0 + bnorm);
    Blocks rd = kernels::apply_adjoint(sf.ops, s.y);
    for (std::size_t i = 0; i < nb; ++i) rd[i] = sf.cost[i] - rd[i] - s.z[i];
    mt.reld = fro_norm(rd) / (1.0 + cnorm);
    mt.pobj = inner(sf.cost, s.x);
    mt.dobj = b.dot(s.y);
    mt.gap = std::abs(mt.pobj - mt.dobj);
    mt.relgap = mt.gap / (1.0 + std::abs(mt.pobj) + std::abs(mt.dobj));
    mt.mu = inner(s.x, s.z) / n_total;
    return mt;
  };

  if (opts.log) *opts.log << "iter,primal_res,dual_res,gap,mu,pobj,dobj\n";

  if (!sel.consistent) {
    sol.status = Status::Infeasible;
    finish_blocks(it);
    const Metrics mt = evaluate(it);
    sol.residuals = {mt.relp, mt.reld, mt.gap};
    return sol;
  }

  Iterate best = it;
  Metrics best_m = evaluate(it);
  Status status = Status::MaxIterations;
  int stall = 0;
  int iter = 0;

  for (; iter < opts.max_iters; ++iter) {
    const Metrics mt = evaluate(it);
    if (opts.log)
      *opts.log << iter << ',' << mt.relp << ',' << mt.reld << ',' << mt.gap << ',' << mt.mu << ','
                << -mt.pobj << ',' << -mt.dobj << '\n';
    if (mt.worst() < best_m.worst() * 0.999 || iter == 0) {
      best = it;
      best_m = mt;
      stall = 0;
    } else if (++stall > 12) {
      status = Status::NumericalTrouble;
      break;
    }
    if (mt.relp < opts.tol && mt.reld < opts.tol && mt.relgap < opts.tol) {
      status = Status::Optimal;
      break;
    }

    // Farkas ray: A^T y <= 0 with b.y > 0 certifies primal infeasibility.
    const double by = b.dot(it.y);
    if (mt.relp > 1e-6 && by > 1e6 * (1.0 + cnorm)) {
      Blocks aty = kernels::apply_adjoint(sf.ops, it.y / by);
      double lmax = -std::numeric_limits<double>::infinity();
      for (const auto& blk : aty) lmax = std::max(lmax, eigvalsh(hermitian_part(blk)).maxCoeff());
      if (lmax < 1e-6) {
        status = Status::Infeasible;
        best = it;
        best_m = mt;
        break;
      }
    }

    Blocks zinv(nb);
    bool ok = true;
    for (std::size_t i = 0; i < nb; ++i) {
      Eigen::LLT<CMatrix> llt(it.z[i]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      zinv[i] = hermitian_part(llt.solve(CMatrix::Identity(sf.sizes[i], sf.sizes[i])));
    }
    if (!ok) {
      status = Status::NumericalTrouble;
      break;
    }

    Eigen::MatrixXd schur = kernels::schur_complement(sf.ops, it.x, zinv, m, opts.parallel);
    Eigen::LLT<Eigen::MatrixXd> fac(schur);
    if (fac.info() != Eigen::Success) {
      const double reg = 1e-13 * std::max(1.0, schur.diagonal().maxCoeff());
      schur.diagonal().array() += reg;
      fac.compute(schur);
      if (fac.info() != Eigen::Success) {
        status = Status::NumericalTrouble;
        break;
      }
    }

    const RVector rp = b - kernels::apply_operator(sf.ops, it.x, m, opts.parallel);
    Blocks rd = kernels::apply_adjoint(sf.ops, it.y);
    for (std::size_t i = 0; i < nb; ++i) rd[i] = sf.cost[i] - rd[i] - it.z[i];
    Blocks xrdz(nb);
    for (std::size_t i = 0; i < nb; ++i) xrdz[i] = it.x[i] * rd[i] * zinv[i];
    const RVector a_xrdz = kernels::apply_operator(sf.ops, xrdz, m, opts.parallel);

    // g = Rc Z^{-1}; returns (dX, dy, dZ)
    auto direction = [&](const Blocks& g, Blocks& dx, RVector& dy, Blocks& dz) {
      const RVector rhs = rp - kernels::apply_operator(sf.ops, g, m, opts.parallel) + a_xrdz;
      dy = fac.solve(rhs);
      dz = kernels::apply_adjoint(sf.ops, dy);
      dx.resize(nb);
      for (std::size_t i = 0; i < nb; ++i) {
        dz[i] = rd[i] - dz[i];
        dx[i] = hermitian_part(g[i] - it.x[i] * dz[i] * zinv[i]);
      }
    };

    Blocks g(nb), dxp, dzp, dx, dz;
    RVector dyp, dy;
    for (std::size_t i = 0; i < nb; ++i) g[i] = -it.x[i];
    direction(g, dxp, dyp, dzp);
    const double ap = std::min(1.0, max_step(it.x, dxp));
    const double ad = std::min(1.0, max_step(it.z, dzp));

    Blocks xn(nb), zn(nb);
    for (std::size_t i = 0; i < nb; ++i) {
      xn[i] = it.x[i] + ap * dxp[i];
      zn[i] = it.z[i] + ad * dzp[i];
    }
    const double mu = mt.mu;
    const double ratio = std::max(0.0, inner(xn, zn)) / (mu * n_total);
    const double expon = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
    const double sigma = std::clamp(std::pow(ratio, expon), 0.0, 1.0);

    for (std::size_t i = 0; i < nb; ++i)
      g[i] = sigma * mu * zinv[i] - it.x[i] - dxp[i] * dzp[i] * zinv[i];
    direction(g, dx, dy, dz);

    const double gamma = 0.9 + 0.09 * std::min(ap, ad);
    const double sp = std::min(1.0, gamma * max_step(it.x, dx));
    const double sd = std::min(1.0, gamma * max_step(it.z, dz));
    if (sp < 1e-10 && sd < 1e-10) {
      status = Status::NumericalTrouble;
      break;
    }
    for (std::size_t i = 0; i < nb; ++i) {
      it.x[i] = hermitian_part(it.x[i] + sp * dx[i]);
      it.z[i] = hermitian_part(it.z[i] + sd * dz[i]);
    }
    it.y += sd * dy;
  }

  {
    const Metrics mt = evaluate(it);
    if (mt.worst() <= best_m.worst()) {
      best = it;
      best_m = mt;
    }
  }
  sol.iterations = iter;

  finish_blocks(best);
  for (int k = 0; k < m; ++k) {
    const int orig = sel.selected[static_cast<std::size_t>(k)];
    sol.dual_multipliers[static_cast<std::size_t>(orig)] = -best.y(k) / sf.row_scale(orig);
  }
  sol.primal_objective = -best_m.pobj;
  sol.dual_objective = -best_m.dobj;

  // Primal residual over every original row, dropped ones included.
  {
    RVector res(m_all);
    for (int i = 0; i < m_all; ++i) {
      double v = 0.0;
      for (const auto& [bk, mat] : sf.rows[static_cast<std::size_t>(i)]) {
        cd acc = 0.0;
        for (const auto& e : mat) acc += e.value * best.x[static_cast<std::size_t>(bk)](e.col, e.row);
        v += acc.real();
      }
      res(i) = (v - sf.rhs(i)) * sf.row_scale(i);
    }
    RVector rhs_orig(m_all);
    for (int i = 0; i < m_all; ++i) rhs_orig(i) = sf.rhs(i) * sf.row_scale(i);
    sol.residuals.primal = m_all ? res.norm() / (1.0 + rhs_orig.norm()) : 0.0;
  }
  sol.residuals.dual = best_m.reld;
  sol.residuals.gap = best_m.gap;

  if (status == Status::Infeasible) {
    sol.status = Status::Infeasible;
  } else if (sol.residuals.primal <= opts.accept_residual && sol.residuals.dual <= opts.accept_residual &&
             sol.residuals.gap <= opts.accept_gap * (1.0 + std::abs(sol.primal_objective))) {
    sol.status = Status::Optimal;
  } else if (best_m.relp > 1e-5 && status != Status::MaxIterations) {
    sol.status = Status::Infeasible;
  } else {
    sol.status = status == Status::Optimal ? Status::NumericalTrouble : status;
  }
  return sol;
}

}  // namespace etp::sdp
