// SPDX-License-Identifier: Apache-2.0

#include "etp/marginals.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "index_util.hpp"

namespace etp {

void MarginalSpec::validate() const {
  if (dims.empty()) throw std::invalid_argument("MarginalSpec: no parties");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("MarginalSpec: dimension < 1");
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    c.parties.check(dims.size());
    if (c.parties.size() == dims.size())
      throw std::invalid_argument("MarginalSpec: the full system cannot be a constraint");
    if (c.sigma.dims() != c.parties.restrict_dims(dims))
      throw std::invalid_argument("MarginalSpec: constraint " + std::to_string(i) +
                                  " has dims inconsistent with its parties");
    for (std::size_t j = 0; j < i; ++j)
      if (constraints[j].parties == c.parties)
        throw std::invalid_argument("MarginalSpec: duplicate subsystem set");
  }
}

MarginalSpec& MarginalSpec::add(SubsystemSet parties, DensityMatrix sigma) {
  constraints.push_back({std::move(parties), std::move(sigma)});
  return *this;
}

std::vector<SparseMatrix> product_basis(std::span<const int> dims) {
  std::vector<SparseMatrix> out{SparseMatrix{{0, 0, cd(1.0)}}};
  for (int d : dims) {
    const auto factor = hermitian_basis(d);
    std::vector<SparseMatrix> next;
    next.reserve(out.size() * factor.size());
    for (const auto& a : out)
      for (const auto& b : factor) {
        SparseMatrix k;
        k.reserve(a.size() * b.size());
        for (const auto& ea : a)
          for (const auto& eb : b)
            k.push_back({ea.row * d + eb.row, ea.col * d + eb.col, ea.value * eb.value});
        next.push_back(std::move(k));
      }
    out = std::move(next);
  }
  return out;
}

SparseMatrix embed(const SparseMatrix& op, std::span<const int> dims, const SubsystemSet& parties) {
  parties.check(dims.size());
  const auto on = detail::subset_offsets(dims, parties.indices());
  const auto rest = detail::subset_offsets(dims, parties.complement(dims.size()).indices());
  SparseMatrix out;
  out.reserve(op.size() * rest.size());
  for (const auto& e : op)
    for (std::size_t r : rest)
      out.push_back({static_cast<int>(on[static_cast<std::size_t>(e.row)] + r),
                     static_cast<int>(on[static_cast<std::size_t>(e.col)] + r), e.value});
  return out;
}

MarginalMap build_marginal_map(const MarginalSpec& spec, int block) {
  spec.validate();
  MarginalMap map;
  for (const auto& c : spec.constraints) {
    auto basis = product_basis(c.sigma.dims());
    const CMatrix& sigma = c.sigma.matrix();
    map.first_row.push_back(static_cast<int>(map.rows.size()));
    for (std::size_t k = 0; k < basis.size(); ++k) {
      sdp::Constraint row;
      row.lhs.terms.push_back({block, embed(basis[k], spec.dims, c.parties)});
      cd coeff = 0.0;
      for (const auto& e : basis[k]) coeff += e.value * sigma(e.col, e.row);
      row.rhs = coeff.real();
      map.rows.push_back(std::move(row));
    }
    map.basis.push_back(std::move(basis));
  }
  return map;
}

RVector apply_marginal_map(const MarginalMap& map, const CMatrix& rho) {
  RVector out(static_cast<Eigen::Index>(map.rows.size()));
  for (std::size_t i = 0; i < map.rows.size(); ++i) {
    cd acc = 0.0;
    for (const auto& t : map.rows[i].lhs.terms)
      for (const auto& e : t.matrix) acc += e.value * rho(e.col, e.row);
    out(static_cast<Eigen::Index>(i)) = acc.real();
  }
  return out;
}

std::vector<double> marginal_violations(const MarginalSpec& spec, const CMatrix& rho) {
  std::vector<double> out;
  for (const auto& c : spec.constraints)
    out.push_back(trace_distance(partial_trace(rho, spec.dims, c.parties), c.sigma.matrix()));
  return out;
}

}  // namespace etp
