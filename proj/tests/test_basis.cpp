#include "doctest.h"

#include "etp/hermitian_basis.hpp"
#include "etp/marginals.hpp"
#include "etp/rng.hpp"
#include "etp/states.hpp"

using namespace etp;

TEST_CASE("hermitian basis is orthonormal and Hermitian") {
  for (int d : {2, 3, 4}) {
    const auto basis = hermitian_basis(d);
    REQUIRE(basis.size() == static_cast<std::size_t>(d * d));
    std::vector<CMatrix> dense;
    for (const auto& g : basis) dense.push_back(to_dense(g, d));
    CHECK(max_abs_diff(dense[0], CMatrix::Identity(d, d) / std::sqrt(double(d))) < 1e-15);
    for (std::size_t i = 0; i < dense.size(); ++i) {
      CHECK(is_hermitian(dense[i]));
      if (i > 0) CHECK(std::abs(dense[i].trace()) < 1e-15);
      for (std::size_t j = 0; j < dense.size(); ++j) {
        const double expect = i == j ? 1.0 : 0.0;
        CHECK(std::abs((dense[i] * dense[j]).trace() - expect) < 1e-14);
      }
    }
  }
}

TEST_CASE("basis coefficients reconstruct a Hermitian matrix") {
  const CMatrix rho = werner_state({3, 0.3}).matrix();
  const RVector c = basis_coefficients(rho);
  const auto flat = hermitian_basis(9);
  CMatrix back2 = CMatrix::Zero(9, 9);
  for (std::size_t k = 0; k < flat.size(); ++k) back2 += c(static_cast<Eigen::Index>(k)) * to_dense(flat[k], 9);
  CHECK(max_abs_diff(back2, rho) < 1e-14);
}

TEST_CASE("sparse round trip") {
  const CMatrix m = upb_state(Upb::Tiles).matrix();
  CHECK(max_abs_diff(to_dense(to_sparse(m), 9), m) == 0.0);
}

TEST_CASE("marginal map: one row per basis element") {
  MarginalSpec spec{{2, 2}, {}};
  spec.add({0}, DensityMatrix({2}, CMatrix::Identity(2, 2) / 2.0));
  CHECK(build_marginal_map(spec).rows.size() == 4);

  const auto tree = w_tree_spec(4, 0.5, TreeShape::Path);
  CHECK(build_marginal_map(tree).rows.size() == 3 * 16);
}

TEST_CASE("marginal map reproduces partial traces") {
  const auto tree = w_tree_spec(3, 0.7, TreeShape::Path);
  const auto map = build_marginal_map(tree);
  const RVector out = apply_marginal_map(map, w_noisy_global(3, 0.7).matrix());
  for (std::size_t i = 0; i < map.rows.size(); ++i)
    CHECK(std::abs(out(static_cast<Eigen::Index>(i)) - map.rows[i].rhs) < 1e-14);

  // random operator against the direct partial trace in the product basis
  const Dims dims{2, 3, 2};
  const CVector psi = haar_pure(1, 12, 11, 0);
  const CMatrix rho = projector(psi);
  MarginalSpec spec{dims, {}};
  spec.add({0, 1}, partial_trace(DensityMatrix(dims, rho), {0, 1}));
  spec.add({1, 2}, partial_trace(DensityMatrix(dims, rho), {1, 2}));
  const auto m2 = build_marginal_map(spec);
  const RVector vals = apply_marginal_map(m2, rho);
  for (std::size_t i = 0; i < spec.constraints.size(); ++i) {
    const auto& c = spec.constraints[i];
    const CMatrix red = partial_trace(rho, dims, c.parties);
    const auto& basis = m2.basis[i];
    const int side = static_cast<int>(red.rows());
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const double direct = (to_dense(basis[k], side) * red).trace().real();
      CHECK(std::abs(vals(m2.first_row[i] + static_cast<Eigen::Index>(k)) - direct) < 1e-12);
    }
  }
  for (double v : marginal_violations(spec, rho)) CHECK(v < 1e-12);
}

TEST_CASE("marginal spec validation") {
  const DensityMatrix half({2}, CMatrix::Identity(2, 2) / 2.0);
  const DensityMatrix mixed4({2, 2}, CMatrix::Identity(4, 4) / 4.0);
  CHECK_THROWS_AS((MarginalSpec{{2, 2}, {}}.add({0, 1}, mixed4).validate()), std::invalid_argument);
  CHECK_THROWS_AS((MarginalSpec{{2, 2}, {}}.add({0}, half).add({0}, half).validate()), std::invalid_argument);
  CHECK_THROWS_AS((MarginalSpec{{2, 3}, {}}.add({1}, half).validate()), std::invalid_argument);
  CHECK_NOTHROW((MarginalSpec{{2, 2, 2}, {}}.add({0, 1}, mixed4).add({1}, half).validate()));
}
