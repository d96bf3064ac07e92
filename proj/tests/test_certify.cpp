#include "doctest.h"

#include <cmath>
#include <numeric>

#include "etp/certify.hpp"
#include "etp/rng.hpp"
#include "etp/states.hpp"

using namespace etp;

namespace {

DensityMatrix random_mixed(const Dims& dims, std::uint64_t stream) {
  CounterRng rng(41, stream);
  const auto n = static_cast<Eigen::Index>(total_dim(dims));
  CMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = cd(rng.normal(), rng.normal());
  CMatrix r = g * g.adjoint();
  return DensityMatrix(dims, r / r.trace().real());
}

CMatrix random_hermitian(int dim, std::uint64_t stream) {
  CounterRng rng(43, stream);
  CMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = cd(rng.normal(), rng.normal());
  return (g + g.adjoint()) / 2.0;
}

/// op on `parties` tensored with the identity elsewhere.
CMatrix embed_dense(const CMatrix& op, const Dims& dims, const SubsystemSet& parties) {
  const auto rest = parties.complement(dims.size());
  std::vector<int> old_order = parties.indices();
  old_order.insert(old_order.end(), rest.indices().begin(), rest.indices().end());
  Dims old_dims;
  for (int k : old_order) old_dims.push_back(dims[static_cast<std::size_t>(k)]);
  const auto drest = static_cast<Eigen::Index>(total_dim(rest.restrict_dims(dims)));
  const CMatrix big = kron(op, CMatrix::Identity(drest, drest));
  std::vector<int> order(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k)
    order[k] = static_cast<int>(std::find(old_order.begin(), old_order.end(), static_cast<int>(k)) - old_order.begin());
  return permute_subsystems(big, old_dims, order);
}

MarginalSpec spec_of(const DensityMatrix& rho, std::initializer_list<SubsystemSet> sets) {
  MarginalSpec s{rho.dims(), {}};
  for (const auto& p : sets) s.add(p, partial_trace(rho, p));
  return s;
}

void check_marginals(const Certificate& c) {
  for (double v : c.marginal_violation) CHECK(v <= 1e-6);
}

}  // namespace

TEST_CASE("embed helper agrees with kron on leading parties") {
  const CMatrix h = random_hermitian(4, 0);
  CHECK(max_abs_diff(embed_dense(h, {2, 2, 2}, {0, 1}), kron(h, CMatrix::Identity(2, 2))) == 0.0);
  const CMatrix e = embed_dense(h, {2, 2, 2}, {0, 2});
  const DensityMatrix rho = random_mixed({2, 2, 2}, 0);
  CHECK(std::abs((e * rho.matrix()).trace() - (h * partial_trace(rho, {0, 2}).matrix()).trace()) < 1e-13);
}

TEST_CASE("marginal flags") {
  CHECK(marginal_flag(bell_diagonal({0.1363, 0.4552, 0.0610, 0.3475})) == MarginalFlag::Separable);
  CHECK(marginal_flag(upb_state(Upb::Tiles)) == MarginalFlag::Entangled);
  CHECK(marginal_flag(rho_n_gamma(3, 1.0)) == MarginalFlag::Entangled);
  CHECK(marginal_flag(werner_state({3, 0.7})) == MarginalFlag::PptUndecided);
  CHECK(marginal_flag(werner_state({3, 0.2})) == MarginalFlag::Entangled);
  CHECK(marginal_flag(DensityMatrix({2, 3}, CMatrix::Identity(6, 6) / 6.0)) == MarginalFlag::Separable);
  CHECK_THROWS_AS(marginal_flag(w_noisy_global(3, 0.5)), std::invalid_argument);
}

TEST_CASE("lambda* on a tree W spec equals the closed form") {
  const auto spec = w_tree_spec(3, 1.0, TreeShape::Path);
  const auto c = lambda_star(spec, {0, 2});
  REQUIRE(c.solved());
  CHECK(c.value == doctest::Approx((1.0 - std::sqrt(5.0)) / 6.0).epsilon(1e-6));
  // unique feasible point: the brute-force value is the min PT eigenvalue of that point's AC marginal
  CHECK(c.value == doctest::Approx(min_eigenvalue(partial_transpose(partial_trace(w_noisy_global(3, 1.0), {0, 2}), {1}))).epsilon(1e-6));
  check_marginals(c);
  CHECK(c.residuals.primal <= 1e-7);
  CHECK(c.residuals.dual <= 1e-7);
}

TEST_CASE("lambda* sign does not depend on the cut") {
  const auto ex = named_example("chi3");
  const auto a = lambda_star(ex.spec, {0, 2}, SubsystemSet{0});
  const auto b = lambda_star(ex.spec, {0, 2}, SubsystemSet{2});
  REQUIRE(a.solved());
  REQUIRE(b.solved());
  CHECK(a.value < 0.0);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-6));
}

TEST_CASE("incompatible marginals throw") {
  const auto phi = bell_diagonal({1, 0, 0, 0});
  MarginalSpec spec{{2, 2, 2}, {}};
  spec.add({0, 1}, phi).add({1, 2}, phi);
  CHECK_THROWS_AS(lambda_star(spec, {0, 2}), InfeasibleSpec);
  CHECK_THROWS_AS(min_fidelity(spec, w_state(3)), InfeasibleSpec);
}

TEST_CASE("witness with W = I has value 1") {
  const auto c = witness_opt(named_example("chi3").spec, {0, 2}, CMatrix::Identity(4, 4));
  REQUIRE(c.solved());
  CHECK(c.value == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(c.extra.at("energy") == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("witness duals: zero gap and PSD zeta on random full-rank specs") {
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Dims dims{2, 2, 2};
    const auto rho = random_mixed(dims, k);
    const auto spec = spec_of(rho, {{0, 1}, {1, 2}});
    const CMatrix w = random_hermitian(4, k);
    const auto c = witness_opt(spec, {0, 2}, w);
    REQUIRE(c.solved());
    REQUIRE(c.duals.size() == 2);
    double dual = 0.0;
    CMatrix zeta = -embed_dense(w, dims, {0, 2});
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& con = spec.constraints[i];
      dual += (con.sigma.matrix() * c.duals[i]).trace().real();
      zeta += embed_dense(c.duals[i], dims, con.parties);
    }
    CHECK(std::abs(c.value - dual) <= 1e-6);
    CHECK(std::abs(c.value - c.dual_value) <= 1e-6);
    CHECK(min_eigenvalue(zeta) >= -1e-7);
    // complementary slackness: the optimum is a ground state of zeta
    CHECK(std::abs((c.joint_state.matrix() * zeta).trace().real()) <= 1e-6);
    CHECK(c.value >= (w * partial_trace(rho, {0, 2}).matrix()).trace().real() - 1e-7);
    check_marginals(c);
  }
}

TEST_CASE("witness from the Tiles lambda* optimum reproduces lambda*") {
  MarginalSpec spec{{3, 3, 3}, {}};
  spec.add({0, 1}, upb_state(Upb::Tiles)).add({1, 2}, upb_state(Upb::Tiles));
  const auto l = lambda_star(spec, {0, 2});
  REQUIRE(l.solved());
  const CMatrix rho_t = partial_trace(l.joint_state.matrix(), Dims{3, 3, 3}, SubsystemSet{0, 2});
  const auto e = eigh(partial_transpose(rho_t, Dims{3, 3}, SubsystemSet{1}));
  const CVector eta = e.vectors.col(0);
  const CMatrix w = partial_transpose(projector(eta), Dims{3, 3}, SubsystemSet{1});
  const auto c = witness_opt(spec, {0, 2}, w);
  REQUIRE(c.solved());
  CHECK(l.value == doctest::Approx(-0.1194).epsilon(2e-3 / 0.1194));
  CHECK(c.value == doctest::Approx(l.value).epsilon(1e-4 / 0.1194));
}

TEST_CASE("CCNR programs") {
  MarginalSpec forced{{2, 2, 2}, {}};
  forced.add({0, 1}, bell_diagonal({1, 0, 0, 0}));
  const auto a = min_ccnr(forced, {0, 1});
  REQUIRE(a.solved());
  CHECK(a.value == doctest::Approx(2.0).epsilon(1e-6));

  MarginalSpec loose{{2, 2, 2}, {}};
  loose.add({0}, DensityMatrix({2}, projector(basis_ket(2, 0))));
  const auto b = min_ccnr(loose, {0, 1});
  REQUIRE(b.solved());
  CHECK(b.value <= 1.0 + 1e-6);

  MarginalSpec tiles{{3, 3, 3}, {}};
  tiles.add({0, 1}, upb_state(Upb::Tiles)).add({1, 2}, upb_state(Upb::Tiles));
  const auto t = min_ccnr(tiles, {0, 2});
  REQUIRE(t.solved());
  // regression value from a solver run (35/24 to solver accuracy)
  CHECK(t.value == doctest::Approx(1.4583333341).epsilon(1e-6));
}

TEST_CASE("GME M/N on product and maximally mixed feasible sets") {
  const CMatrix z = projector(basis_ket(4, 0));
  MarginalSpec prod{{2, 2, 2, 2}, {}};
  prod.add({0, 1}, DensityMatrix({2, 2}, z)).add({2, 3}, DensityMatrix({2, 2}, z));
  const auto c = gme_minmax(prod, {0, 1, 2});
  REQUIRE(c.solved());
  CHECK(c.extra.at("M") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(c.extra.at("N") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(c.extra.at("bound") == doctest::Approx(5.0 / 3.0));

  const DensityMatrix mixed({2, 2}, CMatrix::Identity(4, 4) / 4.0);
  MarginalSpec mm{{2, 2, 2, 2}, {}};
  mm.add({0, 1}, mixed).add({1, 2}, mixed);
  const auto m = gme_minmax(mm, {0, 1, 2});
  REQUIRE(m.solved());
  CHECK(m.extra.at("M") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(trace_norm(partial_transpose(CMatrix::Identity(8, 8) / 8.0, Dims{2, 2, 2}, SubsystemSet{0})) ==
        doctest::Approx(1.0));
}

TEST_CASE("minimum fidelity") {
  for (int n : {3, 4}) {
    const auto c = min_fidelity(w_tree_spec(n, 1.0, TreeShape::Path), w_state(n));
    REQUIRE(c.solved());
    CHECK(c.value >= 1.0 - 1e-6);
    CHECK(c.extra.at("infidelity") <= 1e-6);
  }
  MarginalSpec loose{{2, 2}, {}};
  loose.add({0}, DensityMatrix({2}, CMatrix::Identity(2, 2) / 2.0));
  const auto z = min_fidelity(loose, CVector(basis_ket(4, 0)));
  REQUIRE(z.solved());
  CHECK(z.value == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(z.extra.at("infidelity") <= 1.0);

  const auto chi4 = named_example("chi4");
  const auto u = min_fidelity(chi4.spec, *chi4.pure);
  REQUIRE(u.solved());
  CHECK(u.value >= 1.0 - 1e-6);
}

TEST_CASE("minimum fidelity against a mixed reference") {
  const auto omega = w_noisy_global(4, 0.5);
  const auto c = min_fidelity(w_tree_spec(4, 0.5, TreeShape::Star), omega);
  REQUIRE(c.solved());
  CHECK(c.extra.at("support_rank") == 2.0);
  CHECK(c.value >= 1.0 - 1e-6);

  const auto pure = min_fidelity(w_tree_spec(3, 1.0, TreeShape::Path), w_noisy_global(3, 1.0));
  REQUIRE(pure.solved());
  CHECK(pure.extra.at("support_rank") == 1.0);
  CHECK(pure.value >= 1.0 - 1e-6);
}

TEST_CASE("verdicts on the small named examples") {
  const auto chi3 = named_example("chi3");
  const auto v = verdict(chi3.spec, {0, 2});
  CHECK(v.input_flags == std::vector<MarginalFlag>{MarginalFlag::Separable, MarginalFlag::Separable});
  CHECK(v.outcome == Outcome::Metatransitivity);
  CHECK(v.certificate.value < -1e-3);

  const auto xi4 = named_example("xi4");
  for (const auto& t : xi4.targets) {
    const auto vx = verdict(xi4.spec, t);
    CHECK(vx.outcome == Outcome::Metatransitivity);
    check_marginals(vx.certificate);
  }

  const auto tree = w_tree_spec(4, 1.0, TreeShape::Path);
  for (const SubsystemSet& t : {SubsystemSet{0, 2}, SubsystemSet{0, 3}, SubsystemSet{1, 3}}) {
    const auto vt = verdict(tree, t);
    CHECK(vt.outcome == Outcome::Transitivity);
    CHECK(vt.lambda_star == doctest::Approx(rho_n_gamma_min_pt(4, 1.0)).epsilon(1e-5));
  }
  CHECK_THROWS_AS(verdict(tree, {0, 1}), std::invalid_argument);
}

TEST_CASE("xi4 needs all three marginals") {
  const auto xi4 = named_example("xi4");
  MarginalSpec no_cd{xi4.spec.dims, {xi4.spec.constraints[0], xi4.spec.constraints[1]}};
  const auto ac = lambda_star(no_cd, {0, 2});
  REQUIRE(ac.solved());
  CHECK(ac.value >= -1e-5);
  MarginalSpec no_ab{xi4.spec.dims, {xi4.spec.constraints[1], xi4.spec.constraints[2]}};
  const auto bd = lambda_star(no_ab, {1, 3});
  REQUIRE(bd.solved());
  CHECK(bd.value >= -1e-5);
}

TEST_CASE("certificate JSON") {
  const auto c = lambda_star(w_tree_spec(3, 0.5, TreeShape::Path), {0, 2});
  const auto j = to_json(c);
  CHECK(j.at("kind") == "LambdaStar");
  CHECK(j.at("value").get<double>() == c.value);
  CHECK(j.contains("residuals"));
  CHECK_FALSE(j.contains("joint_state"));
  CHECK(to_json(c, true).contains("joint_state"));
}
