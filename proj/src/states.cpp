// SPDX-License-Identifier: Apache-2.0

#include "etp/states.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "etp/rng.hpp"

namespace etp {

namespace {

void check_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

CVector ket(std::initializer_list<cd> values) {
  CVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (cd x : values) v(i++) = x;
  return v;
}

CVector real_ket(const std::vector<double>& values) {
  CVector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
  return v;
}

}  // namespace

void SelfCompParams::validate() const {
  for (double x : {a0, a1, b})
    if (!(x >= -1.0 && x <= 1.0)) throw std::invalid_argument("SelfCompParams: a0, a1, b must lie in [-1,1]");
  if (std::abs(a0 * a0 + a1 * a1 + b * b - 1.0) > 1e-12)
    throw std::invalid_argument("SelfCompParams: a0^2 + a1^2 + b^2 != 1");
  if (!(t >= 0.0 && t <= 2.0 * std::numbers::pi)) throw std::invalid_argument("SelfCompParams: t outside [0, 2pi]");
}

CMatrix swap_operator(int d) {
  CMatrix v = CMatrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) v(i * d + j, j * d + i) = 1.0;
  return v;
}

CMatrix symmetric_projector(int d) {
  return 0.5 * (CMatrix::Identity(d * d, d * d) + swap_operator(d));
}

CVector max_entangled(int d) {
  CVector v = CVector::Zero(d * d);
  for (int i = 0; i < d; ++i) v(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
  return v;
}

DensityMatrix werner_state(const WernerParams& p) {
  if (p.d < 2) throw std::invalid_argument("werner_state: d < 2");
  check_unit(p.v, "werner_state: v");
  const int d = p.d;
  const CMatrix ps = symmetric_projector(d);
  const CMatrix pa = CMatrix::Identity(d * d, d * d) - ps;
  const double ds = d * (d + 1) / 2.0, da = d * (d - 1) / 2.0;
  return DensityMatrix({d, d}, (p.v / ds) * ps + ((1.0 - p.v) / da) * pa);
}

DensityMatrix isotropic_state(const IsotropicParams& p) {
  if (p.d < 2) throw std::invalid_argument("isotropic_state: d < 2");
  check_unit(p.p, "isotropic_state: p");
  const int d = p.d;
  const CMatrix phi = projector(max_entangled(d));
  const CMatrix rest = CMatrix::Identity(d * d, d * d) - phi;
  return DensityMatrix({d, d}, p.p * phi + ((1.0 - p.p) / (d * d - 1.0)) * rest);
}

CVector w_state(int n) {
  if (n < 1) throw std::invalid_argument("w_state: n < 1");
  CVector v = CVector::Zero(Eigen::Index{1} << n);
  for (int k = 0; k < n; ++k) v(Eigen::Index{1} << k) = 1.0 / std::sqrt(static_cast<double>(n));
  return v;
}

DensityMatrix w_noisy_global(int n, double gamma) {
  if (n < 3) throw std::invalid_argument("w_noisy_global: n < 3");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("w_noisy_global: gamma outside (0,1]");
  CMatrix m = gamma * projector(w_state(n));
  m(0, 0) += 1.0 - gamma;
  return DensityMatrix(Dims(static_cast<std::size_t>(n), 2), m);
}

DensityMatrix rho_n_gamma(int n, double gamma) {
  if (n < 3) throw std::invalid_argument("rho_n_gamma: n < 3");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("rho_n_gamma: gamma outside (0,1]");
  const CVector psi_plus = ket({0.0, std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2, 0.0});
  CMatrix m = (2.0 * gamma / n) * projector(psi_plus);
  m(0, 0) += (n - 2.0 * gamma) / n;
  return DensityMatrix({2, 2}, m);
}

double rho_n_gamma_min_pt(int n, double gamma) {
  const double a = n - 2.0 * gamma;
  return (a - std::sqrt(a * a + 4.0 * gamma * gamma)) / (2.0 * n);
}

std::vector<std::pair<int, int>> tree_edges(int n, TreeShape shape) {
  if (n < 2) throw std::invalid_argument("tree_edges: n < 2");
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i < n; ++i) e.emplace_back(shape == TreeShape::Path ? i - 1 : 0, i);
  return e;
}

MarginalSpec w_tree_spec(int n, double gamma, TreeShape shape) {
  MarginalSpec spec;
  spec.dims = Dims(static_cast<std::size_t>(n), 2);
  const DensityMatrix pair = rho_n_gamma(n, gamma);
  for (const auto& [a, b] : tree_edges(n, shape)) spec.add(SubsystemSet{a, b}, pair);
  return spec;
}

std::array<CVector, 4> bell_basis() {
  const double h = std::numbers::sqrt2 / 2;
  return {ket({h, 0.0, 0.0, h}), ket({h, 0.0, 0.0, -h}), ket({0.0, h, h, 0.0}), ket({0.0, h, -h, 0.0})};
}

DensityMatrix bell_diagonal(const std::array<double, 4>& w) {
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw std::invalid_argument("bell_diagonal: negative weight");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("bell_diagonal: weights do not sum to 1");
  const auto basis = bell_basis();
  CMatrix m = CMatrix::Zero(4, 4);
  for (std::size_t i = 0; i < 4; ++i) m += w[i] * projector(basis[i]);
  return DensityMatrix({2, 2}, m);
}

std::vector<CVector> upb_vectors(Upb which) {
  std::vector<CVector> out;
  if (which == Upb::Tiles) {
    const double h = std::numbers::sqrt2 / 2;
    const CVector e0 = basis_ket(3, 0), e1 = basis_ket(3, 1), e2 = basis_ket(3, 2);
    // The last vector is normalized with 1/3 (uniform superposition on both sides).
    out.push_back(kron(e0, CVector(h * (e0 - e1))));
    out.push_back(kron(CVector(h * (e0 - e1)), e2));
    out.push_back(kron(e2, CVector(h * (e1 - e2))));
    out.push_back(kron(CVector(h * (e1 - e2)), e0));
    const CVector u = (e0 + e1 + e2) / std::sqrt(3.0);
    out.push_back(kron(u, u));
  } else {
    const double norm = 2.0 / std::sqrt(5.0 + std::sqrt(5.0));
    const double height = std::sqrt(1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<CVector> p;
    for (int j = 0; j < 5; ++j) {
      const double a = 2.0 * std::numbers::pi * j / 5.0;
      p.push_back(norm * ket({std::cos(a), std::sin(a), height}));
    }
    for (int j = 0; j < 5; ++j) out.push_back(kron(p[static_cast<std::size_t>(j)], p[static_cast<std::size_t>((2 * j) % 5)]));
  }
  return out;
}

DensityMatrix upb_state(Upb which) {
  CMatrix m = CMatrix::Identity(9, 9);
  for (const auto& v : upb_vectors(which)) m -= projector(v);
  return DensityMatrix({3, 3}, m / 4.0);
}

DensityMatrix NamedExample::global_state() const {
  if (mixed) return *mixed;
  if (pure) return DensityMatrix::from_pure(dims, *pure);
  throw std::logic_error("named example '" + id + "' has no global state");
}

const std::vector<std::string>& named_example_ids() {
  static const std::vector<std::string> ids{"chi3", "xi4", "chi4", "bell_chain4",
                                            "bell_chain5a", "bell_chain5b", "bell_chain6",
                                            "bell_chain7", "psi_gme4"};
  return ids;
}

namespace {

MarginalSpec spec_from_state(const DensityMatrix& rho, const std::vector<SubsystemSet>& sets) {
  MarginalSpec spec{rho.dims(), {}};
  for (const auto& s : sets) {
    auto red = partial_trace(rho, s);
    spec.add(s, DensityMatrix(red.dims(), hermitian_part(red.matrix())));
  }
  return spec;
}

MarginalSpec bell_chain(int n, const std::vector<std::pair<SubsystemSet, std::array<double, 4>>>& edges) {
  MarginalSpec spec{Dims(static_cast<std::size_t>(n), 2), {}};
  for (const auto& [s, w] : edges) {
    std::array<double, 4> p{};
    for (std::size_t i = 0; i < 4; ++i) p[i] = w[i] / 1e4;
    spec.add(s, bell_diagonal(p));
  }
  return spec;
}

}  // namespace

NamedExample named_example(std::string_view id) {
  NamedExample ex;
  ex.id = std::string(id);
  const SubsystemSet ab{0, 1}, bc{1, 2}, cd{2, 3}, ac{0, 2}, ad{0, 3}, bd{1, 3};
  if (id == "chi3") {
    const double s5 = std::sqrt(5.0), s7 = std::sqrt(7.0);
    const CVector c1 = real_ket({1.0 / 3, 1.0 / 12, -s7 / 12, 0.0, s7 / 12, -1.0 / 3, -3.0 / 4, 1.0 / 3});
    const CVector c2 = real_ket({-1.0 / 2, s5 / 24, 1.0 / 6, 1.0 / 8, -1.0 / 3, -3.0 / 4, s5 / 24, 1.0 / 8});
    ex.dims = {2, 2, 2};
    ex.mixed = DensityMatrix(ex.dims, 0.25 * projector(c1) + 0.75 * projector(c2));
    ex.spec = spec_from_state(*ex.mixed, {ab, bc});
    ex.targets = {ac};
  } else if (id == "xi4") {
    ex.dims = {2, 2, 2, 2};
    ex.pure = real_ket({1.0 / 45, -1.0 / 3, 1.0 / 3, 1.0 / 9, 2.0 / 9, -1.0 / 4, -2.0 / 5, 1.0 / 9,
                        std::sqrt(10.0) / 36, 1.0 / 9, -1.0 / 9, -1.0 / 4, -1.0 / 2, 1.0 / 9, -1.0 / 9, 1.0 / 3});
    ex.spec = spec_from_state(ex.global_state(), {ab, bc, cd});
    ex.targets = {ac, ad, bd};
  } else if (id == "chi4") {
    ex.dims = {2, 2, 2, 2};
    CVector v = real_ket({-1.0 / 5, -1.0 / 12, -1.0 / 93, -2.0 / 9, 3.0 / 10, 1.0 / 6, -1.0 / 4, -2.0 / 3,
                          1.0 / 11, -3.0 / 11, 1.0 / 7, -1.0 / 6, -1.0 / 6, -1.0 / 4, 2.0 / 9, 1.0 / 7});
    ex.pure = v / v.norm();
    ex.spec = spec_from_state(ex.global_state(), {ab, bc, cd});
    ex.targets = {ad, ac, bd};
  } else if (id == "psi_gme4") {
    ex.dims = {2, 2, 2, 2};
    ex.pure = real_ket({1.0 / 12, 1.0 / 9, 0.0, 1.0 / 6, 1.0 / 9, 1.0 / 9, 0.0, 0.0, 0.0, std::sqrt(42.0) / 9,
                        -1.0 / 3, -1.0 / 12, -1.0 / 4, -1.0 / 12, -1.0 / 3, 1.0 / 3});
    ex.spec = spec_from_state(ex.global_state(), {ab, ac, ad});
    ex.targets = {SubsystemSet{1, 2, 3}};
  } else if (id == "bell_chain4") {
    ex.dims = {2, 2, 2, 2};
    ex.spec = bell_chain(4, {{ab, {1363, 4552, 610, 3475}}, {bc, {1819, 4153, 3957, 71}}, {cd, {4440, 3209, 2028, 323}}});
    ex.targets = {ad};
  } else if (id == "bell_chain5a") {
    ex.dims = Dims(5, 2);
    ex.spec = bell_chain(5, {{ab, {1363, 4552, 610, 3475}},
                             {bc, {1819, 4153, 3957, 71}},
                             {cd, {1819, 4153, 3957, 71}},
                             {SubsystemSet{3, 4}, {4440, 3209, 2028, 323}}});
    ex.targets = {SubsystemSet{0, 4}};
  } else if (id == "bell_chain5b" || id == "bell_chain6" || id == "bell_chain7") {
    // 6 and 7 qubits: the 5b chain plus extra leaves F, G hung off B with the BC weights.
    const int n = id == "bell_chain5b" ? 5 : id == "bell_chain6" ? 6 : 7;
    const std::array<double, 4> w_bc{3252, 4614, 2068, 66};
    std::vector<std::pair<SubsystemSet, std::array<double, 4>>> edges{
        {ab, {566, 4203, 3933, 1298}},
        {bc, w_bc},
        {cd, {4324, 3437, 323, 1916}},
        {SubsystemSet{3, 4}, {818, 4430, 503, 4249}}};
    for (int leaf = 5; leaf < n; ++leaf) edges.push_back({SubsystemSet{1, leaf}, w_bc});
    ex.dims = Dims(static_cast<std::size_t>(n), 2);
    ex.spec = bell_chain(n, edges);
    ex.targets = {SubsystemSet{0, 4}};
  } else {
    throw std::invalid_argument("unknown example id '" + std::string(id) + "'");
  }
  return ex;
}

DensityMatrix selfcomp_choi(const SelfCompParams& p) {
  p.validate();
  const double r = std::numbers::sqrt2 / 2;
  const cd phase = std::polar(1.0, p.t);
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 0) = p.a0 * p.a0;
  m(1, 1) = p.a1 * p.a1;
  m(2, 2) = m(3, 3) = p.b * p.b / 2;
  m(0, 3) = m(3, 0) = p.a0 * p.b * r;
  m(1, 2) = phase * p.a1 * p.b * r;
  m(2, 1) = std::conj(m(1, 2));
  return DensityMatrix({2, 2}, m);
}

CVector selfcomp_extension(const SelfCompParams& p) {
  p.validate();
  const double r = std::numbers::sqrt2 / 2;
  CVector v = CVector::Zero(8);
  v(0) = p.a0;                           // |000>
  v(3) = std::polar(p.a1, p.t);          // |011>
  v(5) = p.b * r;                        // |101>
  v(6) = p.b * r;                        // |110>
  return v;
}

double selfcomp_min_pt(const SelfCompParams& p) {
  auto root = [&](double ai, double aj) {
    const double b2 = p.b * p.b, ai2 = ai * ai;
    return 0.25 * (2 * ai2 + b2 - std::sqrt(4 * ai2 * ai2 + 8 * aj * aj * b2 - 4 * ai2 * b2 + b2 * b2));
  };
  return std::min(root(p.a0, p.a1), root(p.a1, p.a0));
}

namespace {

std::size_t checked_dim(int n, int d) {
  if (n < 1 || d < 2) throw std::invalid_argument("haar: need n >= 1 and d >= 2");
  std::size_t dim = 1;
  for (int k = 0; k < n; ++k) {
    dim *= static_cast<std::size_t>(d);
    if (dim > haar_max_dim) throw std::invalid_argument("haar: d^n exceeds 2^14");
  }
  return dim;
}

}  // namespace

CMatrix haar_unitary(std::size_t dim, std::uint64_t seed, std::uint64_t stream) {
  if (dim < 1 || dim > 1024) throw std::invalid_argument("haar_unitary: side must lie in [1, 1024]");
  CounterRng rng(seed, stream);
  Eigen::MatrixXcd g(dim, dim);
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = cd(re, im);
    }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(g.rows(), g.cols());
  const Eigen::MatrixXcd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const cd rjj = r(j, j);
    q.col(j) *= std::abs(rjj) > 0.0 ? rjj / std::abs(rjj) : cd(1.0);
  }
  return q;
}

CVector haar_pure(int n, int d, std::uint64_t seed, std::uint64_t stream) {
  const std::size_t dim = checked_dim(n, d);
  CounterRng rng(seed, stream);
  CVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v(i) = cd(re, im);
  }
  return v / v.norm();
}

DensityMatrix cq_join(const DensityMatrix& sigma_ab, const DensityMatrix& tau_bc) {
  if (sigma_ab.n_parties() != 2 || tau_bc.n_parties() != 2)
    throw std::invalid_argument("cq_join: inputs must be bipartite");
  const int da = sigma_ab.dims()[0], db = sigma_ab.dims()[1], dc = tau_bc.dims()[1];
  if (tau_bc.dims()[0] != db) throw std::invalid_argument("cq_join: shared system dimensions differ");
  const CMatrix& s = sigma_ab.matrix();
  const CMatrix& t = tau_bc.matrix();
  for (int a = 0; a < da; ++a)
    for (int a2 = 0; a2 < da; ++a2)
      for (int x = 0; x < db; ++x)
        for (int x2 = 0; x2 < db; ++x2)
          if (x != x2 && std::abs(s(a * db + x, a2 * db + x2)) > 1e-10)
            throw std::invalid_argument("cq_join: sigma_AB is not classical on B");
  for (int x = 0; x < db; ++x)
    for (int x2 = 0; x2 < db; ++x2)
      for (int c = 0; c < dc; ++c)
        for (int c2 = 0; c2 < dc; ++c2)
          if (x != x2 && std::abs(t(x * dc + c, x2 * dc + c2)) > 1e-10)
            throw std::invalid_argument("cq_join: tau_BC is not classical on B");
  const CMatrix rb_s = partial_trace(sigma_ab, SubsystemSet{1}).matrix();
  const CMatrix rb_t = partial_trace(tau_bc, SubsystemSet{0}).matrix();
  if (max_abs_diff(rb_s, rb_t) > 1e-9) throw std::invalid_argument("cq_join: B marginals differ");

  CMatrix out = CMatrix::Zero(da * db * dc, da * db * dc);
  for (int x = 0; x < db; ++x) {
    const double px = rb_s(x, x).real();
    if (px <= 0.0) continue;  // beta_x = 0 for an empty symbol
    CMatrix sa(da, da), tc(dc, dc);
    for (int a = 0; a < da; ++a)
      for (int a2 = 0; a2 < da; ++a2) sa(a, a2) = s(a * db + x, a2 * db + x);
    for (int c = 0; c < dc; ++c)
      for (int c2 = 0; c2 < dc; ++c2) tc(c, c2) = t(x * dc + c, x * dc + c2);
    const CMatrix block = kron(sa, tc) / px;  // on A (x) C
    for (int a = 0; a < da; ++a)
      for (int a2 = 0; a2 < da; ++a2)
        for (int c = 0; c < dc; ++c)
          for (int c2 = 0; c2 < dc; ++c2)
            out((a * db + x) * dc + c, (a2 * db + x) * dc + c2) += block(a * dc + c, a2 * dc + c2);
  }
  return DensityMatrix({da, db, dc}, hermitian_part(out));
}

}  // namespace etp
