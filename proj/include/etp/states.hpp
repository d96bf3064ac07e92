// SPDX-License-Identifier: Apache-2.0
//
// Parametric state families and fixed example states.

#ifndef ETP_STATES_HPP
#define ETP_STATES_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "etp/linalg.hpp"
#include "etp/marginals.hpp"

namespace etp {

struct WernerParams {
  int d = 2;
  double v = 0.0;  // weight on the symmetric subspace
};

struct IsotropicParams {
  int d = 2;
  double p = 0.0;  // fully entangled fraction
};

struct SelfCompParams {
  double a0 = 1.0, a1 = 0.0, b = 0.0;
  double t = 0.0;  // phase
  void validate() const;
};

/// Swap operator on C^d (x) C^d.
CMatrix swap_operator(int d);
/// Projector onto the symmetric subspace, (I + V)/2.
CMatrix symmetric_projector(int d);
/// |Phi_d> = sum_i |ii> / sqrt(d).
CVector max_entangled(int d);

DensityMatrix werner_state(const WernerParams& p);
DensityMatrix isotropic_state(const IsotropicParams& p);

/// |W_n> = (|10..0> + |010..0> + ... + |0..01>) / sqrt(n).
CVector w_state(int n);
/// gamma |W_n><W_n| + (1 - gamma) |0^n><0^n|.
DensityMatrix w_noisy_global(int n, double gamma);
/// ((n - 2 gamma)/n) |00><00| + (2 gamma / n) |Psi+><Psi+|.
DensityMatrix rho_n_gamma(int n, double gamma);
/// Closed-form minimum eigenvalue of rho_n_gamma(n, gamma)^Gamma.
double rho_n_gamma_min_pt(int n, double gamma);

enum class TreeShape { Path, Star };
/// Edges of a tree on parties 0..n-1: (i, i+1) for a path, (0, i) for a star.
std::vector<std::pair<int, int>> tree_edges(int n, TreeShape shape);
/// Marginals of w_noisy_global(n, gamma) on the tree edges (each is
/// rho_n_gamma(n, gamma)).
MarginalSpec w_tree_spec(int n, double gamma, TreeShape shape);

/// Bell basis in the order (Phi+, Phi-, Psi+, Psi-).
std::array<CVector, 4> bell_basis();
/// Throws std::invalid_argument unless w is a probability vector (1e-12).
DensityMatrix bell_diagonal(const std::array<double, 4>& w);

enum class Upb { Tiles, Pyramid };
/// The five (normalized) product vectors of the basis.
std::vector<CVector> upb_vectors(Upb which);
/// (I - sum_i |u_i><u_i|) / 4 on two qutrits.
DensityMatrix upb_state(Upb which);

/// Fixed examples. A global state (pure or mixed) is given where one exists;
/// `spec` holds the marginal constraints the example is studied with and
/// `targets` the pairs whose entanglement is in question.
struct NamedExample {
  std::string id;
  Dims dims;
  std::optional<CVector> pure;
  std::optional<DensityMatrix> mixed;
  MarginalSpec spec;
  std::vector<SubsystemSet> targets;

  /// The global density matrix (throws if the example has none).
  DensityMatrix global_state() const;
};

/// ids: chi3, xi4, chi4, bell_chain4, bell_chain5a, bell_chain5b, bell_chain6,
/// bell_chain7, psi_gme4.
const std::vector<std::string>& named_example_ids();
/// Throws std::invalid_argument for an unknown id.
NamedExample named_example(std::string_view id);

DensityMatrix selfcomp_choi(const SelfCompParams& p);
/// a0|000> + a1 e^{it}|011> + b|1>|Psi+>
CVector selfcomp_extension(const SelfCompParams& p);
/// Closed-form minimum eigenvalue of selfcomp_choi(p)^Gamma.
double selfcomp_min_pt(const SelfCompParams& p);

inline constexpr std::size_t haar_max_dim = std::size_t{1} << 14;
/// Haar unitary of side dim: QR of a complex Ginibre matrix with the phases
/// of R moved into Q. Draws are taken column by column.
CMatrix haar_unitary(std::size_t dim, std::uint64_t seed, std::uint64_t stream);
/// First column of haar_unitary(d^n, seed, stream), computed without forming
/// the full matrix (it is the normalized first Ginibre column).
CVector haar_pure(int n, int d, std::uint64_t seed, std::uint64_t stream);

/// Joins two states that are classical on the shared B system (B diagonal in
/// the computational basis) into a tripartite state with both as marginals.
DensityMatrix cq_join(const DensityMatrix& sigma_ab, const DensityMatrix& tau_bc);

}  // namespace etp

#endif  // ETP_STATES_HPP
