// SPDX-License-Identifier: Apache-2.0
//
// Marginal-constrained certification programs and transitivity verdicts.
// Every program optimizes over joint states rho compatible with a
// MarginalSpec; the returned Certificate carries the optimal value, the
// optimal joint state and solver diagnostics.

#ifndef ETP_CERTIFY_HPP
#define ETP_CERTIFY_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "etp/linalg.hpp"
#include "etp/marginals.hpp"
#include "etp/sdp.hpp"

namespace etp {

/// Raised when a spec admits no joint state.
class InfeasibleSpec : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CertifyOptions {
  sdp::SolveOptions sdp;
  double eps_cert = 1e-5;
  double tol_psd = 1e-9;
  /// Restrict rho to the intersection of the marginal supports before
  /// solving. The dual matrices then certify optimality on that subspace.
  bool facial_reduction = true;
};

enum class CertificateKind { LambdaStar, Witness, Ccnr, GmeMN, Uniqueness };
std::string to_string(CertificateKind k);

struct Certificate {
  CertificateKind kind = CertificateKind::LambdaStar;
  double value = 0.0;
  sdp::Status status = sdp::Status::NumericalTrouble;
  DensityMatrix joint_state = DensityMatrix::unchecked({2}, CMatrix::Identity(2, 2) / 2.0);
  /// One Hermitian matrix per spec constraint (LambdaStar and Witness).
  std::vector<CMatrix> duals;
  sdp::Residuals residuals;
  double dual_value = 0.0;
  std::vector<double> marginal_violation;
  /// Kind-specific numbers (e.g. "M", "N", "energy").
  std::map<std::string, double> extra;
  int iterations = 0;

  bool solved() const { return status == sdp::Status::Optimal; }
};

nlohmann::json to_json(const Certificate& c, bool include_state = false);

/// max over compatible rho of lambda_min((rho_T)^Gamma), Gamma = transpose on
/// `cut` (a subset of `target`).
Certificate lambda_star(const MarginalSpec& spec, const SubsystemSet& target, const SubsystemSet& cut,
                        const CertifyOptions& opts = {});
/// Same with the cut on the second party of the target.
Certificate lambda_star(const MarginalSpec& spec, const SubsystemSet& target, const CertifyOptions& opts = {});

/// max over compatible rho of tr(rho_T W). Duals are the H_i with
/// sum_i H_i (x) I - W (x) I = zeta >= 0; extra["energy"] = -value.
Certificate witness_opt(const MarginalSpec& spec, const SubsystemSet& target, const CMatrix& w,
                        const CertifyOptions& opts = {});

/// min over compatible rho of ||realign(rho_T)||_1 for a two-party target.
Certificate min_ccnr(const MarginalSpec& spec, const SubsystemSet& target, const CertifyOptions& opts = {});

/// max(min M, min N) for a three-party target of equal local dimension d;
/// extra holds "M", "N" and "bound" = (1 + 2d)/3.
Certificate gme_minmax(const MarginalSpec& spec, const SubsystemSet& target, const CertifyOptions& opts = {});

/// min over compatible rho of <psi|rho|psi>; extra["infidelity"] = 1 - value, clamped to [0, 1].
Certificate min_fidelity(const MarginalSpec& spec, const CVector& psi, const CertifyOptions& opts = {});
/// Mixed reference: min over compatible rho of tr(P rho), P the projector onto
/// the support of `reference` (eigenvalues > 1e-9 max); equals the pure
/// version for rank one. extra["support_rank"] holds rank P.
Certificate min_fidelity(const MarginalSpec& spec, const DensityMatrix& reference, const CertifyOptions& opts = {});

enum class MarginalFlag { Entangled, Separable, PptUndecided };
std::string to_string(MarginalFlag f);
MarginalFlag marginal_flag(const DensityMatrix& sigma, double tol_psd = 1e-9);

enum class Outcome { Transitivity, Metatransitivity, NotCertified };
std::string to_string(Outcome o);

struct TransitivityVerdict {
  SubsystemSet target;
  std::vector<MarginalFlag> input_flags;
  Outcome outcome = Outcome::NotCertified;
  Certificate certificate;
  /// The lambda* run (always performed); equals `certificate` unless the
  /// CCNR fallback was used.
  double lambda_star = 0.0;
};

/// True when the certificate proves the target entangled with margin eps.
bool certifies(const Certificate& c, double eps_cert);

TransitivityVerdict verdict(const MarginalSpec& spec, const SubsystemSet& target, const CertifyOptions& opts = {});
/// Reuses precomputed input flags (one per spec constraint).
TransitivityVerdict verdict(const MarginalSpec& spec, const SubsystemSet& target,
                            const std::vector<MarginalFlag>& flags, const CertifyOptions& opts = {});

nlohmann::json to_json(const TransitivityVerdict& v);

}  // namespace etp

#endif  // ETP_CERTIFY_HPP
