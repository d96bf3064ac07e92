// SPDX-License-Identifier: Apache-2.0
//
// Closed-form compatibility and (meta)transitivity geometry for pairs of
// Werner or isotropic marginals on AB and AC, with the BC marginal of the
// twirled joint state as the target.

#ifndef ETP_REGIONS_HPP
#define ETP_REGIONS_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "etp/certify.hpp"
#include "etp/linalg.hpp"

namespace etp {

enum class RegionLabel { Incompatible = 0, Transitivity = 1, Metatransitivity = 2, NoTransitivityCertifiable = 3 };
std::string to_string(RegionLabel l);

struct RegionVerdict {
  RegionLabel label = RegionLabel::Incompatible;
  std::optional<double> max_v_bc;
  bool ab_entangled = false;
  bool ac_entangled = false;
};

/// f = v_AB + v_AC + v_BC, g = sqrt(3 (v_AC - v_AB)^2 + (2 v_BC - v_AB - v_AC)^2).
double werner_f(double v_ab, double v_ac, double v_bc);
double werner_g(double v_ab, double v_ac, double v_bc);

/// d >= 3: f >= g and 3 - f >= g. d = 2: the cone 3 - f >= g below its apex
/// (1,1,1) down to the base plane f = 3/2.
bool werner_triple_compatible(int d, double v_ab, double v_ac, double v_bc, double tol = 1e-12);

/// Convex hull of (0,0), (1,1) and the ellipse
/// (v_AB + v_AC - 1)^2 + (v_AB - v_AC)^2 / 3 = 1/4; for d = 2 without (0,0).
bool werner_pair_compatible(int d, double v_ab, double v_ac, double tol = 1e-12);

/// Largest compatible v_BC, or nullopt for an incompatible pair.
std::optional<double> werner_max_vbc(int d, double v_ab, double v_ac);
/// Smallest compatible v_BC, or nullopt for an incompatible pair.
std::optional<double> werner_min_vbc(int d, double v_ab, double v_ac);
RegionVerdict werner_classify(int d, double v_ab, double v_ac);

/// Convex hull of (0,0) and the ellipse
/// (p_AB + p_AC - 1)^2 + (p_AB - p_AC)^2 / (d^2 - 1) = 1/d^2.
bool isotropic_pair_compatible(int d, double p_ab, double p_ac, double tol = 1e-12);
/// Largest compatible Werner parameter of BC for isotropic AB, AC marginals.
std::optional<double> isotropic_max_vbc(int d, double p_ab, double p_ac);
RegionVerdict isotropic_classify(int d, double p_ab, double p_ac);

/// tr(P_s rho) for a two-qudit state.
double werner_parameter(const DensityMatrix& rho);
/// <Phi_d| rho |Phi_d> for a two-qudit state.
double isotropic_parameter(const DensityMatrix& rho);

/// SDP counterparts: max tr(P_s rho_BC) over joint states of the two marginals.
Certificate werner_max_vbc_sdp(int d, double v_ab, double v_ac, const CertifyOptions& opts = {});
Certificate isotropic_max_vbc_sdp(int d, double p_ab, double p_ac, const CertifyOptions& opts = {});

enum class RegionFamily { Werner, Isotropic };
/// CSV raster over pixel centers ((i + 1/2)/res, (j + 1/2)/res), i the first
/// parameter, rows ordered by i then j. Header "vAB,vAC,label,max_vBC" (or
/// "pAB,pAC,..."); max_vBC is empty for incompatible pixels.
void write_region_csv(std::ostream& out, RegionFamily family, int d, int resolution);

}  // namespace etp

#endif  // ETP_REGIONS_HPP
