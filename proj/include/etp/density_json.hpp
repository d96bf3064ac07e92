// SPDX-License-Identifier: Apache-2.0
//
// DensityMatrix wire format:
//   {"dims":[d1,...], "re":[[...],...], "im":[[...],...]}
// with row-major real and imaginary parts. Doubles are written with
// round-trip precision so decode(encode(x)) == x bitwise.

#ifndef ETP_DENSITY_JSON_HPP
#define ETP_DENSITY_JSON_HPP

#include <filesystem>

#include "json.hpp"

#include "etp/linalg.hpp"
#include "etp/marginals.hpp"

namespace etp {

nlohmann::json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& re, const nlohmann::json& im);

nlohmann::json to_json(const DensityMatrix& rho);
/// Validates DensityMatrix invariants; throws std::invalid_argument.
DensityMatrix density_from_json(const nlohmann::json& j);

DensityMatrix read_density(const std::filesystem::path& path);
void write_density(const std::filesystem::path& path, const DensityMatrix& rho);

/// Marginal spec wire format:
///   {"dims":[...], "marginals":[{"parties":[0,1], "state":<DensityMatrix>}, ...]}
nlohmann::json to_json(const MarginalSpec& spec);
/// Validates every marginal and the spec itself; throws std::invalid_argument.
MarginalSpec spec_from_json(const nlohmann::json& j);
MarginalSpec read_spec(const std::filesystem::path& path);

}  // namespace etp

#endif  // ETP_DENSITY_JSON_HPP
