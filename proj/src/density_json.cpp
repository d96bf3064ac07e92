// SPDX-License-Identifier: Apache-2.0

#include "etp/density_json.hpp"

#include <fstream>
#include <stdexcept>

namespace etp {

nlohmann::json matrix_to_json(const CMatrix& m) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json rr = nlohmann::json::array();
    nlohmann::json ri = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return {{"re", std::move(re)}, {"im", std::move(im)}};
}

CMatrix matrix_from_json(const nlohmann::json& re, const nlohmann::json& im) {
  if (!re.is_array() || !im.is_array() || re.size() != im.size())
    throw std::invalid_argument("matrix json: re/im must be arrays of equal length");
  const auto rows = static_cast<Eigen::Index>(re.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(re[0].size());
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& rr = re[static_cast<std::size_t>(i)];
    const auto& ri = im[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(rr.size()) != cols || static_cast<Eigen::Index>(ri.size()) != cols)
      throw std::invalid_argument("matrix json: ragged rows");
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = cd(rr[static_cast<std::size_t>(j)].get<double>(),
                   ri[static_cast<std::size_t>(j)].get<double>());
  }
  return m;
}

nlohmann::json to_json(const DensityMatrix& rho) {
  nlohmann::json j = matrix_to_json(rho.matrix());
  j["dims"] = rho.dims();
  return j;
}

DensityMatrix density_from_json(const nlohmann::json& j) {
  if (!j.contains("dims") || !j.contains("re") || !j.contains("im"))
    throw std::invalid_argument("density json: needs dims, re, im");
  return DensityMatrix(j.at("dims").get<Dims>(), matrix_from_json(j.at("re"), j.at("im")));
}

DensityMatrix read_density(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return density_from_json(nlohmann::json::parse(in));
}

void write_density(const std::filesystem::path& path, const DensityMatrix& rho) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(rho).dump() << '\n';
}

nlohmann::json to_json(const MarginalSpec& spec) {
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& c : spec.constraints) ms.push_back({{"parties", c.parties.indices()}, {"state", to_json(c.sigma)}});
  return {{"dims", spec.dims}, {"marginals", ms}};
}

MarginalSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dims") || !j.contains("marginals"))
    throw std::invalid_argument("spec json: needs dims and marginals");
  MarginalSpec spec;
  spec.dims = j.at("dims").get<Dims>();
  for (const auto& m : j.at("marginals")) {
    if (!m.contains("parties") || !m.contains("state"))
      throw std::invalid_argument("spec json: each marginal needs parties and state");
    spec.add(SubsystemSet(m.at("parties").get<std::vector<int>>()), density_from_json(m.at("state")));
  }
  spec.validate();
  return spec;
}

MarginalSpec read_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return spec_from_json(nlohmann::json::parse(in));
}

}  // namespace etp
