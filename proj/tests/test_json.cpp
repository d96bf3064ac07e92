#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "etp/density_json.hpp"
#include "etp/states.hpp"

using namespace etp;

TEST_CASE("density JSON round trip is bitwise exact") {
  for (const auto& rho : {upb_state(Upb::Pyramid), w_noisy_global(3, 0.37),
                          DensityMatrix::from_pure({2, 3}, haar_pure(1, 6, 4, 2))}) {
    const auto j = to_json(rho);
    const auto back = density_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.dims() == rho.dims());
    CHECK(max_abs_diff(back.matrix(), rho.matrix()) == 0.0);
  }
}

TEST_CASE("density JSON format") {
  const auto j = nlohmann::json::parse(R"({"dims":[2],"re":[[0.5,0],[0,0.5]],"im":[[0,0],[0,0]]})");
  const auto rho = density_from_json(j);
  CHECK(max_abs_diff(rho.matrix(), CMatrix::Identity(2, 2) / 2.0) == 0.0);
  CHECK(to_json(rho)["dims"] == nlohmann::json::array({2}));

  const auto bad_trace = nlohmann::json::parse(R"({"dims":[2],"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]})");
  CHECK_THROWS_AS(density_from_json(bad_trace), std::invalid_argument);
  const auto bad_shape = nlohmann::json::parse(R"({"dims":[3],"re":[[0.5,0],[0,0.5]],"im":[[0,0],[0,0]]})");
  CHECK_THROWS_AS(density_from_json(bad_shape), std::invalid_argument);
}

TEST_CASE("spec JSON round trip through a file") {
  const auto spec = named_example("chi3").spec;
  const auto path = std::filesystem::temp_directory_path() / "etp_test_spec.json";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    REQUIRE(f);
    const std::string s = to_json(spec).dump();
    std::fwrite(s.data(), 1, s.size(), f);
    std::fclose(f);
  }
  const auto back = read_spec(path);
  std::filesystem::remove(path);
  CHECK(back.dims == spec.dims);
  REQUIRE(back.constraints.size() == spec.constraints.size());
  for (std::size_t i = 0; i < spec.constraints.size(); ++i) {
    CHECK(back.constraints[i].parties == spec.constraints[i].parties);
    CHECK(max_abs_diff(back.constraints[i].sigma.matrix(), spec.constraints[i].sigma.matrix()) == 0.0);
  }
}

TEST_CASE("spec JSON rejects a constraint on the whole system") {
  nlohmann::json j;
  j["dims"] = {2};
  j["marginals"] = {{{"parties", {0}}, {"state", to_json(DensityMatrix({2}, CMatrix::Identity(2, 2) / 2.0))}}};
  CHECK_THROWS_AS(spec_from_json(j), std::invalid_argument);
}
