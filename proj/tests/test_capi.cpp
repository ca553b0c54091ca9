#include <doctest.h>

#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlm/hlm.h"

namespace {

const char* kLines = R"({"K":2,"D":2,"d":1,"truth_angles_deg":[20,80],"alphas":[0.2,0.4,0.4],
                        "p":1,"N":400,"grid_step_deg":1,"seed":3})";

std::string take(char* s) {
  std::string out = s ? s : "";
  hlm_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status names and errors") {
  CHECK(std::string(hlm_status_name(HLM_OK)) == "ok");
  hlm_config* c = nullptr;
  CHECK(hlm_config_parse("{\"K\":2,\"D\":2,\"d\":1,\"wat\":0}", &c) == HLM_ERR_CONFIG);
  CHECK(c == nullptr);
  CHECK(std::string(hlm_last_error()).find("wat") != std::string::npos);
  CHECK(hlm_config_parse("not json", &c) == HLM_ERR_CONFIG);
  CHECK(hlm_config_parse(nullptr, &c) == HLM_ERR_ARGUMENT);
  CHECK(hlm_config_load("/nonexistent/config.json", &c) == HLM_ERR_IO);
}

TEST_CASE("sample, fit and oracle through the C API") {
  hlm_config* c = nullptr;
  REQUIRE(hlm_config_parse(kLines, &c) == HLM_OK);
  std::uint64_t seed = 0;
  CHECK(hlm_config_seed(c, &seed) == HLM_OK);
  CHECK(seed == 3);

  hlm_dataset* d = nullptr;
  REQUIRE(hlm_sample(c, seed, &d) == HLM_OK);
  std::size_t n = 0, dim = 0;
  CHECK(hlm_dataset_shape(d, &n, &dim) == HLM_OK);
  CHECK(n == 400);
  CHECK(dim == 2);
  std::vector<int> labels(n);
  CHECK(hlm_dataset_labels(d, labels.data()) == HLM_OK);
  for (int l : labels) CHECK((l >= 0 && l <= 2));

  double truth_energy = 0.0;
  CHECK(hlm_truth_energy(c, d, 1.0, &truth_energy) == HLM_OK);
  CHECK(truth_energy > 0.0);

  char* json = nullptr;
  REQUIRE(hlm_oracle(c, d, 1, &json) == HLM_OK);
  const auto oracle = nlohmann::json::parse(take(json));
  CHECK(oracle.at("energy").get<double>() <= truth_energy + 1e-12);
  CHECK(oracle.at("recovery_distance").get<double>() < 0.01);

  REQUIRE(hlm_fit(c, d, 9, 1, &json) == HLM_OK);
  const auto fit = nlohmann::json::parse(take(json));
  CHECK(fit.at("energy").get<double>() >= oracle.at("energy").get<double>() - 1e-6);

  hlm_dataset_free(d);
  hlm_config_free(c);
}

TEST_CASE("dataset from points") {
  const double pts[] = {1, 0, 0, 1, 2, 0};
  const int labels[] = {1, 2, 1};
  hlm_dataset* d = nullptr;
  REQUIRE(hlm_dataset_from_points(pts, labels, 3, 2, &d) == HLM_OK);
  std::vector<double> back(6);
  CHECK(hlm_dataset_points(d, back.data()) == HLM_OK);
  CHECK(std::memcmp(back.data(), pts, sizeof pts) == 0);
  hlm_dataset_free(d);
  CHECK(hlm_dataset_from_points(pts, labels, 0, 2, &d) == HLM_ERR_EMPTY);
}

TEST_CASE("oracle refuses unsupported shapes") {
  hlm_config* c = nullptr;
  REQUIRE(hlm_config_parse(R"({"K":2,"D":3,"d":1,"truth":[[1,0,0],[0,0.6,0.8]],"alphas":[0.2,0.4,0.4],"N":50})", &c) == HLM_OK);
  hlm_dataset* d = nullptr;
  REQUIRE(hlm_sample(c, 1, &d) == HLM_OK);
  char* json = nullptr;
  CHECK(hlm_oracle(c, d, 1, &json) == HLM_ERR_CAPABILITY);
  CHECK(json == nullptr);
  hlm_dataset_free(d);
  hlm_config_free(c);
}

TEST_CASE("sweep outputs are optional and deterministic") {
  hlm_config* c = nullptr;
  REQUIRE(hlm_config_parse(kLines, &c) == HLM_OK);
  char* csv1 = nullptr;
  char* csv2 = nullptr;
  char* summary = nullptr;
  REQUIRE(hlm_sweep(c, 1, &csv1, nullptr, &summary, nullptr, nullptr) == HLM_OK);
  REQUIRE(hlm_sweep(c, 2, &csv2, nullptr, nullptr, nullptr, nullptr) == HLM_OK);
  CHECK(take(csv1) == take(csv2));
  CHECK(nlohmann::json::parse(take(summary)).at("cells").size() == 1);
  hlm_config_free(c);
}

TEST_CASE("config echo re-parses to the same hash") {
  hlm_config* c = nullptr;
  REQUIRE(hlm_config_parse(kLines, &c) == HLM_OK);
  char* echo = nullptr;
  REQUIRE(hlm_config_echo(c, &echo) == HLM_OK);
  hlm_config* again = nullptr;
  REQUIRE(hlm_config_parse(echo, &again) == HLM_OK);
  hlm_string_free(echo);
  std::uint64_t h1 = 0, h2 = 0;
  CHECK(hlm_config_hash(c, &h1) == HLM_OK);
  CHECK(hlm_config_hash(again, &h2) == HLM_OK);
  CHECK(h1 == h2);
  hlm_config_free(again);
  hlm_config_free(c);
}

TEST_CASE("bounds through the C API") {
  hlm_config* c = nullptr;
  REQUIRE(hlm_config_parse(kLines, &c) == HLM_OK);
  char* json = nullptr;
  REQUIRE(hlm_bounds(c, &json) == HLM_OK);
  const auto b = nlohmann::json::parse(take(json));
  CHECK(b.at("per_p").at(0).at("tau0").get<double>() == doctest::Approx(0.0795774715));
  hlm_config_free(c);
}
