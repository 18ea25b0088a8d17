#include <doctest.h>

#include <algorithm>

#include "bayeshead/config.hpp"
#include "helpers.hpp"

using namespace bayeshead;
using nlohmann::json;
using testing::TempDir;

namespace {

const std::filesystem::path kData = BAYESHEAD_DATA_DIR;
const std::filesystem::path kConfigs = BAYESHEAD_CONFIG_DIR;

json minimal() {
  return json{{"experiment", "iris-hmc"}, {"seed", 3}, {"data", {{"path", (kData / "iris.csv").string()}}}};
}

bool has_error(const ConfigResult& r, const std::string& needle) {
  return std::any_of(r.errors.begin(), r.errors.end(),
                     [&](const std::string& e) { return e.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("bundled configs validate") {
  for (const char* name : {"iris-hmc.json", "head-hmc.json", "head-laplace.json", "compare.json"}) {
    const auto r = validate_config_file(kConfigs / name);
    CHECK_MESSAGE(r.errors.empty(), name << ": " << (r.errors.empty() ? "" : r.errors.front()));
    CHECK(r.config.has_value());
  }
}

TEST_CASE("minimal config fills defaults") {
  const auto r = validate_config(minimal(), ".");
  REQUIRE(r.errors.empty());
  const RunConfig& c = *r.config;
  CHECK(c.experiment == Experiment::iris_hmc);
  CHECK(c.seed == 3);
  CHECK(c.model == ModelKind::mlp);
  CHECK(c.hidden_dim == 8);
  CHECK(c.prior_std == 1.0);
  CHECK(c.sampler.algorithm == SamplerKind::nuts);
  CHECK(c.sampler.target_accept == 0.8);
  CHECK(c.laplace.n_mc_samples == 30);
  CHECK(c.n_bins == 10);
  CHECK(c.threshold == 0.5);
  CHECK(c.standardize);
  CHECK(c.entries == std::vector<Index>{0, 1});
  CHECK(c.marginals == std::vector<std::string>{"W1[0,1]", "b2[1]"});
}

TEST_CASE("missing seed is rejected") {
  json doc = minimal();
  doc.erase("seed");
  const auto r = validate_config(doc, ".");
  CHECK_FALSE(r.config.has_value());
  CHECK(has_error(r, "seed: required field is missing"));
}

TEST_CASE("threshold outside [0,1] names the field and value") {
  json doc = minimal();
  doc["eval"] = {{"threshold", 1.5}};
  const auto r = validate_config(doc, ".");
  CHECK_FALSE(r.config.has_value());
  CHECK(has_error(r, "eval.threshold: must lie in [0,1], got 1.5"));
}

TEST_CASE("all problems are reported together") {
  json doc = minimal();
  doc["sampler"] = {{"n_samples", 2}, {"target_accept", 1.2}, {"algorithm", "gibbs"}};
  doc["laplace"] = {{"n_mc_samples", 0}};
  doc["colour"] = "red";
  const auto r = validate_config(doc, ".");
  CHECK(r.errors.size() >= 5);
  CHECK(has_error(r, "sampler.n_samples"));
  CHECK(has_error(r, "sampler.target_accept"));
  CHECK(has_error(r, "sampler.algorithm: unknown value 'gibbs'"));
  CHECK(has_error(r, "laplace.n_mc_samples"));
  CHECK(has_error(r, "colour: unknown field"));
}

TEST_CASE("type errors are reported per field") {
  json doc = minimal();
  doc["seed"] = "seven";
  doc["model"] = {{"hidden_dim", 2.5}};
  const auto r = validate_config(doc, ".");
  CHECK(has_error(r, "seed"));
  CHECK(has_error(r, "model.hidden_dim: must be an integer"));
}

TEST_CASE("relative data paths resolve against the config directory") {
  TempDir dir("cfg");
  std::filesystem::create_directories(dir / "sub");
  std::filesystem::copy_file(kData / "iris.csv", dir / "iris.csv");
  json doc = minimal();
  doc["data"]["path"] = "../iris.csv";
  testing::spit(dir / "sub" / "c.json", doc.dump());
  const auto r = validate_config_file(dir / "sub" / "c.json");
  REQUIRE(r.errors.empty());
  CHECK(std::filesystem::equivalent(r.config->data_file, dir / "iris.csv"));

  doc["data"]["path"] = "missing.csv";
  testing::spit(dir / "sub" / "c.json", doc.dump());
  CHECK(has_error(validate_config_file(dir / "sub" / "c.json"), "data.path: file not found"));
}

TEST_CASE("overrides replace nested values with JSON or strings") {
  json doc = minimal();
  apply_overrides(doc, {"sampler.n_samples=50", "model.kind=head", "eval.entries=[4,5]", "seed=99"});
  CHECK(doc["sampler"]["n_samples"] == 50);
  CHECK(doc["model"]["kind"] == "head");
  CHECK(doc["eval"]["entries"] == json::array({4, 5}));
  CHECK(doc["seed"] == 99);
  CHECK_THROWS_AS(apply_overrides(doc, {"no_equals_sign"}), ValidationError);
}

TEST_CASE("normalized echo is a fixed point") {
  const auto r = validate_config_file(kConfigs / "compare.json");
  REQUIRE(r.config);
  json echo = r.config->to_json();
  CHECK_FALSE(echo.contains("output_dir"));
  echo["data"]["path"] = r.config->data_file.string();
  if (r.config->qa_text_file) echo["data"]["qa_text"] = r.config->qa_text_file->string();
  const auto again = validate_config(echo, kConfigs);
  REQUIRE_MESSAGE(again.errors.empty(), (again.errors.empty() ? "" : again.errors.front()));
  json echo2 = again.config->to_json();
  echo2["data"]["path"] = echo["data"]["path"];
  echo2["data"]["qa_text"] = echo["data"]["qa_text"];
  CHECK(echo2 == echo);
}

TEST_CASE("non-object configuration is rejected") {
  const auto r = validate_config(json::array({1, 2}), ".");
  CHECK_FALSE(r.config);
  CHECK_FALSE(r.errors.empty());
}
