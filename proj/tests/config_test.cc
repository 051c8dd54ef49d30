#include <filesystem>
#include <stdexcept>
#include <fstream>

#include "doctest.h"
#include "reccache/config.h"
#include "reccache/harness.h"
#include "test_util.h"

using namespace reccache;
using nlohmann::json;

namespace {

std::filesystem::path TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("reccache_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config round trip") {
  std::vector<ExperimentConfig> configs{reccache::testing::SmallConfig()};
  for (const auto& name : kPresetNames) {
    for (const auto& v : Preset(name)) configs.push_back(v.config);
  }
  for (const auto& c : configs) {
    const auto doc = ConfigToJson(c);
    const auto back = ConfigFromJson(doc);
    CHECK(ConfigToJson(back) == doc);
    CHECK(ConfigDigest(back) == ConfigDigest(c));
  }
}

TEST_CASE("digest changes with the config") {
  auto c = reccache::testing::SmallConfig();
  const auto before = ConfigDigest(c);
  CHECK(before.size() == 16);
  c.run.seed += 1;
  CHECK(ConfigDigest(c) != before);
}

TEST_CASE("overrides") {
  auto doc = ConfigToJson(reccache::testing::SmallConfig());
  ApplyOverrides(doc, {"catalog.T=123", "algo.estimator=raw",
                       "run.policies=[\"greedy\"]", "acceptance.value=0.25"});
  CHECK(doc["catalog"]["T"] == 123);
  CHECK(doc["algo"]["estimator"] == "raw");
  CHECK(doc["run"]["policies"] == json::array({"greedy"}));
  const auto c = ConfigFromJson(doc);
  CHECK(c.catalog.horizon == 123);
  CHECK(c.algo.estimator == EstimatorVariant::kRaw);
  CHECK_THROWS_AS(ApplyOverrides(doc, {"no_equals_sign"}), ConfigError);
  CHECK_THROWS_AS(ApplyOverrides(doc, {"catalog.N.x=1"}), ConfigError);
}

TEST_CASE("malformed documents") {
  const auto good = ConfigToJson(reccache::testing::SmallConfig());
  SUBCASE("missing section") {
    auto doc = good;
    doc.erase("algo");
    CHECK_THROWS_AS(ConfigFromJson(doc), ConfigError);
  }
  SUBCASE("missing key") {
    auto doc = good;
    doc["catalog"].erase("N");
    CHECK_THROWS_AS(ConfigFromJson(doc), ConfigError);
  }
  SUBCASE("wrong type") {
    auto doc = good;
    doc["catalog"]["N"] = "many";
    CHECK_THROWS_AS(ConfigFromJson(doc), ConfigError);
  }
  SUBCASE("negative count") {
    auto doc = good;
    doc["catalog"]["U"] = -2;
    CHECK_THROWS_AS(ConfigFromJson(doc), ConfigError);
  }
  SUBCASE("unknown kinds") {
    auto doc = good;
    doc["induced"]["kind"] = "pareto";
    CHECK_THROWS_AS(ConfigFromJson(doc), ConfigError);
  }
  SUBCASE("bad interval") {
    auto doc = good;
    doc["acceptance"]["interval"] = {0.1};
    CHECK_THROWS_AS(ConfigFromJson(doc), ConfigError);
  }
}

TEST_CASE("matrix files") {
  const auto dir = TempDir("matrix");
  {
    std::ofstream out(dir / "prefs.csv");
    out << "0.5,0.25,0.25\n0.1 0.2 0.7\n";
  }
  const auto m = ReadMatrix(dir / "prefs.csv");
  REQUIRE(m.size() == 2);
  CHECK(m[0] == std::vector<double>{0.5, 0.25, 0.25});
  CHECK(m[1] == std::vector<double>{0.1, 0.2, 0.7});

  auto doc = ConfigToJson(reccache::testing::SmallConfig());
  doc["catalog"]["N"] = 3;
  doc["catalog"]["U"] = 2;
  doc["catalog"]["C"] = 2;
  doc["catalog"]["R"] = 1;
  doc["preferences"] = {{"kind", "matrix"}, {"matrix_path", "prefs.csv"}};
  {
    std::ofstream out(dir / "config.json");
    out << doc.dump(2);
  }
  const auto c = LoadConfig(dir / "config.json");
  CHECK(c.preferences.matrix == m);
  CHECK(ValidateConfig(c).ok());

  {
    std::ofstream out(dir / "bad.csv");
    out << "0.5,x\n";
  }
  CHECK_THROWS_AS(ReadMatrix(dir / "bad.csv"), ConfigError);
  CHECK_THROWS_AS(ReadMatrix(dir / "missing.csv"), ConfigError);
  {
    std::ofstream out(dir / "broken.json");
    out << "{ not json";
  }
  CHECK_THROWS_AS(LoadConfig(dir / "broken.json"), ConfigError);
}

TEST_CASE("permutation spelling") {
  auto doc = ConfigToJson(reccache::testing::SmallConfig());
  doc["preferences"]["permute"] = true;
  CHECK(ConfigFromJson(doc).preferences.permute == RankPermutation::kPerUser);
  doc["preferences"]["permute"] = false;
  CHECK(ConfigFromJson(doc).preferences.permute == RankPermutation::kNone);
  doc["preferences"]["permute"] = "shared";
  CHECK(ConfigFromJson(doc).preferences.permute == RankPermutation::kShared);
  doc["preferences"]["permute"] = "sometimes";
  CHECK_THROWS_AS(ConfigFromJson(doc), ConfigError);
}
