#include "reccache/config.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "reccache/seeding.h"

namespace reccache {
namespace {

using nlohmann::json;

const json& Section(const json& doc, const char* name) {
  if (!doc.contains(name) || !doc.at(name).is_object()) {
    throw ConfigError(std::string("missing section '") + name + "'");
  }
  return doc.at(name);
}

template <typename T>
T Get(const json& obj, const char* section, const char* key) {
  if (!obj.contains(key)) {
    throw ConfigError(std::string("missing key '") + section + "." + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for '") + section + "." + key + "'");
  }
}

template <typename T>
T GetOr(const json& obj, const char* section, const char* key, T fallback) {
  return obj.contains(key) ? Get<T>(obj, section, key) : fallback;
}

std::pair<double, double> GetInterval(const json& obj, const char* section,
                                      const char* key) {
  auto v = Get<std::vector<double>>(obj, section, key);
  if (v.size() != 2) {
    throw ConfigError(std::string("'") + section + "." + key +
                      "' must be [low, high]");
  }
  return {v[0], v[1]};
}

std::size_t GetCount(const json& obj, const char* section, const char* key) {
  const auto v = Get<long long>(obj, section, key);
  if (v < 0) {
    throw ConfigError(std::string("'") + section + "." + key +
                      "' must be non-negative");
  }
  return static_cast<std::size_t>(v);
}

RankPermutation ParsePermutation(const json& value) {
  if (value.is_boolean()) {
    return value.get<bool>() ? RankPermutation::kPerUser : RankPermutation::kNone;
  }
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "none") return RankPermutation::kNone;
    if (s == "shared") return RankPermutation::kShared;
    if (s == "per_user") return RankPermutation::kPerUser;
  }
  throw ConfigError("preferences.permute must be a bool or none|shared|per_user");
}

}  // namespace

ExperimentConfig ConfigFromJson(const json& doc,
                                const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("configuration must be an object");
  ExperimentConfig config;

  const auto& cat = Section(doc, "catalog");
  config.catalog.num_contents = GetCount(cat, "catalog", "N");
  config.catalog.num_users = GetCount(cat, "catalog", "U");
  config.catalog.cache_capacity = GetCount(cat, "catalog", "C");
  config.catalog.recs_per_user = GetCount(cat, "catalog", "R");
  config.catalog.horizon = GetCount(cat, "catalog", "T");

  const auto& prefs = Section(doc, "preferences");
  const auto pref_kind = Get<std::string>(prefs, "preferences", "kind");
  if (pref_kind == "zipf") {
    config.preferences.kind = PreferenceKind::kZipf;
    config.preferences.exponent = GetOr(prefs, "preferences", "exponent", 1.0);
    if (prefs.contains("permute")) {
      config.preferences.permute = ParsePermutation(prefs.at("permute"));
    }
  } else if (pref_kind == "matrix") {
    config.preferences.kind = PreferenceKind::kMatrix;
    if (prefs.contains("matrix")) {
      config.preferences.matrix =
          Get<std::vector<std::vector<double>>>(prefs, "preferences", "matrix");
    } else {
      auto path = std::filesystem::path(
          Get<std::string>(prefs, "preferences", "matrix_path"));
      config.preferences.matrix_path = path.string();
      if (path.is_relative()) path = base_dir / path;
      config.preferences.matrix = ReadMatrix(path);
    }
  } else {
    throw ConfigError("preferences.kind must be zipf or matrix");
  }

  const auto& acc = Section(doc, "acceptance");
  const auto acc_kind = Get<std::string>(acc, "acceptance", "kind");
  if (acc_kind == "constant") {
    config.acceptance.kind = AcceptanceKind::kConstant;
    config.acceptance.value = Get<double>(acc, "acceptance", "value");
  } else if (acc_kind == "list") {
    config.acceptance.kind = AcceptanceKind::kList;
    config.acceptance.values =
        Get<std::vector<double>>(acc, "acceptance", "values");
  } else if (acc_kind == "interval") {
    config.acceptance.kind = AcceptanceKind::kInterval;
    std::tie(config.acceptance.low, config.acceptance.high) =
        GetInterval(acc, "acceptance", "interval");
  } else {
    throw ConfigError("acceptance.kind must be constant, list or interval");
  }

  const auto& ind = Section(doc, "induced");
  const auto ind_kind = Get<std::string>(ind, "induced", "kind");
  if (ind_kind == "uniform") {
    config.induced.kind = InducedKind::kUniform;
  } else if (ind_kind == "zipf") {
    config.induced.kind = InducedKind::kZipf;
    if (ind.contains("beta")) {
      if (ind.at("beta").is_array()) {
        config.induced.betas = Get<std::vector<double>>(ind, "induced", "beta");
      } else {
        config.induced.beta = Get<double>(ind, "induced", "beta");
      }
    }
    if (ind.contains("beta_interval")) {
      config.induced.beta_interval = GetInterval(ind, "induced", "beta_interval");
    }
  } else {
    throw ConfigError("induced.kind must be uniform or zipf");
  }

  const auto& algo = Section(doc, "algo");
  config.algo.alpha = Get<double>(algo, "algo", "alpha");
  config.algo.eta = Get<double>(algo, "algo", "eta");
  config.algo.epsilon = GetOr(algo, "algo", "epsilon", config.algo.epsilon);
  const auto estimator =
      GetOr<std::string>(algo, "algo", "estimator", "raw");
  if (estimator == "raw") {
    config.algo.estimator = EstimatorVariant::kRaw;
  } else if (estimator == "recommendation_corrected") {
    config.algo.estimator = EstimatorVariant::kRecommendationCorrected;
  } else {
    throw ConfigError("algo.estimator must be raw or recommendation_corrected");
  }
  config.algo.shared_recs = GetOr(algo, "algo", "shared_recs", true);
  config.algo.baseline_recommends =
      GetOr(algo, "algo", "baseline_recommends", true);
  const auto rule = GetOr<std::string>(algo, "algo", "rec_rule", "top_index");
  if (rule == "top_index") {
    config.algo.rec_rule = RecommendationRule::kTopIndex;
  } else if (rule == "first_by_id") {
    config.algo.rec_rule = RecommendationRule::kFirstById;
  } else if (rule == "seeded_random") {
    config.algo.rec_rule = RecommendationRule::kSeededRandom;
  } else {
    throw ConfigError("algo.rec_rule must be top_index, first_by_id or seeded_random");
  }

  const auto& run = Section(doc, "run");
  config.run.policies = Get<std::vector<std::string>>(run, "run", "policies");
  config.run.runs = GetCount(run, "run", "runs");
  config.run.seed = Get<std::uint64_t>(run, "run", "seed");
  return config;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " +
                      e.what());
  }
  return ConfigFromJson(doc, path.parent_path());
}

json ConfigToJson(const ExperimentConfig& config) {
  json doc;
  const auto& cat = config.catalog;
  doc["catalog"] = {{"N", cat.num_contents},
                    {"U", cat.num_users},
                    {"C", cat.cache_capacity},
                    {"R", cat.recs_per_user},
                    {"T", cat.horizon}};

  const auto& prefs = config.preferences;
  if (prefs.kind == PreferenceKind::kZipf) {
    doc["preferences"] = {{"kind", "zipf"},
                          {"exponent", prefs.exponent},
                          {"permute", ToString(prefs.permute)}};
  } else {
    doc["preferences"] = {{"kind", "matrix"}, {"matrix", prefs.matrix}};
  }

  const auto& acc = config.acceptance;
  switch (acc.kind) {
    case AcceptanceKind::kConstant:
      doc["acceptance"] = {{"kind", "constant"}, {"value", acc.value}};
      break;
    case AcceptanceKind::kList:
      doc["acceptance"] = {{"kind", "list"}, {"values", acc.values}};
      break;
    case AcceptanceKind::kInterval:
      doc["acceptance"] = {{"kind", "interval"},
                           {"interval", {acc.low, acc.high}}};
      break;
  }

  const auto& ind = config.induced;
  if (ind.kind == InducedKind::kUniform) {
    doc["induced"] = {{"kind", "uniform"}};
  } else {
    json z = {{"kind", "zipf"}};
    if (!ind.betas.empty()) {
      z["beta"] = ind.betas;
    } else if (ind.beta) {
      z["beta"] = *ind.beta;
    }
    if (ind.beta_interval) {
      z["beta_interval"] = {ind.beta_interval->first, ind.beta_interval->second};
    }
    doc["induced"] = z;
  }

  const auto& algo = config.algo;
  doc["algo"] = {{"alpha", algo.alpha},
                 {"eta", algo.eta},
                 {"epsilon", algo.epsilon},
                 {"estimator", ToString(algo.estimator)},
                 {"shared_recs", algo.shared_recs},
                 {"baseline_recommends", algo.baseline_recommends},
                 {"rec_rule", ToString(algo.rec_rule)}};

  doc["run"] = {{"policies", config.run.policies},
                {"runs", config.run.runs},
                {"seed", config.run.seed}};
  return doc;
}

void ApplyOverrides(json& doc, const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + item + "' must look like key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string raw = item.substr(eq + 1);
    json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::stringstream path(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(path, part, '.')) parts.push_back(part);
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
      if (!node->is_object()) {
        throw ConfigError("override '" + key + "' does not name a section");
      }
      node = &(*node)[parts[k]];
    }
    if (parts.empty() || !node->is_object()) {
      throw ConfigError("override '" + key + "' does not name a key");
    }
    (*node)[parts.back()] = value;
  }
}

std::vector<std::vector<double>> ReadMatrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> row;
    double x = 0.0;
    while (fields >> x) row.push_back(x);
    if (!fields.eof()) {
      throw ConfigError("matrix '" + path.string() + "' has a non-numeric entry");
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

std::string ConfigDigest(const ExperimentConfig& config) {
  const auto text = ConfigToJson(config).dump();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(StableHash(text)));
  return buf;
}

}  // namespace reccache
