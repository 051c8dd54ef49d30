#ifndef RECCACHE_CONFIG_H_
#define RECCACHE_CONFIG_H_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "reccache/model.h"

namespace reccache {

/// Raised for malformed or unreadable configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the configuration document. Relative matrix paths resolve against
/// `base_dir`. Throws ConfigError.
ExperimentConfig ConfigFromJson(const nlohmann::json& doc,
                                const std::filesystem::path& base_dir = {});

ExperimentConfig LoadConfig(const std::filesystem::path& path);

/// Canonical document; ConfigFromJson(ConfigToJson(c)) reproduces c.
/// Explicit matrices are embedded inline.
nlohmann::json ConfigToJson(const ExperimentConfig& config);

/// Applies `section.key=value` overrides; values are parsed as JSON when
/// possible and taken as strings otherwise. Throws ConfigError.
void ApplyOverrides(nlohmann::json& doc,
                    const std::vector<std::string>& overrides);

/// Reads a comma- or whitespace-separated matrix, one row per line.
std::vector<std::vector<double>> ReadMatrix(const std::filesystem::path& path);

/// 16 hex digits identifying a configuration.
std::string ConfigDigest(const ExperimentConfig& config);

}  // namespace reccache

#endif  // RECCACHE_CONFIG_H_
