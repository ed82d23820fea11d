#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "detour/experiment.hpp"

namespace detour {

inline constexpr const char* kVersion = "0.1.0";

/// FNV-1a over the bytes of `data`, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

/// Hash of the canonical JSON form of a configuration.
std::string config_hash(const ExperimentConfig& cfg);

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  nlohmann::json arguments = nlohmann::json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

/// Writes `<output>.manifest.json` next to `output`. Returns its path.
std::string write_manifest(const std::string& output, const RunManifest& m);

}  // namespace detour
