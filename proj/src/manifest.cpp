#include "detour/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace detour {

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const ExperimentConfig& cfg) { return fnv1a_hex(config_to_json(cfg).dump()); }

std::string write_manifest(const std::string& output, const RunManifest& m) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  const nlohmann::json j{{"command", m.command},   {"config_hash", m.config_hash}, {"seed", m.seed},
                         {"version", kVersion},    {"arguments", m.arguments},     {"inputs", m.inputs},
                         {"outputs", m.outputs},   {"created", stamp}};
  const std::string path = output + ".manifest.json";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
  return path;
}

}  // namespace detour
