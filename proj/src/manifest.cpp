#include "stylus/manifest.hpp"

#include <ctime>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stylus/common.hpp"
#include "stylus/serialize.hpp"

namespace stylus {

RunManifest build_manifest(const std::vector<std::string>& args,
                           const std::vector<std::string>& input_paths, uint64_t seed) {
  RunManifest m;
  std::string joined;
  for (const auto& a : args) {
    if (!joined.empty()) joined.push_back(' ');
    joined += a;
  }
  m.command_line = joined;
  m.config_hash = to_hex(fnv1a64(joined.data(), joined.size()));
  for (const auto& p : input_paths) m.input_hashes[p] = to_hex(fnv1a64_file(p));
  m.seed = seed;

  std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  m.timestamp = buf;
  return m;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command_line"] = m.command_line;
  j["config_hash"] = m.config_hash;
  j["input_hashes"] = nlohmann::ordered_json::object();
  for (const auto& [path, hash] : m.input_hashes) j["input_hashes"][path] = hash;
  j["seed"] = m.seed;
  j["version"] = m.version;
  j["timestamp"] = m.timestamp;
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& m, const std::string& out_path) {
  std::ofstream out(out_path + ".manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write manifest for " + out_path);
  out << manifest_json(m);
}

}  // namespace stylus
