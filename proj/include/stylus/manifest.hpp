#pragma once

#include <map>
#include <string>
#include <vector>

namespace stylus {

constexpr const char* kToolkitVersion = "0.1.0";

// Written beside every CLI output file as <out>.manifest.json. Two runs
// whose manifests agree on everything but the timestamp produce
// byte-identical result files.
struct RunManifest {
  std::string command_line;
  std::string config_hash;                         // fnv1a64 of the argument list
  std::map<std::string, std::string> input_hashes;  // input path -> fnv1a64 of contents
  uint64_t seed = 0;
  std::string version = kToolkitVersion;
  std::string timestamp;  // UTC, ISO 8601
};

RunManifest build_manifest(const std::vector<std::string>& args,
                           const std::vector<std::string>& input_paths, uint64_t seed);

std::string manifest_json(const RunManifest& m);
void write_manifest(const RunManifest& m, const std::string& out_path);

}  // namespace stylus
