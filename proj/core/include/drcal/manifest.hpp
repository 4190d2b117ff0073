#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace drcal {

/// Provenance record written next to every CLI output. Input hashes are
/// FNV-1a 64 over the raw file bytes, hex-encoded.
struct RunManifest {
  std::string command_line;
  std::string resolved_config;  // JSON text
  std::map<std::string, std::string> input_hashes;  // path -> hash
  std::uint64_t seed = 0;
  std::string tool_version;
  double duration_seconds = 0.0;
};

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::string fnv1a64_file_hex(const std::string& path);

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest load_manifest(const std::string& path);

/// Recomputes every input hash; true iff all match the recorded values.
bool verify_manifest_hashes(const RunManifest& manifest);

}  // namespace drcal
