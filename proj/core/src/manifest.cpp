#include "drcal/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "drcal/errors.hpp"
#include "drcal/run_writer.hpp"

namespace drcal {

using json = nlohmann::json;

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a64_file_hex(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read file for hashing: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string bytes = ss.str();
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
  return buf;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  json doc;
  doc["command_line"] = manifest.command_line;
  doc["resolved_config"] =
      manifest.resolved_config.empty()
          ? json::object()
          : json::parse(manifest.resolved_config);
  doc["input_hashes"] = manifest.input_hashes;
  doc["seed"] = manifest.seed;
  doc["tool_version"] = manifest.tool_version;
  doc["duration_seconds"] = manifest.duration_seconds;
  write_text_file(path, doc.dump(2) + "\n");
}

RunManifest load_manifest(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ParseError("malformed manifest " + path + ": " + e.what());
  }
  RunManifest m;
  m.command_line = doc.value("command_line", "");
  if (doc.contains("resolved_config"))
    m.resolved_config = doc["resolved_config"].dump();
  if (doc.contains("input_hashes"))
    m.input_hashes =
        doc["input_hashes"].get<std::map<std::string, std::string>>();
  m.seed = doc.value("seed", std::uint64_t(0));
  m.tool_version = doc.value("tool_version", "");
  m.duration_seconds = doc.value("duration_seconds", 0.0);
  return m;
}

bool verify_manifest_hashes(const RunManifest& manifest) {
  for (const auto& [path, recorded] : manifest.input_hashes) {
    if (fnv1a64_file_hex(path) != recorded) return false;
  }
  return true;
}

}  // namespace drcal
