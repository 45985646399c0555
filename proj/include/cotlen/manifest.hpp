#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cotlen::manifest {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Description of one CLI run, written as <out>.manifest.json next to the
// outputs. Re-invoking the tool with the recorded argv (same seed) must
// reproduce every output byte-identically.
struct RunManifest {
  std::string command;
  nlohmann::json parameters() const;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::string tool_version{kToolVersion};
  std::vector<std::string> argv;  // arguments after the program name

  // stored parameter map
  std::vector<std::pair<std::string, std::string>> params;

  void add_param(const std::string& key, const std::string& value);
  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

std::filesystem::path manifest_path_for(const std::filesystem::path& out);
void write_manifest(const RunManifest& m, const std::filesystem::path& out);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace cotlen::manifest
