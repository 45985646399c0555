#include "cotlen/manifest.hpp"

#include <nlohmann/json.hpp>

#include "cotlen/io.hpp"

namespace cotlen::manifest {

void RunManifest::add_param(const std::string& key, const std::string& value) {
  params.emplace_back(key, value);
}

nlohmann::json RunManifest::parameters() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : params) j[k] = v;
  return j;
}

nlohmann::json RunManifest::to_json() const {
  return {{"command", command},
          {"parameters", parameters()},
          {"seed", seed},
          {"outputs", outputs},
          {"tool_version", tool_version},
          {"argv", argv}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  for (const auto& [k, v] : j.at("parameters").items()) {
    m.params.emplace_back(k, v.get<std::string>());
  }
  return m;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& out) {
  std::filesystem::path p = out;
  p += ".manifest.json";
  return p;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& out) {
  io::atomic_write(manifest_path_for(out), m.to_json().dump(2) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& path) {
  return RunManifest::from_json(nlohmann::json::parse(io::read_file(path)));
}

}  // namespace cotlen::manifest
