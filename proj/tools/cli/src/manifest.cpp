#include "mfg_cli/manifest.hpp"

#include <json.hpp>

namespace mfg::cli {

std::string RunManifest::to_json(int indent) const {
  nlohmann::json j;
  j["command"] = command;
  j["arguments"] = arguments;
  j["config_hash"] = config_hash.empty() ? nlohmann::json(nullptr) : nlohmann::json(config_hash);
  j["seeds"] = seeds;
  j["tool_version"] = tool_version;
  j["outputs"] = outputs;
  j["wall_clock_seconds"] = wall_clock_seconds;
  j["exit_code"] = exit_code;
  return j.dump(indent);
}

std::filesystem::path manifest_path_for(const std::filesystem::path& primary_output,
                                        bool is_directory) {
  if (is_directory) return primary_output / "manifest.json";
  std::filesystem::path p = primary_output;
  p.replace_extension(".manifest.json");
  return p;
}

}  // namespace mfg::cli
