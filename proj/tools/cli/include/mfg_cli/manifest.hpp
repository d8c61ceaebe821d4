#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mfg::cli {

/// Provenance record written for every command run.
struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;  // argv after the program name
  std::string config_hash;             // empty when the command reads no game
  std::vector<std::uint64_t> seeds;
  std::string tool_version;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;
  int exit_code = 0;

  std::string to_json(int indent = 2) const;
};

/// Where the manifest of a run goes: next to the first output, as
/// `<stem>.manifest.json` for files and `manifest.json` inside directories.
std::filesystem::path manifest_path_for(const std::filesystem::path& primary_output,
                                        bool is_directory);

}  // namespace mfg::cli
