#pragma once

#include <filesystem>
#include <string>

#include "mfg/game.hpp"

namespace mfg {

/// Parses a game description. Throws ConfigError on malformed JSON, unknown
/// keys, unknown state or action names, or inconsistent shapes. Structural
/// checks (stochastic rows, masses, ...) are left to validate_game().
GameSpec parse_game(const std::string& json_text);
GameSpec load_game(const std::filesystem::path& path);

/// Canonical JSON text of a game; parse_game(game_to_json(g)) reproduces g.
std::string game_to_json(const GameSpec& game, int indent = 2);

/// Reads {"mu": {"<subpop>": [[...], ...]}} (one row per state, one column per
/// policy). The same layout is accepted inside msne_report.json. Throws
/// ConfigError on shape mismatch or an invalid distribution.
StatePolicyDist parse_distribution(const std::string& json_text, const GameSpec& game,
                                   const GamePolicies& policies);
StatePolicyDist load_distribution(const std::filesystem::path& path, const GameSpec& game,
                                  const GamePolicies& policies);

/// {"<subpop>": [[...]]} with full double precision.
std::string distribution_to_json(const GameSpec& game, const StatePolicyDist& mu);

/// Whole file as a string; throws ConfigError if unreadable.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace mfg
