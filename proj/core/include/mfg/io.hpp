#pragma once

#include <filesystem>
#include <string>

#include "mfg/game.hpp"
#include "mfg/meanfield.hpp"

namespace mfg {

/// 64-bit FNV-1a of the canonical compact game JSON, as 16 hex digits.
std::string game_hash(const GameSpec& game);
std::string fnv1a_hex(const std::string& bytes);

/// `t,<sub>.<state>.<policy>,...` with policies numbered from 1 in canonical
/// order, states outer and policies inner.
std::string trajectory_header(const GameSpec& game, const GamePolicies& policies);

/// One row per snapshot, 17 significant digits.
void write_trajectory_csv(const std::filesystem::path& path, const GameSpec& game,
                          const GamePolicies& policies, const Trajectory& traj);

/// Sidecar JSON: source, protocol, kappa, dt, game hash, seed, players,
/// guard statistics, event count and the number of rows.
std::string trajectory_metadata_json(const Trajectory& traj);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// printf("%.17g").
std::string format_double(double value);

}  // namespace mfg
