#include "mfg/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "mfg/config.hpp"
#include "mfg/errors.hpp"

namespace mfg {

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string game_hash(const GameSpec& game) { return fnv1a_hex(game_to_json(game, -1)); }

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string trajectory_header(const GameSpec& game, const GamePolicies& policies) {
  std::string header = "t";
  for (std::size_t c = 0; c < game.num_subpops(); ++c) {
    const auto& sub = game.subpops[c];
    for (const auto& state : sub.states) {
      for (std::size_t u = 0; u < policies[c].size(); ++u) {
        header += "," + sub.name + "." + state + "." + std::to_string(u + 1);
      }
    }
  }
  return header;
}

void write_trajectory_csv(const std::filesystem::path& path, const GameSpec& game,
                          const GamePolicies& policies, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << trajectory_header(game, policies) << '\n';
  std::string line;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    line = format_double(traj.times[i]);
    const auto& mu = traj.snapshots[i];
    for (std::size_t c = 0; c < mu.num_subpops(); ++c) {
      const Matrix& b = mu[c];
      for (Eigen::Index s = 0; s < b.rows(); ++s) {
        for (Eigen::Index u = 0; u < b.cols(); ++u) {
          line += ',';
          line += format_double(b(s, u));
        }
      }
    }
    out << line << '\n';
  }
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

std::string trajectory_metadata_json(const Trajectory& traj) {
  const auto& m = traj.metadata;
  nlohmann::json j;
  j["source"] = m.source;
  j["protocol"] = m.protocol;
  j["kappa"] = m.rate_scale;
  if (m.source == "meanfield") j["dt"] = m.dt;
  j["game_hash"] = m.game_hash;
  j["seed"] = m.seed ? nlohmann::json(*m.seed) : nlohmann::json(nullptr);
  j["players"] = m.players ? nlohmann::json(*m.players) : nlohmann::json(nullptr);
  j["rows"] = traj.size();
  j["t_end"] = traj.times.empty() ? 0.0 : traj.times.back();
  if (m.source == "meanfield") {
    j["guard"] = {{"steps", m.guard.steps},
                  {"activations", m.guard.activations},
                  {"clamped_entries", m.guard.clamped_entries},
                  {"large_clamps", m.guard.large_clamps},
                  {"max_correction", m.guard.max_correction}};
  } else {
    j["events"] = m.events;
  }
  return j.dump(2);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

}  // namespace mfg
