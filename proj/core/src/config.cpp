#include "mfg/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json_params.hpp"
#include "mfg/errors.hpp"

namespace mfg {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed,
                  std::initializer_list<const char*> required) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
  for (const char* r : required) {
    if (!j.contains(r)) throw ConfigError("missing key '" + std::string(r) + "' in " + where);
  }
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  return j.get<double>();
}

std::vector<std::string> names(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a nonempty array of strings");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : j) {
    if (!e.is_string()) throw ConfigError(what + " must contain strings");
    if (!seen.insert(e.get<std::string>()).second) {
      throw ConfigError("duplicate name '" + e.get<std::string>() + "' in " + what);
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::size_t index_of(const std::vector<std::string>& list, const std::string& name,
                     const std::string& what) {
  const auto it = std::find(list.begin(), list.end(), name);
  if (it == list.end()) throw ConfigError("unknown " + what + " '" + name + "'");
  return static_cast<std::size_t>(it - list.begin());
}

Matrix matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw ConfigError(what + " must have " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(what + " rows must have " + std::to_string(cols) + " entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(row[static_cast<std::size_t>(c)], what);
  }
  return m;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

SubpopSpec parse_subpop(const json& j, std::size_t index) {
  const std::string where = "subpops[" + std::to_string(index) + "]";
  require_keys(j, where,
               {"name", "mass", "decision_rate", "revision_rate", "states", "actions", "feasible",
                "kernel", "reward"},
               {"name", "mass", "decision_rate", "revision_rate", "states", "actions", "feasible",
                "kernel", "reward"});
  SubpopSpec sub;
  if (!j["name"].is_string()) throw ConfigError(where + ".name must be a string");
  sub.name = j["name"].get<std::string>();
  sub.mass = number(j["mass"], where + ".mass");
  sub.decision_rate = number(j["decision_rate"], where + ".decision_rate");
  sub.revision_rate = number(j["revision_rate"], where + ".revision_rate");
  sub.states = names(j["states"], where + ".states");
  sub.actions = names(j["actions"], where + ".actions");
  const auto p = sub.num_states();
  const auto q = sub.num_actions();

  const json& feas = j["feasible"];
  if (!feas.is_object()) throw ConfigError(where + ".feasible must be an object");
  sub.feasible.assign(p, {});
  for (const auto& [state, acts] : feas.items()) {
    const auto s = index_of(sub.states, state, "state");
    if (!acts.is_array()) throw ConfigError(where + ".feasible." + state + " must be an array");
    for (const auto& a : acts) {
      if (!a.is_string()) throw ConfigError(where + ".feasible." + state + " must list action names");
      sub.feasible[s].push_back(static_cast<int>(index_of(sub.actions, a.get<std::string>(), "action")));
    }
    std::sort(sub.feasible[s].begin(), sub.feasible[s].end());
    if (std::adjacent_find(sub.feasible[s].begin(), sub.feasible[s].end()) != sub.feasible[s].end()) {
      throw ConfigError(where + ".feasible." + state + " lists an action twice");
    }
  }

  const json& kern = j["kernel"];
  if (!kern.is_object()) throw ConfigError(where + ".kernel must be an object");
  sub.kernel = TransitionKernel(p, q);
  for (const auto& [state, by_action] : kern.items()) {
    const auto s = index_of(sub.states, state, "state");
    if (!by_action.is_object()) throw ConfigError(where + ".kernel." + state + " must be an object");
    for (const auto& [action, targets] : by_action.items()) {
      const auto a = index_of(sub.actions, action, "action");
      if (!targets.is_object()) {
        throw ConfigError(where + ".kernel." + state + "." + action + " must be an object");
      }
      for (const auto& [to, prob] : targets.items()) {
        sub.kernel(s, a, index_of(sub.states, to, "state")) =
            number(prob, where + ".kernel." + state + "." + action + "." + to);
      }
    }
  }

  const json& rw = j["reward"];
  if (!rw.is_object() || !rw.contains("type") || !rw["type"].is_string()) {
    throw ConfigError(where + ".reward needs a string 'type'");
  }
  const auto type = rw["type"].get<std::string>();
  if (type == "affine") {
    require_keys(rw, where + ".reward", {"type", "base", "weights"}, {"type", "base", "weights"});
    AffineCongestion a;
    a.base = matrix(rw["base"], static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q),
                    where + ".reward.base");
    // Column count depends on the whole game; checked after all subpops are read.
    const json& w = rw["weights"];
    if (!w.is_array() || w.empty() || !w[0].is_array()) {
      throw ConfigError(where + ".reward.weights must be a matrix");
    }
    a.weights = matrix(w, static_cast<Eigen::Index>(p * q), static_cast<Eigen::Index>(w[0].size()),
                       where + ".reward.weights");
    sub.reward = std::move(a);
  } else if (type == "mac") {
    MacParams base;
    base.Rd = sub.decision_rate;
    base.Rr = sub.revision_rate;
    base.mass = sub.mass;
    sub.reward = MacSinr{detail::mac_params_from_json(rw, base, {"type"})};
  } else {
    throw ConfigError(where + ".reward.type must be 'affine' or 'mac'");
  }
  return sub;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

GameSpec parse_game(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  require_keys(doc, "game config", {"beta", "subpops", "value_convention", "policy_cap"},
               {"beta", "subpops"});
  GameSpec game;
  game.beta = number(doc["beta"], "beta");
  if (doc.contains("value_convention")) {
    const auto& vc = doc["value_convention"];
    if (vc == "paper_literal") {
      game.value_convention = ValueConvention::PaperLiteral;
    } else if (vc == "current_state") {
      game.value_convention = ValueConvention::CurrentState;
    } else {
      throw ConfigError("value_convention must be 'paper_literal' or 'current_state'");
    }
  }
  if (doc.contains("policy_cap")) {
    if (!doc["policy_cap"].is_number_unsigned() || doc["policy_cap"].get<std::size_t>() == 0) {
      throw ConfigError("policy_cap must be a positive integer");
    }
    game.policy_cap = doc["policy_cap"].get<std::size_t>();
  }
  if (!doc["subpops"].is_array() || doc["subpops"].empty()) {
    throw ConfigError("subpops must be a nonempty array");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc["subpops"].size(); ++i) {
    game.subpops.push_back(parse_subpop(doc["subpops"][i], i));
    if (!seen.insert(game.subpops.back().name).second) {
      throw ConfigError("duplicate subpopulation name '" + game.subpops.back().name + "'");
    }
  }
  const auto width = static_cast<Eigen::Index>(game.state_action_size());
  for (const auto& sub : game.subpops) {
    if (const auto* a = std::get_if<AffineCongestion>(&sub.reward); a && a->weights.cols() != width) {
      throw ConfigError(sub.name + ".reward.weights must have " + std::to_string(width) + " columns");
    }
  }
  return game;
}

GameSpec load_game(const std::filesystem::path& path) { return parse_game(read_text_file(path)); }

std::string game_to_json(const GameSpec& game, int indent) {
  json doc;
  doc["beta"] = game.beta;
  doc["value_convention"] =
      game.value_convention == ValueConvention::PaperLiteral ? "paper_literal" : "current_state";
  doc["policy_cap"] = game.policy_cap;
  json subs = json::array();
  for (const auto& sub : game.subpops) {
    json j;
    j["name"] = sub.name;
    j["mass"] = sub.mass;
    j["decision_rate"] = sub.decision_rate;
    j["revision_rate"] = sub.revision_rate;
    j["states"] = sub.states;
    j["actions"] = sub.actions;
    json feas = json::object();
    json kern = json::object();
    for (std::size_t s = 0; s < sub.num_states(); ++s) {
      json acts = json::array();
      json by_action = json::object();
      for (int a : sub.feasible[s]) {
        const auto& an = sub.actions[static_cast<std::size_t>(a)];
        acts.push_back(an);
        json targets = json::object();
        for (std::size_t to = 0; to < sub.num_states(); ++to) {
          const double pr = sub.kernel(s, static_cast<std::size_t>(a), to);
          if (pr != 0.0) targets[sub.states[to]] = pr;
        }
        by_action[an] = std::move(targets);
      }
      feas[sub.states[s]] = std::move(acts);
      kern[sub.states[s]] = std::move(by_action);
    }
    j["feasible"] = std::move(feas);
    j["kernel"] = std::move(kern);
    if (const auto* a = std::get_if<AffineCongestion>(&sub.reward)) {
      j["reward"] = {{"type", "affine"}, {"base", matrix_json(a->base)}, {"weights", matrix_json(a->weights)}};
    } else {
      json r = detail::mac_params_to_json(std::get<MacSinr>(sub.reward).params);
      r["type"] = "mac";
      j["reward"] = std::move(r);
    }
    subs.push_back(std::move(j));
  }
  doc["subpops"] = std::move(subs);
  return doc.dump(indent);
}

StatePolicyDist parse_distribution(const std::string& json_text, const GameSpec& game,
                                   const GamePolicies& policies) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("mu") || !doc["mu"].is_object()) {
    throw ConfigError("distribution file needs an object 'mu' keyed by subpopulation");
  }
  const json& m = doc["mu"];
  StatePolicyDist mu;
  for (std::size_t c = 0; c < game.num_subpops(); ++c) {
    const auto& sub = game.subpops[c];
    if (!m.contains(sub.name)) throw ConfigError("distribution lacks subpopulation '" + sub.name + "'");
    mu.blocks.push_back(matrix(m[sub.name], static_cast<Eigen::Index>(sub.num_states()),
                               static_cast<Eigen::Index>(policies[c].size()), "mu." + sub.name));
  }
  if (m.size() != game.num_subpops()) throw ConfigError("distribution has unknown subpopulations");
  if (!is_valid_distribution(game, mu, 1e-9)) {
    throw ConfigError("distribution is not valid: entries must be >= 0 and sum to each mass");
  }
  return mu;
}

StatePolicyDist load_distribution(const std::filesystem::path& path, const GameSpec& game,
                                  const GamePolicies& policies) {
  return parse_distribution(read_text_file(path), game, policies);
}

std::string distribution_to_json(const GameSpec& game, const StatePolicyDist& mu) {
  json out = json::object();
  for (std::size_t c = 0; c < game.num_subpops(); ++c) out[game.subpops[c].name] = matrix_json(mu[c]);
  return out.dump();
}

}  // namespace mfg
