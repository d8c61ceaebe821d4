#include "mfg/mac.hpp"

#include <cmath>
#include <sstream>

#include "json_params.hpp"
#include "mfg/errors.hpp"

namespace mfg {

namespace {

#include "mac_defaults.inc"

}  // namespace

namespace detail {

MacParams mac_params_from_json(const nlohmann::json& j, MacParams base,
                               std::initializer_list<const char*> ignored) {
  if (!j.is_object()) throw ConfigError("MAC parameters must be a JSON object");
  struct Field {
    const char* key;
    double MacParams::*member;
  };
  static constexpr Field fields[] = {
      {"P_L", &MacParams::P_L},         {"P_H", &MacParams::P_H},
      {"sigma2", &MacParams::sigma2},   {"Cbar", &MacParams::Cbar},
      {"beta_price", &MacParams::beta_price}, {"alpha", &MacParams::alpha},
      {"gamma", &MacParams::gamma},     {"p_F", &MacParams::p_F},
      {"T_msg", &MacParams::T_msg},     {"Rd", &MacParams::Rd},
      {"Rr", &MacParams::Rr},           {"beta", &MacParams::beta},
      {"mass", &MacParams::mass},
  };
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto& f : fields) {
      if (key == f.key) {
        if (!value.is_number()) throw ConfigError("MAC parameter '" + key + "' must be a number");
        base.*(f.member) = value.get<double>();
        known = true;
      }
    }
    for (const char* name : ignored) known = known || key == name;
    if (!known) throw ConfigError("unknown MAC parameter '" + key + "'");
  }
  return base;
}

nlohmann::json mac_params_to_json(const MacParams& p) {
  return {{"P_L", p.P_L},     {"P_H", p.P_H},     {"sigma2", p.sigma2},
          {"Cbar", p.Cbar},   {"beta_price", p.beta_price},
          {"alpha", p.alpha}, {"gamma", p.gamma}, {"p_F", p.p_F},
          {"T_msg", p.T_msg}, {"Rd", p.Rd},       {"Rr", p.Rr},
          {"beta", p.beta},   {"mass", p.mass}};
}

}  // namespace detail

std::vector<std::string> mac_param_violations(const MacParams& p) {
  std::vector<std::string> bad;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };
  const double values[] = {p.P_L, p.P_H, p.sigma2, p.Cbar, p.beta_price, p.alpha, p.gamma,
                           p.p_F, p.T_msg, p.Rd, p.Rr, p.beta, p.mass};
  for (double v : values) {
    if (!std::isfinite(v)) {
      bad.push_back("all parameters must be finite");
      return bad;
    }
  }
  need(p.P_L > 0.0, "P_L > 0");
  need(p.P_H > p.P_L, "P_L < P_H");
  need(p.sigma2 > 0.0, "sigma2 > 0");
  need(p.Cbar > 0.0, "Cbar > 0");
  need(p.beta_price >= 0.0, "beta_price >= 0");
  need(p.alpha > 0.0, "alpha > 0");
  need(p.gamma > 0.0, "gamma > 0");
  need(p.p_F > 0.0 && p.p_F <= 1.0, "0 < p_F <= 1");
  need(p.T_msg > 0.0, "T_msg > 0");
  need(p.Rd > 0.0, "Rd > 0");
  need(p.Rr > 0.0, "Rr > 0");
  need(p.beta > 0.0 && p.beta < 1.0, "0 < beta < 1");
  need(p.mass == 1.0, "mass = 1 for the single-subpopulation game");
  if (!(p.alpha * p.P_H + p.gamma <= 1.0)) {
    std::ostringstream os;
    os << "alpha*P_H + gamma <= 1 (got " << p.alpha * p.P_H + p.gamma << ")";
    bad.push_back(os.str());
  }
  return bad;
}

void validate_mac_params(const MacParams& params) {
  const auto bad = mac_param_violations(params);
  if (bad.empty()) return;
  std::string msg = "invalid MAC parameters, violated:";
  for (const auto& b : bad) msg += " [" + b + "]";
  throw InvalidParams(msg);
}

GameSpec build_mac(const MacParams& params) {
  validate_mac_params(params);
  SubpopSpec sub;
  sub.name = "mac";
  sub.mass = params.mass;
  sub.decision_rate = params.Rd;
  sub.revision_rate = params.Rr;
  sub.states = {"E", "AE", "AF", "F"};
  sub.actions = {"N", "L", "H"};
  sub.feasible = {{kMacNone}, {kMacLow}, {kMacLow, kMacHigh}, {kMacLow, kMacHigh}};
  sub.kernel = TransitionKernel(4, 3);
  sub.kernel(kMacEmpty, kMacNone, kMacFull) = params.p_F;
  sub.kernel(kMacEmpty, kMacNone, kMacEmpty) = 1.0 - params.p_F;
  for (int s = kMacAlmostEmpty; s <= kMacFull; ++s) {
    for (int a : sub.feasible[static_cast<std::size_t>(s)]) {
      const double drop = params.alpha * params.power(a) + params.gamma;
      sub.kernel(static_cast<std::size_t>(s), static_cast<std::size_t>(a),
                 static_cast<std::size_t>(s - 1)) = drop;
      sub.kernel(static_cast<std::size_t>(s), static_cast<std::size_t>(a),
                 static_cast<std::size_t>(s)) = 1.0 - drop;
    }
  }
  sub.reward = MacSinr{params};

  GameSpec game;
  game.beta = params.beta;
  game.subpops.push_back(std::move(sub));
  return game;
}

const char* default_params_document() { return kMacDefaultParamsJson; }

MacParams default_params() {
  static const MacParams params = [] {
    const auto doc = nlohmann::json::parse(kMacDefaultParamsJson);
    return detail::mac_params_from_json(doc.at("params"), MacParams{});
  }();
  return params;
}

MacParams parse_mac_params(const std::string& json_text, const MacParams& base) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("MAC parameters: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("MAC parameters must be a JSON object");
  if (doc.contains("params")) return detail::mac_params_from_json(doc.at("params"), base);
  return detail::mac_params_from_json(doc, base);
}

}  // namespace mfg
