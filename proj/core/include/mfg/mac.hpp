#pragma once

#include <string>
#include <vector>

#include "mfg/game.hpp"
#include "mfg/mac_params.hpp"

namespace mfg {

/// State indices of the medium access game, in canonical order.
enum MacState : int { kMacEmpty = 0, kMacAlmostEmpty = 1, kMacAlmostFull = 2, kMacFull = 3 };
/// Action indices: no transmission, low power, high power.
enum MacAction : int { kMacNone = 0, kMacLow = 1, kMacHigh = 2 };

/// Human-readable descriptions of every violated constraint; empty if valid.
std::vector<std::string> mac_param_violations(const MacParams& params);

/// Throws InvalidParams naming each violated constraint.
void validate_mac_params(const MacParams& params);

/// Single-subpopulation game with states (E, AE, AF, F), actions (N, L, H),
/// feasible sets E:{N}, AE:{L}, AF:{L,H}, F:{L,H}, recharge E -> F with
/// probability p_F and one-level drain with probability alpha P_a + gamma.
GameSpec build_mac(const MacParams& params);

/// The certified default parameter set, compiled in from
/// data/mac_default_params.json.
MacParams default_params();

/// Overrides read from JSON text, either flat MacParams keys or a document
/// with a "params" object (other top-level keys are ignored), applied over
/// `base`. Throws ConfigError on unknown keys or malformed JSON. The result
/// is not validated.
MacParams parse_mac_params(const std::string& json_text, const MacParams& base);

/// The raw JSON document behind default_params(), including its grid-search
/// provenance.
const char* default_params_document();

}  // namespace mfg
