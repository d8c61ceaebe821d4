#pragma once

#include <json.hpp>

#include "mfg/mac_params.hpp"

namespace mfg::detail {

/// Reads MacParams fields present in `j` over `base`. Unknown keys other than
/// those in `ignored` throw ConfigError.
MacParams mac_params_from_json(const nlohmann::json& j, MacParams base,
                               std::initializer_list<const char*> ignored = {});

nlohmann::json mac_params_to_json(const MacParams& p);

}  // namespace mfg::detail
