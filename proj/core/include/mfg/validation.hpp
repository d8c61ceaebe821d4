#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfg/game.hpp"
#include "mfg/protocols.hpp"

namespace mfg {

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool passed() const;
  /// First failed check with the given name prefix, if any.
  const ValidationCheck* find(const std::string& name) const;
};

/// Structural checks: discount range, mass normalization, rates, feasible
/// sets, kernel stochasticity, policy count, irreducibility of every policy
/// kernel, and (with a protocol) the conservative rate bound. Failures are
/// reported, never thrown.
ValidationReport validate_game(const GameSpec& game,
                               const std::optional<ProtocolSpec>& protocol = std::nullopt);

}  // namespace mfg
