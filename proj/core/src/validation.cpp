#include "mfg/validation.hpp"

#include <cmath>
#include <sstream>

#include "mfg/errors.hpp"
#include "mfg/payoff.hpp"

namespace mfg {

bool ValidationReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (!c.passed && c.name.rfind(name, 0) == 0) return &c;
  }
  return nullptr;
}

namespace {

constexpr double kRowSumTol = 1e-12;

void add(ValidationReport& report, std::string name, bool passed, std::string detail) {
  report.checks.push_back({std::move(name), passed, std::move(detail)});
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

bool reward_shape_ok(const GameSpec& game, std::size_t c, std::string& why) {
  const auto& sub = game.subpops[c];
  const auto p = static_cast<Eigen::Index>(sub.num_states());
  const auto q = static_cast<Eigen::Index>(sub.num_actions());
  if (const auto* rw = std::get_if<AffineCongestion>(&sub.reward)) {
    if (rw->base.rows() != p || rw->base.cols() != q) {
      why = "affine base must be " + std::to_string(p) + "x" + std::to_string(q);
      return false;
    }
    if (rw->weights.rows() != p * q ||
        rw->weights.cols() != static_cast<Eigen::Index>(game.state_action_size())) {
      why = "affine weights must be " + std::to_string(p * q) + "x" +
            std::to_string(game.state_action_size());
      return false;
    }
    if (!rw->base.allFinite() || !rw->weights.allFinite()) {
      why = "affine reward has non-finite entries";
      return false;
    }
    return true;
  }
  const auto& mac = std::get<MacSinr>(sub.reward);
  if (q != 3) {
    why = "mac reward needs exactly three actions (N, L, H)";
    return false;
  }
  if (!(mac.params.sigma2 > 0.0) || !(mac.params.P_L > 0.0) || !(mac.params.P_H > mac.params.P_L)) {
    why = "mac reward needs sigma2 > 0 and 0 < P_L < P_H";
    return false;
  }
  return true;
}

}  // namespace

ValidationReport validate_game(const GameSpec& game, const std::optional<ProtocolSpec>& protocol) {
  ValidationReport report;

  {
    std::ostringstream os;
    os << "beta = " << game.beta;
    add(report, "beta_range", game.beta > 0.0 && game.beta < 1.0, os.str());
  }

  if (game.subpops.empty()) {
    add(report, "subpopulations", false, "no subpopulations");
    return report;
  }

  {
    double total = 0.0;
    bool positive = true;
    for (const auto& sub : game.subpops) {
      total += sub.mass;
      positive = positive && sub.mass > 0.0;
    }
    std::ostringstream os;
    os << "sum of masses = " << total;
    add(report, "mass_normalization", positive && std::abs(total - 1.0) <= 1e-12, os.str());
  }

  {
    std::vector<std::string> bad;
    for (const auto& sub : game.subpops) {
      if (!(sub.decision_rate > 0.0)) bad.push_back(sub.name + ": decision_rate must be > 0");
      if (!(sub.revision_rate > 0.0)) bad.push_back(sub.name + ": revision_rate must be > 0");
    }
    add(report, "positive_rates", bad.empty(), join(bad));
  }

  bool structure_ok = true;
  {
    std::vector<std::string> bad;
    for (const auto& sub : game.subpops) {
      if (sub.states.empty() || sub.actions.empty()) {
        bad.push_back(sub.name + ": needs at least one state and one action");
        continue;
      }
      if (sub.feasible.size() != sub.num_states()) {
        bad.push_back(sub.name + ": feasible sets do not cover every state");
        continue;
      }
      for (std::size_t s = 0; s < sub.num_states(); ++s) {
        if (sub.feasible[s].empty()) bad.push_back(sub.name + "." + sub.states[s] + ": empty feasible set");
        for (int a : sub.feasible[s]) {
          if (a < 0 || static_cast<std::size_t>(a) >= sub.num_actions()) {
            bad.push_back(sub.name + "." + sub.states[s] + ": action index out of range");
          }
        }
      }
    }
    structure_ok = bad.empty();
    add(report, "feasible_sets", bad.empty(), join(bad));
  }
  if (!structure_ok) return report;

  {
    std::vector<std::string> bad;
    for (const auto& sub : game.subpops) {
      if (sub.kernel.num_states() != sub.num_states() || sub.kernel.num_actions() != sub.num_actions()) {
        bad.push_back(sub.name + ": kernel shape mismatch");
        continue;
      }
      // Rows of infeasible (s, a) pairs are unreachable and not checked.
      for (std::size_t s = 0; s < sub.num_states(); ++s) {
        for (int a : sub.feasible[s]) {
          double sum = 0.0;
          bool in_range = true;
          for (std::size_t to = 0; to < sub.num_states(); ++to) {
            const double pr = sub.kernel(s, static_cast<std::size_t>(a), to);
            in_range = in_range && pr >= 0.0 && pr <= 1.0;
            sum += pr;
          }
          if (!in_range || std::abs(sum - 1.0) > kRowSumTol) {
            std::ostringstream os;
            os.precision(17);
            os << sub.name << ": row (" << sub.states[s] << ", " << sub.actions[static_cast<std::size_t>(a)]
               << ") sums to " << sum << (in_range ? "" : " with entries outside [0,1]");
            bad.push_back(os.str());
          }
        }
      }
    }
    structure_ok = bad.empty();
    add(report, "kernel_stochastic", bad.empty(), join(bad));
  }

  {
    std::vector<std::string> bad;
    for (std::size_t c = 0; c < game.subpops.size(); ++c) {
      std::string why;
      if (!reward_shape_ok(game, c, why)) bad.push_back(game.subpops[c].name + ": " + why);
    }
    add(report, "reward_spec", bad.empty(), join(bad));
    structure_ok = structure_ok && bad.empty();
  }

  GamePolicies policies;
  try {
    policies = enumerate_policies(game);
    std::ostringstream os;
    for (std::size_t c = 0; c < policies.size(); ++c) {
      os << (c ? ", " : "") << game.subpops[c].name << ": " << policies[c].size();
    }
    add(report, "policy_count", true, os.str());
  } catch (const Error& e) {
    add(report, "policy_count", false, e.what());
    return report;
  }

  if (structure_ok) {
    std::vector<std::string> bad;
    for (std::size_t c = 0; c < game.subpops.size(); ++c) {
      for (std::size_t u = 0; u < policies[c].size(); ++u) {
        if (!check_irreducibility(policy_kernel(game.subpops[c], policies[c][u]))) {
          bad.push_back(game.subpops[c].name + ": policy " + std::to_string(u + 1) + " is reducible");
        }
      }
    }
    add(report, "irreducibility", bad.empty(), join(bad));
  }

  if (protocol && structure_ok) {
    const auto bound = check_rate_bound(game, *protocol);
    std::ostringstream os;
    os << "B = " << bound.payoff_bound;
    for (const auto& b : bound.subpops) {
      os << "; " << b.name << ": bound " << b.bound << ", minimal Rr " << b.minimal_revision_rate;
    }
    add(report, "rate_bound", bound.passed, os.str());
  }

  return report;
}

}  // namespace mfg
