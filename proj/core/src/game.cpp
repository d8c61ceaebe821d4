#include "mfg/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mfg/errors.hpp"

namespace mfg {

bool SubpopSpec::is_feasible(std::size_t s, int a) const {
  if (s >= feasible.size()) return false;
  const auto& set = feasible[s];
  return std::find(set.begin(), set.end(), a) != set.end();
}

std::size_t GameSpec::state_action_offset(std::size_t c) const {
  std::size_t offset = 0;
  for (std::size_t k = 0; k < c; ++k) offset += subpops[k].num_states() * subpops[k].num_actions();
  return offset;
}

std::size_t GameSpec::state_action_size() const { return state_action_offset(subpops.size()); }

std::size_t StatePolicyDist::size() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += static_cast<std::size_t>(b.size());
  return n;
}

Vector StatePolicyDist::flatten() const {
  Vector flat(static_cast<Eigen::Index>(size()));
  Eigen::Index pos = 0;
  for (const auto& b : blocks) {
    flat.segment(pos, b.size()) = b.reshaped();
    pos += b.size();
  }
  return flat;
}

StatePolicyDist StatePolicyDist::unflatten(const Vector& flat, const StatePolicyDist& shape) {
  StatePolicyDist out;
  out.blocks.reserve(shape.blocks.size());
  Eigen::Index pos = 0;
  for (const auto& b : shape.blocks) {
    out.blocks.emplace_back(flat.segment(pos, b.size()).reshaped(b.rows(), b.cols()));
    pos += b.size();
  }
  return out;
}

Vector StatePolicyDist::policy_marginal(std::size_t c) const {
  return blocks[c].colwise().sum().transpose();
}

double StatePolicyDist::l1_distance(const StatePolicyDist& other) const {
  double d = 0.0;
  for (std::size_t c = 0; c < blocks.size(); ++c) d += (blocks[c] - other.blocks[c]).cwiseAbs().sum();
  return d;
}

double StatePolicyDist::max_abs() const {
  double m = 0.0;
  for (const auto& b : blocks) {
    if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
  }
  return m;
}

PolicySet enumerate_policies(const SubpopSpec& sub, std::size_t cap) {
  const std::size_t p = sub.num_states();
  if (sub.feasible.size() != p) {
    throw PreconditionError("subpopulation '" + sub.name + "': feasible sets do not match states");
  }
  double count = 1.0;
  for (const auto& set : sub.feasible) {
    if (set.empty()) {
      throw PreconditionError("subpopulation '" + sub.name + "': empty feasible set");
    }
    count *= static_cast<double>(set.size());
  }
  if (count > static_cast<double>(cap)) {
    throw PolicyExplosion("subpopulation '" + sub.name + "' has " +
                          std::to_string(static_cast<long double>(count)) +
                          " deterministic policies, above the cap of " + std::to_string(cap));
  }

  PolicySet out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<std::size_t> digit(p, 0);
  while (true) {
    DeterministicPolicy u;
    u.choice.resize(p);
    for (std::size_t s = 0; s < p; ++s) u.choice[s] = sub.feasible[s][digit[s]];
    out.push_back(std::move(u));
    // Odometer increment, last state fastest.
    std::size_t s = p;
    while (s > 0) {
      --s;
      if (++digit[s] < sub.feasible[s].size()) break;
      digit[s] = 0;
      if (s == 0) return out;
    }
    if (p == 0) return out;
  }
}

GamePolicies enumerate_policies(const GameSpec& game) {
  GamePolicies out;
  out.reserve(game.subpops.size());
  for (const auto& sub : game.subpops) out.push_back(enumerate_policies(sub, game.policy_cap));
  return out;
}

StatePolicyDist zero_distribution(const GameSpec& game, const GamePolicies& policies) {
  StatePolicyDist mu;
  for (std::size_t c = 0; c < game.subpops.size(); ++c) {
    mu.blocks.push_back(Matrix::Zero(static_cast<Eigen::Index>(game.subpops[c].num_states()),
                                     static_cast<Eigen::Index>(policies[c].size())));
  }
  return mu;
}

StatePolicyDist uniform_distribution(const GameSpec& game, const GamePolicies& policies) {
  StatePolicyDist mu = zero_distribution(game, policies);
  for (std::size_t c = 0; c < game.subpops.size(); ++c) {
    auto& b = mu[c];
    b.setConstant(game.subpops[c].mass / static_cast<double>(b.size()));
  }
  return mu;
}

bool is_valid_distribution(const GameSpec& game, const StatePolicyDist& mu, double tol) {
  if (mu.num_subpops() != game.num_subpops()) return false;
  for (std::size_t c = 0; c < mu.num_subpops(); ++c) {
    const auto& b = mu[c];
    if (b.rows() != static_cast<Eigen::Index>(game.subpops[c].num_states())) return false;
    if (b.size() > 0 && b.minCoeff() < -tol) return false;
    if (!b.allFinite()) return false;
    if (std::abs(b.sum() - game.subpops[c].mass) > tol) return false;
  }
  return true;
}

StateActionDist project_state_action(const GameSpec& game, const GamePolicies& policies,
                                     const StatePolicyDist& mu) {
  StateActionDist out;
  out.blocks.reserve(game.subpops.size());
  for (std::size_t c = 0; c < game.subpops.size(); ++c) {
    const auto& sub = game.subpops[c];
    Matrix sa = Matrix::Zero(static_cast<Eigen::Index>(sub.num_states()),
                             static_cast<Eigen::Index>(sub.num_actions()));
    const auto& block = mu[c];
    for (std::size_t u = 0; u < policies[c].size(); ++u) {
      const auto& policy = policies[c][u];
      for (std::size_t s = 0; s < sub.num_states(); ++s) {
        sa(static_cast<Eigen::Index>(s), policy(s)) +=
            block(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(u));
      }
    }
    out.blocks.push_back(std::move(sa));
  }
  return out;
}

namespace {

double affine_reward(const GameSpec& game, const AffineCongestion& rw, std::size_t c, std::size_t s,
                     int a, const StateActionDist& mu_sa) {
  const auto q = game.subpops[c].num_actions();
  const auto row = static_cast<Eigen::Index>(s * q + static_cast<std::size_t>(a));
  double r = rw.base(static_cast<Eigen::Index>(s), a);
  Eigen::Index col = 0;
  for (std::size_t k = 0; k < game.subpops.size(); ++k) {
    const auto& block = mu_sa[k];
    // Row-major (s', a') traversal matching the weight column layout.
    for (Eigen::Index sp = 0; sp < block.rows(); ++sp) {
      for (Eigen::Index ap = 0; ap < block.cols(); ++ap) {
        r += rw.weights(row, col++) * block(sp, ap);
      }
    }
  }
  return r;
}

double mac_interference(const MacParams& prm, const Matrix& sa) {
  double mass = 0.0;
  for (Eigen::Index a = 1; a < sa.cols() && a < 3; ++a) {
    mass += prm.power(static_cast<int>(a)) * sa.col(a).sum();
  }
  return prm.flow_factor() * mass;
}

double mac_reward(const MacParams& prm, int a, double interference) {
  const double power = prm.power(a);
  if (power == 0.0) return 0.0;
  return power / (prm.sigma2 + interference) - prm.beta_price * power;
}

}  // namespace

double evaluate_reward(const GameSpec& game, std::size_t c, std::size_t s, int a,
                       const StateActionDist& mu_sa) {
  const auto& sub = game.subpops[c];
  if (!sub.is_feasible(s, a)) {
    throw InfeasibleAction("action " + std::to_string(a) + " is not feasible in state " +
                           std::to_string(s) + " of subpopulation '" + sub.name + "'");
  }
  return std::visit(
      [&](const auto& rw) -> double {
        using T = std::decay_t<decltype(rw)>;
        if constexpr (std::is_same_v<T, AffineCongestion>) {
          return affine_reward(game, rw, c, s, a, mu_sa);
        } else {
          return mac_reward(rw.params, a, mac_interference(rw.params, mu_sa[c]));
        }
      },
      sub.reward);
}

Matrix reward_matrix(const GameSpec& game, std::size_t c, const StateActionDist& mu_sa) {
  const auto& sub = game.subpops[c];
  Matrix r = Matrix::Zero(static_cast<Eigen::Index>(sub.num_states()),
                          static_cast<Eigen::Index>(sub.num_actions()));
  if (const auto* mac = std::get_if<MacSinr>(&sub.reward)) {
    const double interference = mac_interference(mac->params, mu_sa[c]);
    for (std::size_t s = 0; s < sub.num_states(); ++s) {
      for (int a : sub.feasible[s]) r(static_cast<Eigen::Index>(s), a) = mac_reward(mac->params, a, interference);
    }
    return r;
  }
  for (std::size_t s = 0; s < sub.num_states(); ++s) {
    for (int a : sub.feasible[s]) r(static_cast<Eigen::Index>(s), a) = evaluate_reward(game, c, s, a, mu_sa);
  }
  return r;
}

RewardInterval reward_bounds(const GameSpec& game, std::size_t c, std::size_t s, int a) {
  const auto& sub = game.subpops[c];
  if (!sub.is_feasible(s, a)) {
    throw InfeasibleAction("reward_bounds: infeasible (state, action)");
  }
  if (const auto* mac = std::get_if<MacSinr>(&sub.reward)) {
    const auto& prm = mac->params;
    const double max_interference = prm.flow_factor() * prm.P_H * sub.mass;
    const double lo = mac_reward(prm, a, max_interference);
    const double hi = mac_reward(prm, a, 0.0);
    return {std::min(lo, hi), std::max(lo, hi)};
  }
  const auto& rw = std::get<AffineCongestion>(sub.reward);
  const auto row = static_cast<Eigen::Index>(s * sub.num_actions() + static_cast<std::size_t>(a));
  RewardInterval out{rw.base(static_cast<Eigen::Index>(s), a), rw.base(static_cast<Eigen::Index>(s), a)};
  // The mass of each subpopulation is split over its feasible cells, so the
  // linear term ranges between m * min(weight) and m * max(weight).
  Eigen::Index col = 0;
  for (const auto& other : game.subpops) {
    double wmin = std::numeric_limits<double>::infinity();
    double wmax = -std::numeric_limits<double>::infinity();
    for (std::size_t sp = 0; sp < other.num_states(); ++sp) {
      for (std::size_t ap = 0; ap < other.num_actions(); ++ap, ++col) {
        if (!other.is_feasible(sp, static_cast<int>(ap))) continue;
        wmin = std::min(wmin, rw.weights(row, col));
        wmax = std::max(wmax, rw.weights(row, col));
      }
    }
    if (std::isfinite(wmin)) {
      out.lo += other.mass * wmin;
      out.hi += other.mass * wmax;
    }
  }
  return out;
}

double reward_magnitude_bound(const GameSpec& game) {
  double r_max = 0.0;
  for (std::size_t c = 0; c < game.subpops.size(); ++c) {
    const auto& sub = game.subpops[c];
    for (std::size_t s = 0; s < sub.num_states(); ++s) {
      for (int a : sub.feasible[s]) {
        const auto iv = reward_bounds(game, c, s, a);
        r_max = std::max({r_max, std::abs(iv.lo), std::abs(iv.hi)});
      }
    }
  }
  return r_max;
}

double affine_lipschitz_constant(const AffineCongestion& reward) {
  if (reward.weights.size() == 0) return 0.0;
  return reward.weights.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace mfg
