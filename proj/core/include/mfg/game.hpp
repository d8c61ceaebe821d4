#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mfg/mac_params.hpp"

namespace mfg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr std::size_t kDefaultPolicyCap = 10000;

/// phi(to | from, action), stored densely as states x actions x states.
class TransitionKernel {
 public:
  TransitionKernel() = default;
  TransitionKernel(std::size_t states, std::size_t actions)
      : states_(states), actions_(actions), probs_(states * actions * states, 0.0) {}

  double operator()(std::size_t from, std::size_t action, std::size_t to) const {
    return probs_[index(from, action, to)];
  }
  double& operator()(std::size_t from, std::size_t action, std::size_t to) {
    return probs_[index(from, action, to)];
  }

  std::size_t num_states() const { return states_; }
  std::size_t num_actions() const { return actions_; }

 private:
  std::size_t index(std::size_t from, std::size_t action, std::size_t to) const {
    return (from * actions_ + action) * states_ + to;
  }

  std::size_t states_ = 0;
  std::size_t actions_ = 0;
  std::vector<double> probs_;
};

/// r(s,a,mu) = base(s,a) + sum over every subpopulation cell (c',s',a') of
/// weights(s*q + a, offset(c') + s'*q' + a') * mu_SA^{c'}[s',a'].
struct AffineCongestion {
  Matrix base;     // p x q
  Matrix weights;  // (p*q) x (sum_c p^c q^c)
};

/// Expected SINR minus power price; interference is the subpopulation's own
/// transmit-power mass.
struct MacSinr {
  MacParams params;
};

using RewardSpec = std::variant<AffineCongestion, MacSinr>;

struct SubpopSpec {
  std::string name;
  double mass = 1.0;
  double decision_rate = 1.0;
  double revision_rate = 1.0;
  std::vector<std::string> states;
  std::vector<std::string> actions;
  /// feasible[s] lists action indices, ascending.
  std::vector<std::vector<int>> feasible;
  TransitionKernel kernel;
  RewardSpec reward;

  std::size_t num_states() const { return states.size(); }
  std::size_t num_actions() const { return actions.size(); }
  bool is_feasible(std::size_t s, int a) const;
};

/// How the first reward of a discounted payoff is collected.
enum class ValueConvention {
  PaperLiteral,  // first reward at the post-transition state: V = bP (I - bP)^-1 r
  CurrentState,  // first reward at the current state:        V = b (I - bP)^-1 r
};

struct GameSpec {
  double beta = 0.9;
  std::vector<SubpopSpec> subpops;
  ValueConvention value_convention = ValueConvention::PaperLiteral;
  std::size_t policy_cap = kDefaultPolicyCap;

  std::size_t num_subpops() const { return subpops.size(); }
  /// Offset of subpopulation c in the concatenated state-action vector.
  std::size_t state_action_offset(std::size_t c) const;
  std::size_t state_action_size() const;
};

/// A state -> action map; choice[s] is an action index feasible at s.
struct DeterministicPolicy {
  std::vector<int> choice;

  int operator()(std::size_t s) const { return choice[s]; }
  bool operator==(const DeterministicPolicy&) const = default;
};

using PolicySet = std::vector<DeterministicPolicy>;
/// One PolicySet per subpopulation, in canonical order.
using GamePolicies = std::vector<PolicySet>;

/// Per subpopulation a (states x policies) matrix of nonnegative masses.
struct StatePolicyDist {
  std::vector<Matrix> blocks;

  Matrix& operator[](std::size_t c) { return blocks[c]; }
  const Matrix& operator[](std::size_t c) const { return blocks[c]; }
  std::size_t num_subpops() const { return blocks.size(); }

  /// Total number of scalar entries across all blocks.
  std::size_t size() const;
  Vector flatten() const;
  /// Inverse of flatten(); `shape` supplies block dimensions.
  static StatePolicyDist unflatten(const Vector& flat, const StatePolicyDist& shape);

  /// Sum_s mu^c[s,u] for every u.
  Vector policy_marginal(std::size_t c) const;
  double l1_distance(const StatePolicyDist& other) const;
  double max_abs() const;
};

/// Per subpopulation a (states x actions) matrix.
struct StateActionDist {
  std::vector<Matrix> blocks;

  Matrix& operator[](std::size_t c) { return blocks[c]; }
  const Matrix& operator[](std::size_t c) const { return blocks[c]; }
};

/// All deterministic policies of a subpopulation, lexicographic over
/// (state index, action index): the last state varies fastest.
/// Throws PolicyExplosion if the product of feasible-set sizes exceeds `cap`.
PolicySet enumerate_policies(const SubpopSpec& sub, std::size_t cap = kDefaultPolicyCap);
GamePolicies enumerate_policies(const GameSpec& game);

StatePolicyDist zero_distribution(const GameSpec& game, const GamePolicies& policies);
/// Mass m^c spread uniformly over every (state, policy) cell.
StatePolicyDist uniform_distribution(const GameSpec& game, const GamePolicies& policies);

/// Checks nonnegativity and per-subpopulation mass; `tol` applies to both.
bool is_valid_distribution(const GameSpec& game, const StatePolicyDist& mu, double tol = 1e-10);

/// mu_SA^c[s,a] = sum over policies u with u(s) = a of mu^c[s,u].
StateActionDist project_state_action(const GameSpec& game, const GamePolicies& policies,
                                     const StatePolicyDist& mu);

/// r^c(s, a, mu_SA). Throws InfeasibleAction when a is not in A^c(s).
double evaluate_reward(const GameSpec& game, std::size_t c, std::size_t s, int a,
                       const StateActionDist& mu_sa);

/// Every r^c(s,a,mu_SA) in one p x q matrix (infeasible entries are 0).
Matrix reward_matrix(const GameSpec& game, std::size_t c, const StateActionDist& mu_sa);

struct RewardInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Interval enclosure of r^c(s,a,.) over the whole state-action space.
RewardInterval reward_bounds(const GameSpec& game, std::size_t c, std::size_t s, int a);

/// max over feasible (c,s,a) of |r| on the state-action space.
double reward_magnitude_bound(const GameSpec& game);

/// Max row-sum of |weights|; an L1 Lipschitz constant of an affine reward.
double affine_lipschitz_constant(const AffineCongestion& reward);

}  // namespace mfg
