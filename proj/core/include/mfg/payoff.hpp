#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mfg/game.hpp"

namespace mfg {

/// P[s'][s] = phi(s | s', u(s')). Row-stochastic, p x p.
Matrix policy_kernel(const SubpopSpec& sub, const DeterministicPolicy& u);

/// Discounted value of a fixed policy at frozen rewards r_u.
///
/// PaperLiteral: V = beta P (I - beta P)^-1 r, i.e. sum_{k>=1} beta^k (P^k r).
/// CurrentState: V = beta (I - beta P)^-1 r.
/// Throws NumericalFailure if the solve residual exceeds 1e-9.
Vector discounted_values(const Matrix& P, const Vector& r, double beta,
                         ValueConvention convention = ValueConvention::PaperLiteral);

/// Discounted payoffs J^c(u, s, mu_SA) of every deterministic policy.
class PayoffTable {
 public:
  PayoffTable() = default;
  explicit PayoffTable(std::vector<Matrix> values) : values_(std::move(values)) {}

  /// V^c as an (n^c x p^c) matrix: row u, column s.
  const Matrix& values(std::size_t c) const { return values_[c]; }
  Matrix& values(std::size_t c) { return values_[c]; }

  /// F^{c,s}: payoff of every policy started from state s.
  Vector at_state(std::size_t c, std::size_t s) const {
    return values_[c].col(static_cast<Eigen::Index>(s));
  }
  double operator()(std::size_t c, std::size_t s, std::size_t u) const {
    return values_[c](static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(s));
  }
  /// J^c(u, eta0, mu_SA) = eta0 . V[u].
  double from_distribution(std::size_t c, std::size_t u, const Vector& eta0) const {
    return values_[c].row(static_cast<Eigen::Index>(u)).dot(eta0);
  }

  std::size_t num_subpops() const { return values_.size(); }
  double max_abs() const;

 private:
  std::vector<Matrix> values_;
};

/// Caches the policy kernels and the factorizations of (I - beta P_u), which
/// do not depend on the population state. Immutable after construction.
class PayoffEvaluator {
 public:
  PayoffEvaluator(const GameSpec& game, const GamePolicies& policies);

  PayoffTable evaluate(const StatePolicyDist& mu) const;
  PayoffTable evaluate(const StateActionDist& mu_sa) const;

  const Matrix& kernel(std::size_t c, std::size_t u) const { return kernels_[c][u]; }
  const GameSpec& game() const { return game_; }
  const GamePolicies& policies() const { return policies_; }

 private:
  GameSpec game_;
  GamePolicies policies_;
  std::vector<std::vector<Matrix>> kernels_;
  std::vector<std::vector<Eigen::PartialPivLU<Matrix>>> factors_;
  std::vector<std::vector<Matrix>> resolvent_inputs_;  // I - beta P_u, for residuals
};

/// Convenience wrapper; builds a PayoffEvaluator for a single evaluation.
PayoffTable payoff_table(const GameSpec& game, const GamePolicies& policies,
                         const StatePolicyDist& mu);

/// True iff the digraph of strictly positive entries is strongly connected.
bool check_irreducibility(const Matrix& P);

/// Unique eta with eta = eta P, sum eta = 1. Throws NotIrreducible.
Vector stationary_distribution(const Matrix& P);

/// eta^{c,u} for every subpopulation and policy.
using StationaryTable = std::vector<std::vector<Vector>>;
StationaryTable stationary_table(const GameSpec& game, const GamePolicies& policies);

}  // namespace mfg
