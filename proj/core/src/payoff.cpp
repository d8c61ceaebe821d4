#include "mfg/payoff.hpp"

#include <cmath>
#include <string>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

constexpr double kSolveResidualTol = 1e-9;

Vector values_from_factor(const Eigen::PartialPivLU<Matrix>& lu, const Matrix& resolvent_input,
                          const Matrix& P, const Vector& r, double beta,
                          ValueConvention convention) {
  Vector y = lu.solve(r);
  const double residual = (resolvent_input * y - r).cwiseAbs().maxCoeff();
  if (!(residual <= kSolveResidualTol)) {
    throw NumericalFailure("discounted value solve residual " + std::to_string(residual));
  }
  if (convention == ValueConvention::CurrentState) return beta * y;
  return beta * (P * y);
}

Matrix resolvent_input(const Matrix& P, double beta) {
  return Matrix::Identity(P.rows(), P.cols()) - beta * P;
}

}  // namespace

Matrix policy_kernel(const SubpopSpec& sub, const DeterministicPolicy& u) {
  const auto p = sub.num_states();
  Matrix P(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t from = 0; from < p; ++from) {
    const auto a = static_cast<std::size_t>(u(from));
    for (std::size_t to = 0; to < p; ++to) {
      P(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) = sub.kernel(from, a, to);
    }
  }
  return P;
}

Vector discounted_values(const Matrix& P, const Vector& r, double beta, ValueConvention convention) {
  if (!(beta > 0.0 && beta < 1.0)) throw PreconditionError("discount factor must lie in (0,1)");
  const Matrix A = resolvent_input(P, beta);
  Eigen::PartialPivLU<Matrix> lu(A);
  return values_from_factor(lu, A, P, r, beta, convention);
}

double PayoffTable::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) {
    if (v.size() > 0) m = std::max(m, v.cwiseAbs().maxCoeff());
  }
  return m;
}

PayoffEvaluator::PayoffEvaluator(const GameSpec& game, const GamePolicies& policies)
    : game_(game), policies_(policies) {
  if (!(game.beta > 0.0 && game.beta < 1.0)) {
    throw PreconditionError("discount factor must lie in (0,1)");
  }
  kernels_.resize(game.subpops.size());
  factors_.resize(game.subpops.size());
  resolvent_inputs_.resize(game.subpops.size());
  for (std::size_t c = 0; c < game.subpops.size(); ++c) {
    for (const auto& u : policies[c]) {
      Matrix P = policy_kernel(game.subpops[c], u);
      Matrix A = resolvent_input(P, game.beta);
      factors_[c].emplace_back(A);
      resolvent_inputs_[c].push_back(std::move(A));
      kernels_[c].push_back(std::move(P));
    }
  }
}

PayoffTable PayoffEvaluator::evaluate(const StatePolicyDist& mu) const {
  return evaluate(project_state_action(game_, policies_, mu));
}

PayoffTable PayoffEvaluator::evaluate(const StateActionDist& mu_sa) const {
  const auto& game = game_;
  std::vector<Matrix> values;
  values.reserve(game.subpops.size());
  for (std::size_t c = 0; c < game.subpops.size(); ++c) {
    const auto& sub = game.subpops[c];
    const auto p = static_cast<Eigen::Index>(sub.num_states());
    const Matrix rewards = reward_matrix(game, c, mu_sa);
    const auto& set = policies_[c];
    Matrix V(static_cast<Eigen::Index>(set.size()), p);
    Vector r_u(p);
    for (std::size_t u = 0; u < set.size(); ++u) {
      for (Eigen::Index s = 0; s < p; ++s) r_u(s) = rewards(s, set[u](static_cast<std::size_t>(s)));
      V.row(static_cast<Eigen::Index>(u)) =
          values_from_factor(factors_[c][u], resolvent_inputs_[c][u], kernels_[c][u], r_u,
                             game.beta, game.value_convention)
              .transpose();
    }
    values.push_back(std::move(V));
  }
  return PayoffTable(std::move(values));
}

PayoffTable payoff_table(const GameSpec& game, const GamePolicies& policies,
                         const StatePolicyDist& mu) {
  return PayoffEvaluator(game, policies).evaluate(mu);
}

bool check_irreducibility(const Matrix& P) {
  const auto n = P.rows();
  if (n == 0 || P.cols() != n) return false;
  // Forward and backward reachability from state 0.
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    Eigen::Index count = 1;
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < n; ++j) {
        const double w = transpose ? P(j, i) : P(i, j);
        if (w > 0.0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          ++count;
          stack.push_back(j);
        }
      }
    }
    return count == n;
  };
  return reaches_all(false) && reaches_all(true);
}

Vector stationary_distribution(const Matrix& P) {
  if (!check_irreducibility(P)) throw NotIrreducible("policy kernel is not irreducible");
  const auto n = P.rows();
  // (P^T - I) eta = 0 with its last equation replaced by sum(eta) = 1.
  Matrix A = P.transpose() - Matrix::Identity(n, n);
  A.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b(n - 1) = 1.0;
  Vector eta = A.partialPivLu().solve(b);
  eta = eta.cwiseMax(0.0);
  eta /= eta.sum();
  return eta;
}

StationaryTable stationary_table(const GameSpec& game, const GamePolicies& policies) {
  StationaryTable table(game.subpops.size());
  for (std::size_t c = 0; c < game.subpops.size(); ++c) {
    for (const auto& u : policies[c]) {
      table[c].push_back(stationary_distribution(policy_kernel(game.subpops[c], u)));
    }
  }
  return table;
}

}  // namespace mfg
