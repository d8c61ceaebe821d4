#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "mfg/game.hpp"
#include "mfg/payoff.hpp"

namespace mfg {

struct MsneTolerances {
  double payoff = 1e-6;        // relative to scale = max(1, ||F||_inf)
  double stationarity = 1e-8;
  double mass = 1e-10;
};

struct OptimalityViolation {
  std::size_t subpop = 0;
  std::size_t state = 0;
  std::size_t policy = 0;
  double mass = 0.0;
  double gap = 0.0;  // max_v F_v - F_u
};

struct StationarityViolation {
  std::size_t subpop = 0;
  std::size_t state = 0;
  std::size_t policy = 0;
  double residual = 0.0;
};

struct MsneVerdict {
  bool pass = false;
  std::vector<OptimalityViolation> optimality;
  std::vector<StationarityViolation> stationarity;
  /// |mu[s,u] - sum_s' P_u[s'][s] mu[s',u]| per subpopulation, p x n.
  std::vector<Matrix> stationarity_residual;
  double max_stationarity_residual = 0.0;
  double scale = 1.0;
  MsneTolerances tolerances;
};

/// Optimality on the support and stationarity of every policy column.
MsneVerdict check_msne(const GameSpec& game, const GamePolicies& policies,
                       const StatePolicyDist& mu, const MsneTolerances& tol = {});

struct StrictVerdict {
  bool strict = false;
  /// Supported policy of each subpopulation (when exactly one exists).
  std::vector<std::optional<std::size_t>> support;
  /// Per subpopulation min_s [F_{u*} - max_{v != u*} F_v]; +inf without rivals.
  std::vector<double> gaps;
  double min_gap = std::numeric_limits<double>::infinity();
};

/// Throws NotMsne unless mu passes check_msne at the same tolerances.
StrictVerdict check_strict_msne(const GameSpec& game, const GamePolicies& policies,
                                const StatePolicyDist& mu, const MsneTolerances& tol = {});

/// Per subpopulation a nonnegative vector x^c over policies with sum m^c.
using MarginalPolicyDist = std::vector<Vector>;

/// mu^c[s,u] = x^c[u] * eta^{c,u}(s).
StatePolicyDist assemble_mu(const MarginalPolicyDist& x, const StationaryTable& eta);

struct SolverOptions {
  double damping = 0.2;
  std::size_t max_iter = 5000;
  std::size_t restarts = 16;
  std::uint64_t seed = 0;
  double tol = 1e-12;
  std::size_t patience = 25;  // consecutive small steps required to stop
  MsneTolerances check;
};

struct SolverResult {
  StatePolicyDist candidate;
  MarginalPolicyDist x;
  MsneVerdict verdict;
  std::size_t iterations = 0;  // of the attempt that produced the candidate
  std::size_t restarts_used = 0;
  bool converged = false;  // always verdict.pass
};

/// Damped discrete best-response iteration on the policy marginals, scored at
/// the uniform initial state distribution. The first attempt starts from
/// uniform x; failures restart from seeded random x. Throws
/// AssumptionViolated if some policy kernel is reducible.
SolverResult solve_msne(const GameSpec& game, const GamePolicies& policies,
                        const SolverOptions& options = {});

/// Runs every attempt (uniform start plus all restarts) and returns the
/// distinct verified candidates, in order of discovery.
std::vector<SolverResult> solve_msne_all(const GameSpec& game, const GamePolicies& policies,
                                         const SolverOptions& options = {});

struct PureCandidate {
  std::vector<std::size_t> profile;  // one policy index per subpopulation
  StatePolicyDist mu;
  MsneVerdict verdict;
  std::optional<StrictVerdict> strict;
};

/// Exhaustive oracle: every pure profile assembled at its stationary
/// distributions and checked.
std::vector<PureCandidate> pure_candidates(const GameSpec& game, const GamePolicies& policies,
                                           const MsneTolerances& tol = {});

/// Per subpopulation eta_unif . V[u] at mu_SA(x, eta).
std::vector<Vector> policy_scores(const PayoffEvaluator& evaluator, const MarginalPolicyDist& x,
                                  const StationaryTable& eta);

}  // namespace mfg
