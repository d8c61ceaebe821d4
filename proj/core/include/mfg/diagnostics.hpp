#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mfg/equilibria.hpp"
#include "mfg/game.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/protocols.hpp"

namespace mfg {

struct InstabilityOptions {
  /// Policies removed from the support, per subpopulation. Empty means the
  /// support of the strict equilibrium found by solve_msne on the full game.
  std::vector<std::vector<std::size_t>> excluded;
  double injection = 1e-3;  // mass moved onto the optimal policy
  double radius = 0.05;     // L1 ball around the rest point
  double dt = 0.01;
  double t_max = 500.0;
  SolverOptions solver;
};

struct InstabilityReport {
  std::vector<std::vector<std::size_t>> excluded;
  StatePolicyDist rest_point;
  double rest_residual = 0.0;
  bool restricted_solver_converged = false;
  MsneVerdict verdict;  // of the rest point in the full game
  /// Policy receiving the injected mass in each subpopulation: the best
  /// policy at the rest point under the uniform state distribution.
  std::vector<std::size_t> optimal_policy;
  /// True when that policy maximizes F^{c,s} at every state.
  bool optimal_everywhere = false;
  std::vector<double> optimal_mass;  // (time-ordered) total mass on the optimal policies
  std::vector<double> times;
  bool monotone = false;
  bool escaped = false;
  double escape_time = 0.0;
  double final_distance = 0.0;
};

/// Builds a rest point of the imitative dynamics whose support avoids the
/// optimal policies, confirms it is not an equilibrium, perturbs it and
/// follows the escape. Throws WrongProtocol for non-imitative protocols.
InstabilityReport instability_probe(const GameSpec& game, const GamePolicies& policies,
                                    const ProtocolSpec& protocol,
                                    const InstabilityOptions& options = {});

struct StabilityOptions {
  std::size_t samples = 10;
  double perturbation = 0.01;  // L1 size of each perturbation
  std::uint64_t seed = 0;
  double t_end = 500.0;
  double dt = 0.01;
  double K = 2.0;
  double slack = 1e-10;      // allowed per-step increase of the Lyapunov value
  double final_tol = 1e-3;   // required final L1 distance
};

struct StabilityRun {
  std::uint64_t seed = 0;
  double initial_distance = 0.0;
  double final_distance = 0.0;
  double initial_value = 0.0;
  double final_value = 0.0;
  double max_increase = 0.0;  // largest V(t_{k+1}) - V(t_k) over all steps
  bool monotone = false;
  bool converged = false;
};

struct StabilityReport {
  std::vector<StabilityRun> runs;
  bool passed = false;
};

/// L1 perturbation of the given size toward a random full-support
/// distribution; masses are preserved.
StatePolicyDist perturb(const StatePolicyDist& mu, double size, std::uint64_t seed);

/// Seeded interior distribution with full support (exponential weights).
StatePolicyDist random_interior(const GameSpec& game, const GamePolicies& policies,
                                std::uint64_t seed);

/// Integrates from perturbations of mu_star and tracks the Lyapunov
/// candidate at every step. Runs execute in parallel.
StabilityReport lyapunov_stability(const GameSpec& game, const GamePolicies& policies,
                                   const ProtocolSpec& protocol, const StatePolicyDist& mu_star,
                                   const StabilityOptions& options = {});

}  // namespace mfg
