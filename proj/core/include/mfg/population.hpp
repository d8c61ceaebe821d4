#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mfg/game.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/protocols.hpp"

namespace mfg {

struct AgentState {
  std::size_t subpop = 0;
  std::size_t state = 0;
  std::size_t policy = 0;

  bool operator==(const AgentState&) const = default;
};

/// Deterministic quota assignment of N agents to (subpopulation, state,
/// policy) cells by largest-remainder rounding, ties broken in canonical
/// order. `seed` only shuffles the agent order, never the counts.
std::vector<AgentState> init_population(const GameSpec& game, const StatePolicyDist& mu0,
                                        std::size_t N, std::uint64_t seed = 0);

/// Largest-remainder rounding of N * weights / sum(weights); ties go to the
/// lower index.
std::vector<std::size_t> largest_remainder(const std::vector<double>& weights, std::size_t N);

/// Empirical distribution: counts / N.
StatePolicyDist empirical_distribution(const GameSpec& game, const GamePolicies& policies,
                                       const std::vector<AgentState>& agents);

struct SimConfig {
  double t_end = 1.0;
  std::uint64_t seed = 0;
  /// Times at which the empirical distribution is recorded (ascending,
  /// within [0, t_end]).
  std::vector<double> record_times;
  /// Recompute payoffs every this many revision events; 1 is exact.
  std::size_t payoff_refresh = 1;
};

/// {0, h, 2h, ...} up to and including t_end (within 1e-9).
std::vector<double> uniform_grid(double t_end, double interval);

/// Exact event-driven simulation with one aggregate exponential clock.
/// Throws RateBoundViolated up front if the conservative rate bound fails and
/// at runtime if a revision sees sum_v rho_uv / Rr > 1.
Trajectory simulate(const GameSpec& game, const GamePolicies& policies,
                    const ProtocolSpec& protocol, std::vector<AgentState> agents,
                    const SimConfig& config);

struct ConvergenceConfig {
  std::vector<std::size_t> Ns;
  std::vector<std::uint64_t> seeds;
  double t_end = 10.0;
  double dt = 0.01;
  /// Spacing of the comparison grid; must be a multiple of dt.
  double record_interval = 0.1;
  std::size_t payoff_refresh = 1;
};

struct ErrorRow {
  std::size_t N = 0;
  std::uint64_t seed = 0;
  double sup_l1_error = 0.0;
};

struct MedianRow {
  std::size_t N = 0;
  double median = 0.0;
};

struct ConvergenceResult {
  std::vector<ErrorRow> rows;  // ordered by (N, seed) as given
  std::vector<MedianRow> medians;
  /// Least-squares slope of log(median) against log(N); empty with fewer
  /// than two distinct N or a zero median.
  std::optional<double> slope;
  Trajectory reference;
};

/// sup over the grid of ||mu_hat(t) - mu(t)||_1 for every (N, seed);
/// replicates run in parallel and are merged in input order.
ConvergenceResult convergence_experiment(const GameSpec& game, const GamePolicies& policies,
                                         const ProtocolSpec& protocol,
                                         const StatePolicyDist& mu0,
                                         const ConvergenceConfig& config);

/// Sup-L1 gap between two trajectories recorded on the same grid.
double sup_l1_gap(const Trajectory& a, const Trajectory& b);

double median(std::vector<double> values);

}  // namespace mfg
