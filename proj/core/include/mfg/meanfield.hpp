#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfg/game.hpp"
#include "mfg/payoff.hpp"
#include "mfg/protocols.hpp"

namespace mfg {

/// Threshold on ||f||_inf below which a point is labelled a rest point.
inline constexpr double kRestPointThreshold = 1e-9;

/// The two parts of the mean dynamic: state drift from the decision clocks
/// and policy flow from the revision clocks.
struct VectorFieldParts {
  StatePolicyDist drift;
  StatePolicyDist revision;

  StatePolicyDist total() const;
};

/// Right-hand side of the mean dynamic. Holds the payoff evaluator so the
/// kernel factorizations are computed once per game.
class MeanDynamics {
 public:
  MeanDynamics(const GameSpec& game, const GamePolicies& policies, const ProtocolSpec& protocol);

  StatePolicyDist field(const StatePolicyDist& mu) const;
  VectorFieldParts parts(const StatePolicyDist& mu) const;
  /// Same as parts(), reusing a payoff table already evaluated at mu.
  VectorFieldParts parts(const StatePolicyDist& mu, const PayoffTable& F) const;

  const PayoffEvaluator& evaluator() const { return evaluator_; }
  const ProtocolSpec& protocol() const { return protocol_; }
  const GameSpec& game() const { return evaluator_.game(); }
  const GamePolicies& policies() const { return evaluator_.policies(); }

 private:
  PayoffEvaluator evaluator_;
  ProtocolSpec protocol_;
};

StatePolicyDist vector_field(const GameSpec& game, const GamePolicies& policies,
                             const ProtocolSpec& protocol, const StatePolicyDist& mu);
VectorFieldParts vector_field_parts(const GameSpec& game, const GamePolicies& policies,
                                    const ProtocolSpec& protocol, const StatePolicyDist& mu);

/// ||f(mu)||_inf.
double rest_residual(const GameSpec& game, const GamePolicies& policies,
                     const ProtocolSpec& protocol, const StatePolicyDist& mu);

struct GuardStats {
  std::size_t steps = 0;
  std::size_t activations = 0;      // steps where at least one entry was clamped
  std::size_t clamped_entries = 0;  // entries in [-1e-12, 0)
  std::size_t large_clamps = 0;     // entries in [-1e-6, -1e-12)
  double max_correction = 0.0;      // largest |clamped value| or mass rescale
};

struct TrajectoryMetadata {
  std::string source;  // "meanfield" or "population"
  std::string protocol;
  double rate_scale = 1.0;
  double dt = 0.0;
  std::string game_hash;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> players;
  GuardStats guard;
  std::size_t events = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StatePolicyDist> snapshots;
  TrajectoryMetadata metadata;

  std::size_t size() const { return times.size(); }
};

struct IntegrateOptions {
  double t_end = 1.0;
  double dt = 0.01;
  /// Record a snapshot every this many steps; the initial and final states
  /// are always recorded.
  std::size_t record_every = 1;
  /// Called after every accepted step; returning false stops the run early.
  std::function<bool(double t, const StatePolicyDist& mu)> observer;
};

/// Fixed-step classical RK4 with a per-step projection guard. Payoffs are
/// recomputed at every stage. Throws StepRejected when an entry falls below
/// -1e-6 before guarding.
Trajectory integrate(const MeanDynamics& dynamics, const StatePolicyDist& mu0,
                     const IntegrateOptions& options);
Trajectory integrate(const GameSpec& game, const GamePolicies& policies,
                     const ProtocolSpec& protocol, const StatePolicyDist& mu0, double t_end,
                     double dt = 0.01);

/// Per subpopulation a (states x policies) matrix of G^{c,s}_u.
using GrowthRateTable = std::vector<Matrix>;

/// Growth rates of the imitative protocol: f^r_{s,u} = mu[s,u] G_u. The
/// decomposition is verified to 1e-10 and a mismatch throws NumericalFailure.
/// Throws WrongProtocol for any other protocol.
GrowthRateTable growth_rates(const GameSpec& game, const GamePolicies& policies,
                             const ProtocolSpec& protocol, const StatePolicyDist& mu);

struct LyapunovSample {
  double time = 0.0;
  double value = 0.0;
};

/// Candidate function around a strict equilibrium mu_star:
/// sum_c ||mu[.,u*] - mu*[.,u*]||_1 + K sum_c sum_{v != u*} ||mu[.,v] - mu*[.,v]||_1,
/// where u* is the policy carrying the mass of mu_star in each subpopulation.
class LyapunovFunction {
 public:
  /// Throws PreconditionError unless K > 1.
  LyapunovFunction(const StatePolicyDist& mu_star, double K = 2.0);

  double operator()(const StatePolicyDist& mu) const;
  const std::vector<std::size_t>& support() const { return support_; }

 private:
  StatePolicyDist mu_star_;
  double K_;
  std::vector<std::size_t> support_;
};

std::vector<LyapunovSample> lyapunov_monitor(const Trajectory& traj,
                                             const StatePolicyDist& mu_star, double K = 2.0);

}  // namespace mfg
