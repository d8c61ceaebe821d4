#include "mfg/diagnostics.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"
#include "mfg/payoff.hpp"

namespace mfg {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

StatePolicyDist random_like(const StatePolicyDist& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  StatePolicyDist nu = shape;
  for (std::size_t c = 0; c < nu.num_subpops(); ++c) {
    Matrix& b = nu[c];
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = expo(rng);
    b *= shape[c].sum() / b.sum();
  }
  return nu;
}

double total_mass_on(const StatePolicyDist& mu, const std::vector<std::size_t>& policy) {
  double m = 0.0;
  for (std::size_t c = 0; c < mu.num_subpops(); ++c) {
    m += mu[c].col(static_cast<Eigen::Index>(policy[c])).sum();
  }
  return m;
}

}  // namespace

StatePolicyDist perturb(const StatePolicyDist& mu, double size, std::uint64_t seed) {
  const StatePolicyDist nu = random_like(mu, seed);
  const double dist = nu.l1_distance(mu);
  if (!(dist > 0.0)) return mu;
  const double w = size / dist;
  if (w > 1.0) throw PreconditionError("perturbation larger than the distance to a random point");
  StatePolicyDist out = mu;
  for (std::size_t c = 0; c < out.num_subpops(); ++c) out[c] = (1.0 - w) * mu[c] + w * nu[c];
  return out;
}

StatePolicyDist random_interior(const GameSpec& game, const GamePolicies& policies,
                                std::uint64_t seed) {
  return random_like(uniform_distribution(game, policies), seed);
}

InstabilityReport instability_probe(const GameSpec& game, const GamePolicies& policies,
                                    const ProtocolSpec& protocol,
                                    const InstabilityOptions& options) {
  if (protocol.kind != ProtocolKind::ImitativePPI) {
    throw WrongProtocol("the instability probe needs the imitative protocol");
  }
  InstabilityReport report;
  report.excluded = options.excluded;
  if (report.excluded.empty()) {
    const SolverResult full = solve_msne(game, policies, options.solver);
    if (!full.converged) throw PreconditionError("no equilibrium found to exclude from the support");
    const StrictVerdict strict = check_strict_msne(game, policies, full.candidate, options.solver.check);
    if (!strict.strict) throw PreconditionError("the equilibrium found is not strict; pass excluded policies");
    for (const auto& s : strict.support) report.excluded.push_back({*s});
  }
  if (report.excluded.size() != game.num_subpops()) {
    throw PreconditionError("excluded policies must be listed per subpopulation");
  }

  // Restricted game: the same model with a subset of the policies.
  GamePolicies kept(game.num_subpops());
  std::vector<std::vector<std::size_t>> index(game.num_subpops());
  for (std::size_t c = 0; c < game.num_subpops(); ++c) {
    for (std::size_t u = 0; u < policies[c].size(); ++u) {
      const auto& ex = report.excluded[c];
      if (std::find(ex.begin(), ex.end(), u) != ex.end()) continue;
      kept[c].push_back(policies[c][u]);
      index[c].push_back(u);
    }
    if (kept[c].empty()) throw PreconditionError("cannot exclude every policy of a subpopulation");
  }
  const SolverResult restricted = solve_msne(game, kept, options.solver);
  report.restricted_solver_converged = restricted.converged;

  report.rest_point = zero_distribution(game, policies);
  for (std::size_t c = 0; c < game.num_subpops(); ++c) {
    for (std::size_t k = 0; k < index[c].size(); ++k) {
      report.rest_point[c].col(static_cast<Eigen::Index>(index[c][k])) =
          restricted.candidate[c].col(static_cast<Eigen::Index>(k));
    }
  }
  const MeanDynamics dynamics(game, policies, protocol);
  report.rest_residual = dynamics.field(report.rest_point).max_abs();
  report.verdict = check_msne(game, policies, report.rest_point, options.solver.check);

  const StationaryTable eta = stationary_table(game, policies);
  const PayoffTable F = dynamics.evaluator().evaluate(report.rest_point);
  report.optimal_everywhere = true;
  for (std::size_t c = 0; c < game.num_subpops(); ++c) {
    const Matrix& V = F.values(c);
    Eigen::Index best = 0;
    V.rowwise().mean().maxCoeff(&best);
    report.optimal_policy.push_back(static_cast<std::size_t>(best));
    for (Eigen::Index s = 0; s < V.cols(); ++s) {
      if (V(best, s) < V.col(s).maxCoeff()) report.optimal_everywhere = false;
    }
  }

  // Move `injection` of each subpopulation's mass onto its optimal policy,
  // distributed by that policy's stationary state distribution.
  StatePolicyDist mu0 = report.rest_point;
  for (std::size_t c = 0; c < game.num_subpops(); ++c) {
    const double m = game.subpops[c].mass;
    const double eps = std::min(options.injection, m);
    mu0[c] *= (m - eps) / m;
    const auto u = static_cast<Eigen::Index>(report.optimal_policy[c]);
    mu0[c].col(u) += eps * eta[c][report.optimal_policy[c]];
  }

  report.times.push_back(0.0);
  report.optimal_mass.push_back(total_mass_on(mu0, report.optimal_policy));
  report.monotone = true;
  IntegrateOptions opt;
  opt.t_end = options.t_max;
  opt.dt = options.dt;
  opt.record_every = std::numeric_limits<std::size_t>::max();
  opt.observer = [&](double t, const StatePolicyDist& mu) {
    const double mass = total_mass_on(mu, report.optimal_policy);
    if (!(mass > report.optimal_mass.back())) report.monotone = false;
    report.times.push_back(t);
    report.optimal_mass.push_back(mass);
    report.final_distance = mu.l1_distance(report.rest_point);
    if (report.final_distance > options.radius) {
      report.escaped = true;
      report.escape_time = t;
      return false;
    }
    return true;
  };
  integrate(dynamics, mu0, opt);
  return report;
}

StabilityReport lyapunov_stability(const GameSpec& game, const GamePolicies& policies,
                                   const ProtocolSpec& protocol, const StatePolicyDist& mu_star,
                                   const StabilityOptions& options) {
  const LyapunovFunction V(mu_star, options.K);
  const MeanDynamics dynamics(game, policies, protocol);
  StabilityReport report;
  report.runs.resize(options.samples);
  parallel_for(options.samples, [&](std::size_t i) {
    StabilityRun& run = report.runs[i];
    run.seed = mix(options.seed + i);
    const StatePolicyDist mu0 = perturb(mu_star, options.perturbation, run.seed);
    run.initial_distance = mu0.l1_distance(mu_star);
    run.initial_value = V(mu0);
    double last = run.initial_value;
    IntegrateOptions opt;
    opt.t_end = options.t_end;
    opt.dt = options.dt;
    opt.record_every = std::numeric_limits<std::size_t>::max();
    opt.observer = [&](double, const StatePolicyDist& mu) {
      const double value = V(mu);
      run.max_increase = std::max(run.max_increase, value - last);
      last = value;
      return true;
    };
    const Trajectory traj = integrate(dynamics, mu0, opt);
    run.final_value = last;
    run.final_distance = traj.snapshots.back().l1_distance(mu_star);
    run.monotone = run.max_increase <= options.slack;
    run.converged = run.final_distance <= options.final_tol;
  });
  report.passed = std::all_of(report.runs.begin(), report.runs.end(),
                              [](const StabilityRun& r) { return r.monotone && r.converged; });
  return report;
}

}  // namespace mfg
