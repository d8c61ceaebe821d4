#include "mfg/population.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"
#include "mfg/payoff.hpp"

namespace mfg {

namespace {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

constexpr double kRateBoundSlack = 1e-12;

}  // namespace

std::vector<std::size_t> largest_remainder(const std::vector<double>& weights, std::size_t N) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> counts(weights.size(), 0);
  if (weights.empty()) return counts;
  if (!(total > 0.0)) throw PreconditionError("largest_remainder needs a positive total weight");
  std::vector<double> remainder(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(N) * std::max(0.0, weights[i]) / total;
    // Tolerance keeps exact quotas such as 8 * 0.25 from losing a unit to rounding.
    const double fl = std::floor(exact + 1e-9);
    counts[i] = static_cast<std::size_t>(fl);
    remainder[i] = exact - fl;
    assigned += counts[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < N; k = (k + 1) % order.size()) {
    ++counts[order[k]];
    ++assigned;
  }
  while (assigned > N) {
    // Only reachable through the flooring tolerance; take back from the smallest remainders.
    for (auto it = order.rbegin(); it != order.rend() && assigned > N; ++it) {
      if (counts[*it] > 0) {
        --counts[*it];
        --assigned;
      }
    }
  }
  return counts;
}

std::vector<AgentState> init_population(const GameSpec& game, const StatePolicyDist& mu0,
                                        std::size_t N, std::uint64_t seed) {
  if (N < 1) throw PreconditionError("population size N must be >= 1");
  if (mu0.num_subpops() != game.num_subpops()) {
    throw PreconditionError("initial distribution does not match the game");
  }
  std::vector<double> masses;
  for (const auto& sub : game.subpops) masses.push_back(sub.mass);
  const std::vector<std::size_t> sizes = largest_remainder(masses, N);

  std::vector<AgentState> agents;
  agents.reserve(N);
  for (std::size_t c = 0; c < game.num_subpops(); ++c) {
    const Matrix& block = mu0[c];
    std::vector<double> cells;
    cells.reserve(static_cast<std::size_t>(block.size()));
    // Canonical order: state-major, then policy.
    for (Eigen::Index s = 0; s < block.rows(); ++s) {
      for (Eigen::Index u = 0; u < block.cols(); ++u) cells.push_back(block(s, u));
    }
    const std::vector<std::size_t> counts = largest_remainder(cells, sizes[c]);
    const auto n = static_cast<std::size_t>(block.cols());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      for (std::size_t k = 0; k < counts[i]; ++k) agents.push_back({c, i / n, i % n});
    }
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = agents.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(agents[i - 1], agents[std::min(j, i - 1)]);
  }
  return agents;
}

StatePolicyDist empirical_distribution(const GameSpec& game, const GamePolicies& policies,
                                       const std::vector<AgentState>& agents) {
  StatePolicyDist mu = zero_distribution(game, policies);
  for (const auto& a : agents) {
    mu[a.subpop](static_cast<Eigen::Index>(a.state), static_cast<Eigen::Index>(a.policy)) += 1.0;
  }
  const double inv = agents.empty() ? 0.0 : 1.0 / static_cast<double>(agents.size());
  for (auto& b : mu.blocks) b *= inv;
  return mu;
}

std::vector<double> uniform_grid(double t_end, double interval) {
  if (!(interval > 0.0)) throw PreconditionError("record interval must be > 0");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor(t_end / interval + 1e-9));
  for (std::size_t k = 0; k <= count; ++k) grid.push_back(static_cast<double>(k) * interval);
  return grid;
}

Trajectory simulate(const GameSpec& game, const GamePolicies& policies,
                    const ProtocolSpec& protocol, std::vector<AgentState> agents,
                    const SimConfig& config) {
  if (agents.empty()) throw PreconditionError("simulation needs at least one agent");
  if (config.payoff_refresh < 1) throw PreconditionError("payoff_refresh must be >= 1");
  const BoundReport bound = check_rate_bound(game, protocol);
  if (!bound.passed) {
    std::ostringstream os;
    os << "revision rates violate the conservative rate bound:";
    for (const auto& b : bound.subpops) {
      if (!b.passed) os << " " << b.name << " needs Rr >= " << b.minimal_revision_rate;
    }
    throw RateBoundViolated(os.str());
  }

  const std::size_t C = game.num_subpops();
  const auto N = static_cast<double>(agents.size());
  const double inv_N = 1.0 / N;

  // Agents grouped by subpopulation; counts hold the empirical cells.
  std::vector<std::vector<AgentState>> groups(C);
  for (const auto& a : agents) {
    if (a.subpop >= C) throw PreconditionError("agent subpopulation out of range");
    groups[a.subpop].push_back(a);
  }
  StatePolicyDist counts = zero_distribution(game, policies);
  for (const auto& a : agents) {
    counts[a.subpop](static_cast<Eigen::Index>(a.state), static_cast<Eigen::Index>(a.policy)) += 1.0;
  }

  std::vector<double> subpop_rate(C);
  double total_rate = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    const auto& sub = game.subpops[c];
    subpop_rate[c] = static_cast<double>(groups[c].size()) * (sub.decision_rate + sub.revision_rate);
    total_rate += subpop_rate[c];
  }

  const PayoffEvaluator evaluator(game, policies);

  auto empirical = [&] {
    StatePolicyDist mu = counts;
    for (auto& b : mu.blocks) b *= inv_N;
    return mu;
  };

  Trajectory traj;
  traj.metadata.source = "population";
  traj.metadata.protocol = std::string(protocol_name(protocol.kind));
  traj.metadata.rate_scale = protocol.rate_scale;
  traj.metadata.seed = config.seed;
  traj.metadata.players = agents.size();

  std::vector<double> grid = config.record_times;
  std::sort(grid.begin(), grid.end());
  std::size_t gi = 0;
  auto record_until = [&](double t_limit, bool inclusive) {
    while (gi < grid.size() && grid[gi] <= config.t_end &&
           (inclusive ? grid[gi] <= t_limit : grid[gi] < t_limit)) {
      traj.times.push_back(grid[gi]);
      traj.snapshots.push_back(empirical());
      ++gi;
    }
  };

  std::mt19937_64 rng(config.seed);
  PayoffTable F;
  bool stale = true;
  std::size_t revisions_since_refresh = 0;
  Vector sigma;
  Vector excess;
  Vector row;
  double t = 0.0;
  std::size_t events = 0;

  while (true) {
    const double wait = -std::log1p(-uniform01(rng)) / total_rate;
    const double t_next = t + wait;
    if (t_next > config.t_end) {
      record_until(config.t_end, true);
      break;
    }
    record_until(t_next, false);
    t = t_next;
    ++events;

    std::size_t c = 0;
    if (C > 1) {
      double pick = uniform01(rng) * total_rate;
      while (c + 1 < C && pick >= subpop_rate[c]) pick -= subpop_rate[c++];
    }
    auto& group = groups[c];
    const auto& sub = game.subpops[c];
    const auto idx = std::min(group.size() - 1,
                              static_cast<std::size_t>(uniform01(rng) * static_cast<double>(group.size())));
    AgentState& agent = group[idx];
    const auto s = static_cast<Eigen::Index>(agent.state);
    const auto u = static_cast<Eigen::Index>(agent.policy);
    const bool decision =
        uniform01(rng) * (sub.decision_rate + sub.revision_rate) < sub.decision_rate;

    if (decision) {
      const auto a = static_cast<std::size_t>(policies[c][agent.policy](agent.state));
      double pick = uniform01(rng);
      std::size_t to = 0;
      const std::size_t p = sub.num_states();
      for (; to + 1 < p; ++to) {
        const double pr = sub.kernel(agent.state, a, to);
        if (pick < pr) break;
        pick -= pr;
      }
      // Skip zero-probability targets reached through rounding of the last bin.
      while (to > 0 && sub.kernel(agent.state, a, to) == 0.0) --to;
      if (to != agent.state) {
        counts[c](s, u) -= 1.0;
        counts[c](static_cast<Eigen::Index>(to), u) += 1.0;
        agent.state = to;
        stale = true;
      }
      continue;
    }

    const bool refresh = config.payoff_refresh == 1
                             ? stale
                             : (F.num_subpops() == 0 || revisions_since_refresh >= config.payoff_refresh);
    if (refresh) {
      F = evaluator.evaluate(empirical());
      stale = false;
      revisions_since_refresh = 0;
    }
    ++revisions_since_refresh;

    sigma = counts[c].row(s).transpose() * inv_N;
    const Vector Fs = F.at_state(c, agent.state);
    if (protocol.kind == ProtocolKind::BNN) excess = excess_payoff(Fs, sigma);
    switch_rate_row(protocol, Fs, sigma, excess, u, row);
    const double Rr = sub.revision_rate;
    const double out_rate = row.sum();
    if (out_rate > Rr * (1.0 + kRateBoundSlack)) {
      std::ostringstream os;
      os << "switch rates sum to " << out_rate << " > Rr = " << Rr << " at t = " << t;
      throw RateBoundViolated(os.str());
    }
    double pick = uniform01(rng) * Rr;
    if (pick >= out_rate) continue;
    Eigen::Index v = 0;
    for (; v + 1 < row.size(); ++v) {
      if (pick < row(v)) break;
      pick -= row(v);
    }
    while (v > 0 && row(v) == 0.0) --v;
    if (v == u || row(v) == 0.0) continue;
    counts[c](s, u) -= 1.0;
    counts[c](s, v) += 1.0;
    agent.policy = static_cast<std::size_t>(v);
    stale = true;
  }
  traj.metadata.events = events;
  return traj;
}

double sup_l1_gap(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) throw PreconditionError("trajectories are recorded on different grids");
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a.times[i] - b.times[i]) > 1e-9) {
      throw PreconditionError("trajectories are recorded on different grids");
    }
    gap = std::max(gap, a.snapshots[i].l1_distance(b.snapshots[i]));
  }
  return gap;
}

double median(std::vector<double> values) {
  if (values.empty()) throw PreconditionError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

ConvergenceResult convergence_experiment(const GameSpec& game, const GamePolicies& policies,
                                         const ProtocolSpec& protocol,
                                         const StatePolicyDist& mu0,
                                         const ConvergenceConfig& config) {
  if (config.Ns.empty() || config.seeds.empty()) {
    throw PreconditionError("convergence experiment needs at least one N and one seed");
  }
  const double ratio = config.record_interval / config.dt;
  const double steps = std::round(ratio);
  if (!(steps >= 1.0) || std::abs(ratio - steps) > 1e-9 * steps) {
    throw PreconditionError("record interval must be a positive multiple of dt");
  }

  ConvergenceResult result;
  IntegrateOptions options;
  options.t_end = config.t_end;
  options.dt = config.dt;
  options.record_every = static_cast<std::size_t>(steps);
  result.reference = integrate(MeanDynamics(game, policies, protocol), mu0, options);

  struct Job {
    std::size_t N;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t N : config.Ns) {
    for (std::uint64_t seed : config.seeds) jobs.push_back({N, seed});
  }
  // Largest populations are scheduled first so the tail of the pool stays busy.
  std::vector<std::size_t> order(jobs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return jobs[a].N > jobs[b].N; });

  std::vector<double> errors(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t k) {
    const Job& job = jobs[order[k]];
    SimConfig sim;
    sim.t_end = config.t_end;
    sim.seed = job.seed;
    sim.record_times = result.reference.times;
    sim.payoff_refresh = config.payoff_refresh;
    const Trajectory traj =
        simulate(game, policies, protocol, init_population(game, mu0, job.N, job.seed), sim);
    errors[order[k]] = sup_l1_gap(traj, result.reference);
  });

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    result.rows.push_back({jobs[i].N, jobs[i].seed, errors[i]});
  }
  std::vector<std::size_t> distinct;
  for (std::size_t N : config.Ns) {
    if (std::find(distinct.begin(), distinct.end(), N) == distinct.end()) distinct.push_back(N);
  }
  for (std::size_t N : distinct) {
    std::vector<double> e;
    for (const auto& r : result.rows) {
      if (r.N == N) e.push_back(r.sup_l1_error);
    }
    result.medians.push_back({N, median(std::move(e))});
  }
  if (result.medians.size() >= 2) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    bool positive = true;
    for (const auto& m : result.medians) {
      if (!(m.median > 0.0)) positive = false;
      const double x = std::log(static_cast<double>(m.N));
      const double y = positive ? std::log(m.median) : 0.0;
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const auto k = static_cast<double>(result.medians.size());
    const double denom = k * sxx - sx * sx;
    if (positive && denom > 0.0) result.slope = (k * sxy - sx * sy) / denom;
  }
  return result;
}

}  // namespace mfg
