// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mfg/diagnostics.hpp"
#include "mfg/equilibria.hpp"
#include "mfg/mac.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/payoff.hpp"
#include "mfg/population.hpp"
#include "mfg/protocols.hpp"
#include "oracles.hpp"

namespace {

using namespace mfg;

struct Outcome {
  bool pass = false;
  std::string detail;
};

const std::vector<ProtocolSpec> kAll = {
    {ProtocolKind::ImitativePPI, 1.0}, {ProtocolKind::BNN, 1.0}, {ProtocolKind::Smith, 1.0}};

GameSpec mac() { return build_mac(default_params()); }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// Value solver against the truncated-sum and Monte Carlo oracles.
Outcome criterion1() {
  oracle::RandomGameOptions opt;
  opt.max_states = 6;
  opt.max_actions = 4;
  double worst_exact = 0.0;
  double worst_z = 0.0;
  std::size_t mc_fail = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const GameSpec g = oracle::random_game(1000 + seed, opt);
    const auto pol = enumerate_policies(g);
    const auto mu = oracle::random_distribution(g, pol, seed);
    const PayoffTable F = payoff_table(g, pol, mu);
    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < g.num_subpops(); ++c) {
      for (std::size_t u = 0; u < pol[c].size(); ++u) {
        const Vector W = oracle::truncated_sum_values(oracle::policy_kernel(g.subpops[c], pol[c][u]),
                                                      oracle::policy_rewards(g, pol, mu, c, u), g.beta);
        for (std::size_t s = 0; s < g.subpops[c].num_states(); ++s) {
          worst_exact = std::max(worst_exact, std::abs(F(c, s, u) - W(static_cast<Eigen::Index>(s))));
        }
      }
    }
    // One Monte Carlo comparison per game at a seeded (c, u, s).
    const std::size_t c = rng() % g.num_subpops();
    const std::size_t u = rng() % pol[c].size();
    const std::size_t s = rng() % g.subpops[c].num_states();
    const auto est = oracle::monte_carlo_value(oracle::policy_kernel(g.subpops[c], pol[c][u]),
                                               oracle::policy_rewards(g, pol, mu, c, u), g.beta, s,
                                               100000, 77 + seed);
    const double diff = std::abs(est.mean - F(c, s, u));
    // Deterministic rollouts have zero sample variance, so the floor is the
    // rounding error of averaging 1e5 equal terms.
    const double resolution = 1e5 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(est.mean));
    const double z = diff / std::max(est.standard_error, resolution);
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++mc_fail;
  }
  return {worst_exact <= 1e-10 && mc_fail == 0,
          "max |V - truncated sum| " + fmt(worst_exact) + ", worst Monte Carlo deviation " + fmt(worst_z) +
              " SE, " + std::to_string(mc_fail) + " of 50 beyond 3 SE"};
}

// Tangency and component identities of the vector field.
Outcome criterion2() {
  oracle::RandomGameOptions opt;
  opt.max_states = 4;
  opt.max_actions = 3;
  double tangency = 0.0, drift = 0.0, revision = 0.0;
  for (std::uint64_t k = 1; k <= 1000; ++k) {
    const GameSpec g = oracle::random_game(5000 + k, opt);
    const auto pol = enumerate_policies(g);
    const auto mu = oracle::random_distribution(g, pol, k, k % 2 ? 0.0 : 0.3);
    const VectorFieldParts parts = vector_field_parts(g, pol, kAll[k % 3], mu);
    const StatePolicyDist f = parts.total();
    for (std::size_t c = 0; c < g.num_subpops(); ++c) {
      tangency = std::max(tangency, std::abs(f[c].sum()));
      drift = std::max(drift, parts.drift[c].colwise().sum().cwiseAbs().maxCoeff());
      revision = std::max(revision, parts.revision[c].rowwise().sum().cwiseAbs().maxCoeff());
    }
  }
  return {tangency <= 1e-12 && drift <= 1e-12 && revision <= 1e-12,
          "max tangency " + fmt(tangency) + ", drift column sum " + fmt(drift) + ", revision row sum " +
              fmt(revision)};
}

// Verified equilibria are rest points.
Outcome criterion3() {
  const GameSpec g = mac();
  const auto pol = enumerate_policies(g);
  SolverOptions opt;
  opt.restarts = 32;
  opt.seed = 3;
  const auto found = solve_msne_all(g, pol, opt);
  double worst = 0.0;
  for (const auto& r : found) {
    for (const auto& p : kAll) worst = std::max(worst, rest_residual(g, pol, p, r.candidate));
  }
  return {!found.empty() && worst <= 1e-8,
          std::to_string(found.size()) + " verified MSNE, max residual " + fmt(worst)};
}

// Smith rest points along trajectories are equilibria.
Outcome criterion4() {
  const GameSpec g = mac();
  const auto pol = enumerate_policies(g);
  const MeanDynamics dyn(g, pol, kAll[2]);
  MsneTolerances tol;
  tol.payoff = tol.stationarity = tol.mass = 1e-6;
  std::size_t checked = 0, failed = 0, never = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    bool reached = false;
    IntegrateOptions opt;
    opt.t_end = 100.0;
    opt.record_every = std::numeric_limits<std::size_t>::max();
    opt.observer = [&](double, const StatePolicyDist& mu) {
      if (dyn.field(mu).max_abs() < kRestPointThreshold) {
        reached = true;
        ++checked;
        if (!check_msne(g, pol, mu, tol).pass) ++failed;
      }
      return true;
    };
    integrate(dyn, random_interior(g, pol, 100 + seed), opt);
    if (!reached) ++never;
  }
  return {failed == 0 && checked > 0,
          std::to_string(checked) + " rest-point samples checked, " + std::to_string(failed) + " failed, " +
              std::to_string(never) + " of 20 runs never reached the threshold"};
}

// Local asymptotic stability of the strict equilibrium.
Outcome criterion5() {
  const GameSpec g = mac();
  const auto pol = enumerate_policies(g);
  const SolverResult sol = solve_msne(g, pol);
  if (!sol.converged || !check_strict_msne(g, pol, sol.candidate).strict) {
    return {false, "no strict MSNE found"};
  }
  bool pass = true;
  std::ostringstream os;
  for (const auto& p : kAll) {
    StabilityOptions opt;
    opt.samples = 10;
    opt.perturbation = 0.01;
    opt.t_end = 500.0;
    opt.seed = 11;
    const StabilityReport rep = lyapunov_stability(g, pol, p, sol.candidate, opt);
    double worst_final = 0.0, worst_increase = 0.0;
    for (const auto& r : rep.runs) {
      worst_final = std::max(worst_final, r.final_distance);
      worst_increase = std::max(worst_increase, r.max_increase);
    }
    pass = pass && rep.passed && rep.runs.size() == 10;
    os << protocol_name(p.kind) << ": max final distance " << fmt(worst_final) << ", max step increase "
       << fmt(worst_increase);
  }
  return {pass, os.str()};
}

// Imitative instability of a support-restricted rest point.
Outcome criterion6() {
  const GameSpec g = mac();
  const auto pol = enumerate_policies(g);
  const InstabilityReport r = instability_probe(g, pol, kAll[0]);
  const bool pass = r.rest_residual <= 1e-9 && !r.verdict.pass && r.monotone && r.escaped;
  return {pass, "residual " + fmt(r.rest_residual) + ", MSNE " + (r.verdict.pass ? "pass" : "fail") +
                    ", monotone " + (r.monotone ? "yes" : "no") + ", escaped " + (r.escaped ? "yes" : "no") +
                    " at t = " + fmt(r.escape_time)};
}

// Finite-N convergence to the mean field.
Outcome criterion7() {
  const GameSpec g = mac();
  const auto pol = enumerate_policies(g);
  ConvergenceConfig cfg;
  cfg.Ns = {100, 400, 1600, 6400};
  for (std::uint64_t s = 1; s <= 20; ++s) cfg.seeds.push_back(s);
  cfg.t_end = 10.0;
  cfg.dt = 0.01;
  cfg.record_interval = 0.1;
  const auto res = convergence_experiment(g, pol, kAll[0], random_interior(g, pol, 1), cfg);
  bool decreasing = true;
  std::ostringstream os;
  os << "medians";
  for (std::size_t i = 0; i < res.medians.size(); ++i) {
    os << " N=" << res.medians[i].N << ":" << fmt(res.medians[i].median);
    if (i > 0 && !(res.medians[i].median < res.medians[i - 1].median)) decreasing = false;
  }
  const bool slope_ok = res.slope && *res.slope >= -0.7 && *res.slope <= -0.3;
  os << ", slope " << (res.slope ? fmt(*res.slope) : "undefined");
  return {decreasing && slope_ok, os.str()};
}

// Positive correlation of the net flow.
Outcome criterion8() {
  std::size_t violations = 0;
  std::ostringstream os;
  for (const auto& p : kAll) {
    for (std::size_t n : {2u, 4u, 8u}) {
      const ProbeReport r = positive_correlation_probe(p, n, 10000, 31 * n + static_cast<std::size_t>(p.kind));
      violations += r.violations;
    }
  }
  os << violations << " violations over 9 x 10^4 samples";
  return {violations == 0, os.str()};
}

// Shape of the MAC figure: interior runs reach u1 and N = 1000 tracks them.
Outcome criterion9() {
  const GameSpec g = mac();
  const auto pol = enumerate_policies(g);
  const double t_end = 30.0;
  const double interval = 0.1;
  bool reach = true;
  std::size_t tracked = 0;
  double worst = 0.0;
  std::ostringstream os;
  for (std::uint64_t ic : {1u, 2u}) {
    const StatePolicyDist mu0 = random_interior(g, pol, 900 + ic);
    IntegrateOptions opt;
    opt.t_end = t_end;
    opt.dt = 0.01;
    opt.record_every = 10;
    const Trajectory mf = integrate(MeanDynamics(g, pol, kAll[0]), mu0, opt);
    const double final_mass = mf.snapshots.back().policy_marginal(0)(0);
    reach = reach && final_mass >= 0.999 * g.subpops[0].mass;
    os << "IC" << ic << " mass(u1) " << fmt(final_mass) << "; ";
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      SimConfig cfg;
      cfg.t_end = t_end;
      cfg.seed = 1000 * ic + seed;
      cfg.record_times = uniform_grid(t_end, interval);
      const Trajectory emp = simulate(g, pol, kAll[0], init_population(g, mu0, 1000, seed), cfg);
      double gap = 0.0;
      for (std::size_t i = 0; i < emp.size() && i < mf.size(); ++i) {
        gap = std::max(gap, (emp.snapshots[i].policy_marginal(0) - mf.snapshots[i].policy_marginal(0))
                                .lpNorm<1>());
      }
      if (emp.size() != mf.size()) gap = INFINITY;
      worst = std::max(worst, gap);
      if (gap < 0.1) ++tracked;
    }
  }
  os << tracked << " of 20 finite runs within 0.1 (worst policy-marginal gap " << fmt(worst) << ")";
  return {reach && tracked >= 18, os.str()};
}

// Imitation never revives an extinct policy.
Outcome criterion10() {
  const GameSpec g = mac();
  const auto pol = enumerate_policies(g);
  double worst_mf = 0.0;
  double worst_pop = 0.0;
  for (std::size_t extinct : {0u, 1u, 3u}) {
    StatePolicyDist mu0 = random_interior(g, pol, 40 + extinct);
    const double removed = mu0[0].col(static_cast<Eigen::Index>(extinct)).sum();
    mu0[0].col(static_cast<Eigen::Index>(extinct)).setZero();
    mu0[0] *= g.subpops[0].mass / (g.subpops[0].mass - removed);
    IntegrateOptions opt;
    opt.t_end = 50.0;
    opt.observer = [&](double, const StatePolicyDist& mu) {
      worst_mf = std::max(worst_mf, mu[0].col(static_cast<Eigen::Index>(extinct)).sum());
      return true;
    };
    opt.record_every = std::numeric_limits<std::size_t>::max();
    integrate(MeanDynamics(g, pol, kAll[0]), mu0, opt);
    SimConfig cfg;
    cfg.t_end = 10.0;
    cfg.seed = 5 + extinct;
    cfg.record_times = uniform_grid(10.0, 0.05);
    const Trajectory emp = simulate(g, pol, kAll[0], init_population(g, mu0, 500), cfg);
    for (const auto& snap : emp.snapshots) {
      worst_pop = std::max(worst_pop, snap[0].col(static_cast<Eigen::Index>(extinct)).sum());
    }
  }
  return {worst_mf <= 1e-12 && worst_pop == 0.0,
          "max extinct mass: mean field " + fmt(worst_mf) + ", population " + fmt(worst_pop)};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8,
                                                          criterion9, criterion10};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "Criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << " (" << o.detail << "; "
              << fmt(secs) << " s)" << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
