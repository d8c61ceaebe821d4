// Exploratory search for rest points of the excess-payoff (BNN) dynamic that
// are not stationary equilibria. With discounted payoffs the excess payoff is
// formed state by state, so revision flows can balance away from optimality.
// Random small games are integrated from random interior points; every
// trajectory that settles (residual below the rest-point threshold) is
// checked, and settled non-equilibria are written out with their game.
// Finding none proves nothing; this is not a test.

#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfg/config.hpp"
#include "mfg/diagnostics.hpp"
#include "mfg/equilibria.hpp"
#include "mfg/io.hpp"
#include "mfg/meanfield.hpp"

namespace {

using nlohmann::json;

mfg::GameSpec random_game(std::mt19937_64& rng, std::size_t states, double coupling,
                          double beta) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  mfg::SubpopSpec sub;
  sub.name = "players";
  sub.mass = 1.0;
  sub.decision_rate = 1.0;
  sub.revision_rate = 1.0;
  const std::size_t actions = 2;
  for (std::size_t s = 0; s < states; ++s) {
    sub.states.push_back("s" + std::to_string(s));
    sub.feasible.push_back({0, 1});
  }
  sub.actions = {"a", "b"};
  sub.kernel = mfg::TransitionKernel(states, actions);
  for (std::size_t s = 0; s < states; ++s) {
    for (std::size_t a = 0; a < actions; ++a) {
      double total = 0.0;
      std::vector<double> row(states);
      // Strictly positive rows keep every policy kernel irreducible.
      for (auto& x : row) total += (x = 0.05 + unit(rng));
      for (std::size_t t = 0; t < states; ++t) sub.kernel(s, a, t) = row[t] / total;
    }
  }
  const auto cells = static_cast<Eigen::Index>(states * actions);
  mfg::AffineCongestion reward;
  reward.base = mfg::Matrix(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(actions));
  for (Eigen::Index i = 0; i < reward.base.size(); ++i) reward.base.data()[i] = sym(rng);
  reward.weights = mfg::Matrix(cells, cells);
  for (Eigen::Index i = 0; i < reward.weights.size(); ++i) {
    reward.weights.data()[i] = coupling * sym(rng);
  }
  sub.reward = reward;
  mfg::GameSpec game;
  game.beta = beta;
  game.subpops.push_back(std::move(sub));
  return game;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search random games for excess-payoff rest points that are not equilibria"};
  std::size_t trials = 200;
  std::size_t starts = 3;
  std::uint64_t seed = 1;
  double t_end = 200.0;
  double coupling = 2.0;
  std::string out = "excess_payoff_findings.json";
  app.add_option("--trials", trials, "random games")->capture_default_str();
  app.add_option("--starts", starts, "interior starts per game")->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  app.add_option("--t-end", t_end, "integration horizon")->capture_default_str();
  app.add_option("--coupling", coupling, "scale of the congestion weights")->capture_default_str();
  app.add_option("--out", out, "findings JSON")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> state_count(2, 3);
  const double betas[] = {0.5, 0.9, 0.95};
  json findings = json::array();
  std::size_t settled = 0;
  for (std::size_t k = 0; k < trials; ++k) {
    const double beta = betas[k % 3];
    const mfg::GameSpec game = random_game(rng, state_count(rng), coupling, beta);
    const mfg::GamePolicies policies = mfg::enumerate_policies(game);
    const mfg::MeanDynamics dynamics(game, policies, {mfg::ProtocolKind::BNN, 1.0});
    for (std::size_t i = 0; i < starts; ++i) {
      const auto mu0 = mfg::random_interior(game, policies, rng());
      mfg::IntegrateOptions opt;
      opt.t_end = t_end;
      opt.record_every = static_cast<std::size_t>(1e9);
      const auto traj = mfg::integrate(dynamics, mu0, opt);
      const auto& mu = traj.snapshots.back();
      const double residual = dynamics.field(mu).max_abs();
      if (residual > mfg::kRestPointThreshold) continue;
      ++settled;
      const auto verdict = mfg::check_msne(game, policies, mu);
      if (verdict.pass) continue;
      double worst = 0.0;
      for (const auto& v : verdict.optimality) worst = std::max(worst, v.gap);
      findings.push_back({{"trial", k},
                          {"rest_residual", residual},
                          {"max_optimality_gap", worst},
                          {"game", json::parse(mfg::game_to_json(game))},
                          {"mu", json::parse(mfg::distribution_to_json(game, mu))}});
      std::cout << "trial " << k << ": settled non-equilibrium, optimality gap "
                << mfg::format_double(worst) << "\n";
    }
  }
  mfg::write_text_file(out, json{{"seed", seed},
                                 {"trials", trials},
                                 {"settled_runs", settled},
                                 {"findings", findings}}
                                .dump(2));
  std::cout << settled << " settled runs, " << findings.size() << " non-equilibrium rest points\n";
  return 0;
}
