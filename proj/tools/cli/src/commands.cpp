#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfg/config.hpp"
#include "mfg/diagnostics.hpp"
#include "mfg/equilibria.hpp"
#include "mfg/errors.hpp"
#include "mfg/io.hpp"
#include "mfg/mac.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/population.hpp"
#include "mfg/protocols.hpp"
#include "mfg/validation.hpp"
#include "mfg_cli/cli.hpp"
#include "mfg_cli/manifest.hpp"

#ifndef MFG_VERSION
#define MFG_VERSION "unknown"
#endif

namespace mfg::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kGrowthIdentityTol = 1e-10;

struct Session {
  std::ostream& out;
  std::ostream& err;
  RunManifest manifest;
  /// Primary output; the manifest is written next to it.
  std::optional<fs::path> primary;
  bool primary_is_directory = false;

  void add_output(const fs::path& p) { manifest.outputs.push_back(p.string()); }
  void set_primary(const fs::path& p, bool directory = false) {
    if (!primary) {
      primary = p;
      primary_is_directory = directory;
    }
  }
};

struct LoadedGame {
  GameSpec game;
  GamePolicies policies;
};

LoadedGame load(const std::string& path, Session& s) {
  LoadedGame g{load_game(path), {}};
  s.manifest.config_hash = game_hash(g.game);
  g.policies = enumerate_policies(g.game);
  return g;
}

StatePolicyDist initial_distribution(const std::string& spec, const LoadedGame& g) {
  if (spec == "uniform") return uniform_distribution(g.game, g.policies);
  return load_distribution(spec, g.game, g.policies);
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mu_json(const GameSpec& game, const StatePolicyDist& mu) {
  return json::parse(distribution_to_json(game, mu));
}

json verdict_json(const GameSpec& game, const MsneVerdict& v) {
  json j;
  j["pass"] = v.pass;
  j["scale"] = v.scale;
  j["tolerances"] = {{"payoff", v.tolerances.payoff},
                     {"stationarity", v.tolerances.stationarity},
                     {"mass", v.tolerances.mass}};
  j["max_stationarity_residual"] = v.max_stationarity_residual;
  json opt = json::array();
  for (const auto& o : v.optimality) {
    const auto& sub = game.subpops[o.subpop];
    opt.push_back({{"subpop", sub.name},
                   {"state", sub.states[o.state]},
                   {"policy", o.policy + 1},
                   {"mass", o.mass},
                   {"gap", o.gap}});
  }
  j["optimality_violations"] = std::move(opt);
  json st = json::array();
  for (const auto& o : v.stationarity) {
    const auto& sub = game.subpops[o.subpop];
    st.push_back({{"subpop", sub.name},
                  {"state", sub.states[o.state]},
                  {"policy", o.policy + 1},
                  {"residual", o.residual}});
  }
  j["stationarity_violations"] = std::move(st);
  return j;
}

json strict_json(const GameSpec& game, const StrictVerdict& v) {
  json j;
  j["strict"] = v.strict;
  json per = json::array();
  for (std::size_t c = 0; c < v.support.size(); ++c) {
    per.push_back({{"subpop", game.subpops[c].name},
                   {"policy", v.support[c] ? json(*v.support[c] + 1) : json(nullptr)},
                   {"gap", std::isfinite(v.gaps[c]) ? json(v.gaps[c]) : json(nullptr)}});
  }
  j["support"] = std::move(per);
  j["min_gap"] = std::isfinite(v.min_gap) ? json(v.min_gap) : json(nullptr);
  return j;
}

json policies_json(const GameSpec& game, const GamePolicies& policies) {
  json j = json::object();
  for (std::size_t c = 0; c < game.num_subpops(); ++c) {
    const auto& sub = game.subpops[c];
    json list = json::array();
    for (const auto& u : policies[c]) {
      json choice = json::object();
      for (std::size_t s = 0; s < sub.num_states(); ++s) {
        choice[sub.states[s]] = sub.actions[static_cast<std::size_t>(u(s))];
      }
      list.push_back(std::move(choice));
    }
    j[sub.name] = std::move(list);
  }
  return j;
}

/// Writes `report` to `out_path` if given, otherwise prints it.
void emit_report(Session& s, const std::optional<std::string>& out_path, const json& report) {
  if (out_path) {
    write_text_file(*out_path, report.dump(2));
    s.add_output(*out_path);
    s.set_primary(*out_path);
  } else {
    s.out << report.dump(2) << "\n";
  }
}

void write_trajectory(Session& s, const fs::path& path, const LoadedGame& g, Trajectory& traj) {
  traj.metadata.game_hash = s.manifest.config_hash;
  write_trajectory_csv(path, g.game, g.policies, traj);
  fs::path meta = path;
  meta.replace_extension(".meta.json");
  write_text_file(meta, trajectory_metadata_json(traj));
  s.add_output(path);
  s.add_output(meta);
  s.set_primary(path);
}

std::vector<std::size_t> parse_size_list(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": '" + item + "' is not a positive integer");
    }
  }
  if (out.empty()) throw ConfigError(std::string(what) + " is empty");
  return out;
}

// Command options. CLI11 binds directly into these.

struct ProtocolOpts {
  std::string protocol = "imitative";
  double kappa = 1.0;
  ProtocolSpec spec() const { return {parse_protocol(protocol), kappa}; }
};

void add_protocol_options(CLI::App* sub, ProtocolOpts& p) {
  sub->add_option("--protocol", p.protocol, "imitative, bnn or smith")->capture_default_str();
  sub->add_option("--kappa", p.kappa, "protocol rate scale")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

struct ValidateOpts {
  std::string config;
  std::optional<std::string> protocol;
  double kappa = 1.0;
  std::optional<std::string> out;
};

int cmd_validate(Session& s, const ValidateOpts& o) {
  const GameSpec game = load_game(o.config);
  s.manifest.config_hash = game_hash(game);
  std::optional<ProtocolSpec> proto;
  if (o.protocol) proto = ProtocolSpec{parse_protocol(*o.protocol), o.kappa};
  const ValidationReport report = validate_game(game, proto);
  json checks = json::array();
  for (const auto& c : report.checks) {
    s.out << (c.passed ? "[PASS] " : "[FAIL] ") << c.name;
    if (!c.detail.empty()) s.out << ": " << c.detail;
    s.out << "\n";
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  s.out << (report.passed() ? "valid" : "invalid") << "\n";
  if (o.out) {
    write_text_file(*o.out, json{{"passed", report.passed()}, {"checks", checks}}.dump(2));
    s.add_output(*o.out);
    s.set_primary(*o.out);
  }
  return report.passed() ? kExitOk : kExitDomainFailure;
}

struct SimulateMfOpts {
  std::string config;
  ProtocolOpts protocol;
  double t_end = 10.0;
  double dt = 0.01;
  std::size_t record_every = 1;
  std::string mu0 = "uniform";
  std::string out;
};

int cmd_simulate_mf(Session& s, const SimulateMfOpts& o) {
  const LoadedGame g = load(o.config, s);
  const MeanDynamics dynamics(g.game, g.policies, o.protocol.spec());
  IntegrateOptions opt;
  opt.t_end = o.t_end;
  opt.dt = o.dt;
  opt.record_every = o.record_every;
  Trajectory traj = integrate(dynamics, initial_distribution(o.mu0, g), opt);
  write_trajectory(s, o.out, g, traj);
  const double residual = dynamics.field(traj.snapshots.back()).max_abs();
  s.out << "rows: " << traj.size() << "\n";
  s.out << "final rest_residual: " << format_double(residual) << "\n";
  if (traj.metadata.guard.large_clamps > 0) {
    s.err << "warning: " << traj.metadata.guard.large_clamps
          << " negative entries above round-off were clamped\n";
  }
  return kExitOk;
}

struct SimulatePopOpts {
  std::string config;
  ProtocolOpts protocol;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  double t_end = 10.0;
  double grid = 0.1;
  std::size_t payoff_refresh = 1;
  std::string mu0 = "uniform";
  std::string out;
};

int cmd_simulate_pop(Session& s, const SimulatePopOpts& o) {
  const LoadedGame g = load(o.config, s);
  s.manifest.seeds = {o.seed};
  const auto agents = init_population(g.game, initial_distribution(o.mu0, g), o.n, o.seed);
  SimConfig cfg;
  cfg.t_end = o.t_end;
  cfg.seed = o.seed;
  cfg.record_times = uniform_grid(o.t_end, o.grid);
  cfg.payoff_refresh = o.payoff_refresh;
  Trajectory traj = simulate(g.game, g.policies, o.protocol.spec(), agents, cfg);
  write_trajectory(s, o.out, g, traj);
  s.out << "rows: " << traj.size() << ", events: " << traj.metadata.events << "\n";
  return kExitOk;
}

struct ConvergenceOpts {
  std::string config;
  ProtocolOpts protocol;
  std::string n_list = "100,400,1600,6400";
  std::size_t seeds = 20;
  std::uint64_t seed_base = 1;
  double t_end = 10.0;
  double dt = 0.01;
  double interval = 0.1;
  std::size_t payoff_refresh = 1;
  std::string mu0 = "uniform";
  std::string out;
};

int cmd_convergence(Session& s, const ConvergenceOpts& o) {
  const LoadedGame g = load(o.config, s);
  ConvergenceConfig cfg;
  cfg.Ns = parse_size_list(o.n_list, "--n-list");
  for (std::size_t i = 0; i < o.seeds; ++i) cfg.seeds.push_back(o.seed_base + i);
  s.manifest.seeds = cfg.seeds;
  cfg.t_end = o.t_end;
  cfg.dt = o.dt;
  cfg.record_interval = o.interval;
  cfg.payoff_refresh = o.payoff_refresh;
  const ConvergenceResult r = convergence_experiment(
      g.game, g.policies, o.protocol.spec(), initial_distribution(o.mu0, g), cfg);

  const fs::path dir = o.out;
  fs::create_directories(dir);
  std::ostringstream table;
  table << "N,seed,sup_l1_error\n";
  for (const auto& row : r.rows) {
    table << row.N << "," << row.seed << "," << format_double(row.sup_l1_error) << "\n";
  }
  write_text_file(dir / "error_table.csv", table.str());

  bool decreasing = r.medians.size() >= 2;
  json medians = json::array();
  for (std::size_t i = 0; i < r.medians.size(); ++i) {
    medians.push_back({{"N", r.medians[i].N}, {"median", r.medians[i].median}});
    if (i > 0 && !(r.medians[i].median < r.medians[i - 1].median)) decreasing = false;
    s.out << "N=" << r.medians[i].N << " median sup-L1 error " << format_double(r.medians[i].median)
          << "\n";
  }
  json summary;
  summary["protocol"] = o.protocol.protocol;
  summary["kappa"] = o.protocol.kappa;
  summary["Ns"] = cfg.Ns;
  summary["seeds"] = cfg.seeds;
  summary["t_end"] = cfg.t_end;
  summary["dt"] = cfg.dt;
  summary["record_interval"] = cfg.record_interval;
  summary["medians"] = std::move(medians);
  summary["medians_strictly_decreasing"] = decreasing;
  summary["slope"] = r.slope ? json(*r.slope) : json(nullptr);
  summary["game_hash"] = s.manifest.config_hash;
  write_text_file(dir / "summary.json", summary.dump(2));
  Trajectory reference = r.reference;
  reference.metadata.game_hash = s.manifest.config_hash;
  write_trajectory_csv(dir / "reference.csv", g.game, g.policies, reference);

  s.add_output(dir / "error_table.csv");
  s.add_output(dir / "summary.json");
  s.add_output(dir / "reference.csv");
  s.set_primary(dir, true);
  s.out << "slope: " << (r.slope ? format_double(*r.slope) : std::string("null")) << "\n";
  return kExitOk;
}

struct FindMsneOpts {
  std::string config;
  std::size_t restarts = 16;
  std::uint64_t seed = 0;
  double damping = 0.2;
  std::size_t max_iter = 5000;
  std::string out = "msne_report.json";
};

int cmd_find_msne(Session& s, const FindMsneOpts& o) {
  const LoadedGame g = load(o.config, s);
  s.manifest.seeds = {o.seed};
  SolverOptions opt;
  opt.restarts = o.restarts;
  opt.seed = o.seed;
  opt.damping = o.damping;
  opt.max_iter = o.max_iter;
  const SolverResult r = solve_msne(g.game, g.policies, opt);
  json report;
  report["converged"] = r.converged;
  report["iterations"] = r.iterations;
  report["restarts_used"] = r.restarts_used;
  report["policies"] = policies_json(g.game, g.policies);
  json marginals = json::object();
  for (std::size_t c = 0; c < g.game.num_subpops(); ++c) {
    marginals[g.game.subpops[c].name] = vector_json(r.x[c]);
  }
  report["policy_marginals"] = std::move(marginals);
  report["mu"] = mu_json(g.game, r.candidate);
  report["verdict"] = verdict_json(g.game, r.verdict);
  if (r.verdict.pass) {
    const StrictVerdict strict = check_strict_msne(g.game, g.policies, r.candidate, opt.check);
    report["strict"] = strict_json(g.game, strict);
    s.out << "MSNE found (" << (strict.strict ? "strict" : "not strict") << ")";
    for (std::size_t c = 0; c < g.game.num_subpops(); ++c) {
      s.out << "; " << g.game.subpops[c].name << " marginal";
      for (Eigen::Index u = 0; u < r.x[c].size(); ++u) s.out << " " << format_double(r.x[c](u));
    }
    s.out << "\n";
  } else {
    report["strict"] = nullptr;
    s.out << "no verified MSNE after " << r.restarts_used << " restarts\n";
  }
  write_text_file(o.out, report.dump(2));
  s.add_output(o.out);
  s.set_primary(o.out);
  return r.verdict.pass ? kExitOk : kExitDomainFailure;
}

struct CheckMsneOpts {
  std::string config;
  std::string mu;
  MsneTolerances tol;
  std::optional<std::string> out;
};

int cmd_check_msne(Session& s, const CheckMsneOpts& o) {
  const LoadedGame g = load(o.config, s);
  const StatePolicyDist mu = load_distribution(o.mu, g.game, g.policies);
  const MsneVerdict v = check_msne(g.game, g.policies, mu, o.tol);
  json report;
  report["verdict"] = verdict_json(g.game, v);
  const PayoffTable F = payoff_table(g.game, g.policies, mu);
  json payoffs = json::object();
  for (std::size_t c = 0; c < g.game.num_subpops(); ++c) {
    payoffs[g.game.subpops[c].name] = matrix_json(F.values(c).transpose());
  }
  report["payoffs"] = std::move(payoffs);  // rows are states, columns policies
  report["strict"] = v.pass ? strict_json(g.game, check_strict_msne(g.game, g.policies, mu, o.tol))
                            : json(nullptr);
  emit_report(s, o.out, report);
  s.err << (v.pass ? "MSNE: pass" : "MSNE: fail") << " (" << v.optimality.size()
        << " optimality and " << v.stationarity.size() << " stationarity violations)\n";
  return v.pass ? kExitOk : kExitDomainFailure;
}

struct DiagnoseOpts {
  std::string config;
  std::string kind;
  ProtocolOpts protocol;
  std::size_t samples = 10000;
  std::string n_list = "2,4,8";
  std::uint64_t seed = 0;
  std::optional<std::string> mu;
  double t_end = 500.0;
  double dt = 0.01;
  double perturbation = 0.01;
  double K = 2.0;
  std::size_t runs = 10;
  std::optional<std::string> out;
};

StatePolicyDist strict_equilibrium(const LoadedGame& g, const DiagnoseOpts& o) {
  if (o.mu) return load_distribution(*o.mu, g.game, g.policies);
  SolverOptions opt;
  opt.seed = o.seed;
  const SolverResult r = solve_msne(g.game, g.policies, opt);
  if (!r.converged) throw AssumptionViolated("no MSNE found; pass one with --mu");
  return r.candidate;
}

int diagnose_poscorr(Session& s, const DiagnoseOpts& o, json& report) {
  const ProtocolSpec p = o.protocol.spec();
  std::size_t violations = 0;
  json rows = json::array();
  for (std::size_t n : parse_size_list(o.n_list, "--n-list")) {
    const ProbeReport r = positive_correlation_probe(p, n, o.samples, o.seed + n);
    violations += r.violations;
    rows.push_back({{"n", n},
                    {"samples", r.samples},
                    {"nonzero_flows", r.nonzero_flows},
                    {"violations", r.violations},
                    {"min_inner_product", r.min_inner_product}});
    s.err << "n=" << n << ": " << r.violations << " violations in " << r.samples << " samples\n";
  }
  report["probes"] = std::move(rows);
  report["violations"] = violations;
  report["passed"] = violations == 0;
  return violations == 0 ? kExitOk : kExitDomainFailure;
}

int diagnose_ratebound(Session& s, const LoadedGame& g, const DiagnoseOpts& o, json& report) {
  const BoundReport b = check_rate_bound(g.game, o.protocol.spec());
  report["reward_bound"] = b.reward_bound;
  report["payoff_bound"] = b.payoff_bound;
  json subs = json::array();
  for (const auto& sb : b.subpops) {
    subs.push_back({{"subpop", sb.name},
                    {"worst_case_switch_rate", sb.bound},
                    {"revision_rate", sb.revision_rate},
                    {"minimal_revision_rate", sb.minimal_revision_rate},
                    {"passed", sb.passed}});
  }
  report["subpops"] = std::move(subs);
  report["passed"] = b.passed;
  s.err << "rate bound " << (b.passed ? "passed" : "failed") << "\n";
  return b.passed ? kExitOk : kExitDomainFailure;
}

int diagnose_growth(Session& s, const LoadedGame& g, const DiagnoseOpts& o, json& report) {
  const StatePolicyDist mu =
      o.mu ? load_distribution(*o.mu, g.game, g.policies) : uniform_distribution(g.game, g.policies);
  const ProtocolSpec p = o.protocol.spec();
  const GrowthRateTable G = growth_rates(g.game, g.policies, p, mu);
  const PayoffTable F = payoff_table(g.game, g.policies, mu);
  const double scale = std::max(1.0, F.max_abs());
  double identity = 0.0;
  bool monotone = true;
  json subs = json::object();
  for (std::size_t c = 0; c < g.game.num_subpops(); ++c) {
    const Matrix& Gc = G[c];
    for (Eigen::Index st = 0; st < Gc.rows(); ++st) {
      identity = std::max(identity, std::abs(mu[c].row(st).dot(Gc.row(st))));
      const Vector Fs = F.at_state(c, static_cast<std::size_t>(st));
      for (Eigen::Index u = 0; u < Gc.cols(); ++u) {
        for (Eigen::Index v = 0; v < Gc.cols(); ++v) {
          // Growth rates are ordered like payoffs.
          if (Fs(u) > Fs(v) + 1e-12 * scale && !(Gc(st, u) > Gc(st, v))) monotone = false;
        }
      }
    }
    subs[g.game.subpops[c].name] = matrix_json(Gc);
  }
  report["growth_rates"] = std::move(subs);  // rows are states, columns policies
  report["max_abs_sum_mu_G"] = identity;
  report["monotone"] = monotone;
  s.err << "max |sum_u mu G_u| = " << format_double(identity) << ", monotone: " << monotone << "\n";
  return identity <= kGrowthIdentityTol * scale && monotone ? kExitOk : kExitDomainFailure;
}

int diagnose_lyapunov(Session& s, const LoadedGame& g, const DiagnoseOpts& o, json& report) {
  const StatePolicyDist mu_star = strict_equilibrium(g, o);
  StabilityOptions opt;
  opt.samples = o.runs;
  opt.perturbation = o.perturbation;
  opt.seed = o.seed;
  opt.t_end = o.t_end;
  opt.dt = o.dt;
  opt.K = o.K;
  const StabilityReport r = lyapunov_stability(g.game, g.policies, o.protocol.spec(), mu_star, opt);
  json runs = json::array();
  for (const auto& run : r.runs) {
    runs.push_back({{"seed", run.seed},
                    {"initial_distance", run.initial_distance},
                    {"final_distance", run.final_distance},
                    {"initial_value", run.initial_value},
                    {"final_value", run.final_value},
                    {"max_increase", run.max_increase},
                    {"monotone", run.monotone},
                    {"converged", run.converged}});
    s.manifest.seeds.push_back(run.seed);
  }
  report["mu_star"] = mu_json(g.game, mu_star);
  report["K"] = o.K;
  report["runs"] = std::move(runs);
  report["passed"] = r.passed;
  s.err << "Lyapunov stability " << (r.passed ? "confirmed" : "not confirmed") << " over "
        << r.runs.size() << " perturbations\n";
  return r.passed ? kExitOk : kExitDomainFailure;
}

int diagnose_instability(Session& s, const LoadedGame& g, const DiagnoseOpts& o, json& report) {
  InstabilityOptions opt;
  opt.dt = o.dt;
  opt.t_max = o.t_end;
  opt.solver.seed = o.seed;
  const InstabilityReport r = instability_probe(g.game, g.policies, o.protocol.spec(), opt);
  json excluded = json::object();
  json optimal = json::object();
  for (std::size_t c = 0; c < g.game.num_subpops(); ++c) {
    json list = json::array();
    for (std::size_t u : r.excluded[c]) list.push_back(u + 1);
    excluded[g.game.subpops[c].name] = std::move(list);
    optimal[g.game.subpops[c].name] = r.optimal_policy[c] + 1;
  }
  report["excluded_policies"] = std::move(excluded);
  report["rest_point"] = mu_json(g.game, r.rest_point);
  report["rest_residual"] = r.rest_residual;
  report["restricted_solver_converged"] = r.restricted_solver_converged;
  report["verdict"] = verdict_json(g.game, r.verdict);
  report["optimal_policy"] = std::move(optimal);
  report["optimal_everywhere"] = r.optimal_everywhere;
  report["initial_optimal_mass"] = r.optimal_mass.front();
  report["final_optimal_mass"] = r.optimal_mass.back();
  report["monotone"] = r.monotone;
  report["escaped"] = r.escaped;
  report["escape_time"] = r.escaped ? json(r.escape_time) : json(nullptr);
  report["final_distance"] = r.final_distance;
  const bool confirmed = r.rest_residual <= kRestPointThreshold && !r.verdict.pass && r.monotone &&
                         r.escaped;
  report["instability_confirmed"] = confirmed;
  s.err << "rest residual " << format_double(r.rest_residual) << ", MSNE "
        << (r.verdict.pass ? "pass" : "fail") << ", escaped " << r.escaped << " at t="
        << format_double(r.escape_time) << "\n";
  return confirmed ? kExitOk : kExitDomainFailure;
}

int cmd_diagnose(Session& s, const DiagnoseOpts& o) {
  const LoadedGame g = load(o.config, s);
  json report;
  report["diagnostic"] = o.kind;
  report["protocol"] = o.protocol.protocol;
  report["kappa"] = o.protocol.kappa;
  int code = kExitOk;
  if (o.kind == "poscorr") {
    code = diagnose_poscorr(s, o, report);
    report["seed"] = o.seed;
    s.manifest.seeds = {o.seed};
  } else if (o.kind == "ratebound") {
    code = diagnose_ratebound(s, g, o, report);
  } else if (o.kind == "growth") {
    code = diagnose_growth(s, g, o, report);
  } else if (o.kind == "lyapunov") {
    code = diagnose_lyapunov(s, g, o, report);
  } else {
    code = diagnose_instability(s, g, o, report);
  }
  emit_report(s, o.out, report);
  return code;
}

constexpr const char* kMacFields[] = {"P_L",   "P_H", "sigma2", "Cbar", "beta_price",
                                      "alpha", "gamma", "p_F", "T_msg", "Rd",
                                      "Rr",    "beta", "mass"};
constexpr std::size_t kMacFieldCount = std::size(kMacFields);

struct MacOpts {
  std::optional<std::string> params;
  std::array<std::optional<double>, kMacFieldCount> fields;
  bool show_defaults = false;
  std::optional<std::string> out;
};

int cmd_mac(Session& s, const MacOpts& o) {
  if (o.show_defaults) {
    s.out << default_params_document();
    return kExitOk;
  }
  MacParams p = default_params();
  if (o.params) p = parse_mac_params(read_text_file(*o.params), p);
  json flags = json::object();
  for (std::size_t i = 0; i < kMacFieldCount; ++i) {
    if (o.fields[i]) flags[kMacFields[i]] = *o.fields[i];
  }
  if (!flags.empty()) p = parse_mac_params(flags.dump(), p);
  validate_mac_params(p);
  const GameSpec game = build_mac(p);
  s.manifest.config_hash = game_hash(game);
  if (o.out) {
    write_text_file(*o.out, game_to_json(game));
    s.add_output(*o.out);
    s.set_primary(*o.out);
  } else {
    s.out << game_to_json(game) << "\n";
  }
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalFailure*>(&e)) return kExitNumericError;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const PreconditionError*>(&e) ||
      dynamic_cast<const InvalidParams*>(&e) || dynamic_cast<const PolicyExplosion*>(&e) ||
      dynamic_cast<const InfeasibleAction*>(&e) || dynamic_cast<const WrongProtocol*>(&e) ||
      dynamic_cast<const fs::filesystem_error*>(&e)) {
    return kExitInputError;
  }
  if (dynamic_cast<const Error*>(&e)) return kExitDomainFailure;
  return kExitNumericError;
}

void write_manifest(Session& s, const std::optional<std::string>& manifest_path) {
  const std::string text = s.manifest.to_json();
  try {
    if (manifest_path) {
      write_text_file(*manifest_path, text);
    } else if (s.primary) {
      write_text_file(manifest_path_for(*s.primary, s.primary_is_directory), text);
    } else {
      s.err << "manifest: " << s.manifest.to_json(-1) << "\n";
    }
  } catch (const std::exception& e) {
    s.err << "warning: manifest not written: " << e.what() << "\n";
  }
}

}  // namespace

std::string version() { return MFG_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evolutionary dynamics and stationary equilibria of finite-state mean-field games",
               "mfg_evolve"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MFG_VERSION);
  std::optional<std::string> manifest_path;
  app.add_option("--manifest", manifest_path, "where to write the run manifest");

  std::function<int(Session&)> action;

  ValidateOpts validate;
  auto* v = app.add_subcommand("validate", "structural checks of a game configuration");
  v->add_option("config", validate.config, "game JSON")->required();
  v->add_option("--protocol", validate.protocol, "also check the rate bound for this protocol");
  v->add_option("--kappa", validate.kappa, "protocol rate scale")->check(CLI::PositiveNumber);
  v->add_option("--out", validate.out, "JSON report");
  v->callback([&] { action = [&](Session& s) { return cmd_validate(s, validate); }; });

  SimulateMfOpts mf;
  auto* smf = app.add_subcommand("simulate-mf", "integrate the mean dynamic");
  smf->add_option("config", mf.config, "game JSON")->required();
  add_protocol_options(smf, mf.protocol);
  smf->add_option("--t-end", mf.t_end)->check(CLI::NonNegativeNumber)->capture_default_str();
  smf->add_option("--dt", mf.dt)->check(CLI::PositiveNumber)->capture_default_str();
  smf->add_option("--record-every", mf.record_every, "keep every k-th step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  smf->add_option("--mu0", mf.mu0, "'uniform' or a distribution JSON")->capture_default_str();
  smf->add_option("--out", mf.out, "trajectory CSV")->required();
  smf->callback([&] { action = [&](Session& s) { return cmd_simulate_mf(s, mf); }; });

  SimulatePopOpts pop;
  auto* spop = app.add_subcommand("simulate-pop", "exact finite-population simulation");
  spop->add_option("config", pop.config, "game JSON")->required();
  add_protocol_options(spop, pop.protocol);
  spop->add_option("--n", pop.n, "number of players")->check(CLI::PositiveNumber)->capture_default_str();
  spop->add_option("--seed", pop.seed)->capture_default_str();
  spop->add_option("--t-end", pop.t_end)->check(CLI::NonNegativeNumber)->capture_default_str();
  spop->add_option("--grid", pop.grid, "recording interval")->check(CLI::PositiveNumber)->capture_default_str();
  spop->add_option("--payoff-refresh", pop.payoff_refresh, "revisions between payoff updates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  spop->add_option("--mu0", pop.mu0, "'uniform' or a distribution JSON")->capture_default_str();
  spop->add_option("--out", pop.out, "trajectory CSV")->required();
  spop->callback([&] { action = [&](Session& s) { return cmd_simulate_pop(s, pop); }; });

  ConvergenceOpts conv;
  auto* cv = app.add_subcommand("convergence", "finite-N versus mean-field error scaling");
  cv->add_option("config", conv.config, "game JSON")->required();
  add_protocol_options(cv, conv.protocol);
  cv->add_option("--n-list", conv.n_list, "comma-separated population sizes")->capture_default_str();
  cv->add_option("--seeds", conv.seeds, "replicates per N")->check(CLI::PositiveNumber)->capture_default_str();
  cv->add_option("--seed-base", conv.seed_base, "first replicate seed")->capture_default_str();
  cv->add_option("--t-end", conv.t_end)->check(CLI::PositiveNumber)->capture_default_str();
  cv->add_option("--dt", conv.dt)->check(CLI::PositiveNumber)->capture_default_str();
  cv->add_option("--interval", conv.interval, "comparison grid spacing")->check(CLI::PositiveNumber)->capture_default_str();
  cv->add_option("--payoff-refresh", conv.payoff_refresh)->check(CLI::PositiveNumber)->capture_default_str();
  cv->add_option("--mu0", conv.mu0, "'uniform' or a distribution JSON")->capture_default_str();
  cv->add_option("--out", conv.out, "output directory")->required();
  cv->callback([&] { action = [&](Session& s) { return cmd_convergence(s, conv); }; });

  FindMsneOpts find;
  auto* fm = app.add_subcommand("find-msne", "best-response search for a stationary equilibrium");
  fm->add_option("config", find.config, "game JSON")->required();
  fm->add_option("--restarts", find.restarts)->capture_default_str();
  fm->add_option("--seed", find.seed)->capture_default_str();
  fm->add_option("--damping", find.damping)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  fm->add_option("--max-iter", find.max_iter)->check(CLI::PositiveNumber)->capture_default_str();
  fm->add_option("--out", find.out, "report JSON")->capture_default_str();
  fm->callback([&] { action = [&](Session& s) { return cmd_find_msne(s, find); }; });

  CheckMsneOpts check;
  auto* cm = app.add_subcommand("check-msne", "verify a candidate equilibrium");
  cm->add_option("config", check.config, "game JSON")->required();
  cm->add_option("--mu", check.mu, "distribution JSON (msne_report.json works)")->required();
  cm->add_option("--payoff-tol", check.tol.payoff, "relative payoff tolerance")->capture_default_str();
  cm->add_option("--stationarity-tol", check.tol.stationarity)->capture_default_str();
  cm->add_option("--mass-tol", check.tol.mass, "mass below which a cell counts as empty")->capture_default_str();
  cm->add_option("--out", check.out, "report JSON (stdout if omitted)");
  cm->callback([&] { action = [&](Session& s) { return cmd_check_msne(s, check); }; });

  DiagnoseOpts diag;
  auto* dg = app.add_subcommand("diagnose", "stability and protocol diagnostics");
  dg->add_option("config", diag.config, "game JSON")->required();
  dg->add_option("kind", diag.kind, "poscorr, ratebound, growth, lyapunov or instability")
      ->required()
      ->check(CLI::IsMember({"poscorr", "ratebound", "growth", "lyapunov", "instability"}));
  add_protocol_options(dg, diag.protocol);
  dg->add_option("--samples", diag.samples, "poscorr samples per n")->capture_default_str();
  dg->add_option("--n-list", diag.n_list, "poscorr policy counts")->capture_default_str();
  dg->add_option("--seed", diag.seed)->capture_default_str();
  dg->add_option("--mu", diag.mu, "distribution JSON (growth point or equilibrium)");
  dg->add_option("--t-end", diag.t_end, "lyapunov horizon, instability time limit")->capture_default_str();
  dg->add_option("--dt", diag.dt)->check(CLI::PositiveNumber)->capture_default_str();
  dg->add_option("--perturbation", diag.perturbation, "lyapunov L1 perturbation size")->capture_default_str();
  dg->add_option("--K", diag.K, "lyapunov off-support weight")->capture_default_str();
  dg->add_option("--runs", diag.runs, "lyapunov perturbations")->capture_default_str();
  dg->add_option("--out", diag.out, "report JSON (stdout if omitted)");
  dg->callback([&] { action = [&](Session& s) { return cmd_diagnose(s, diag); }; });

  MacOpts mac;
  auto* mc = app.add_subcommand("mac", "emit the built-in medium access game");
  mc->add_option("--params", mac.params, "JSON overrides of the default parameters");
  for (std::size_t i = 0; i < kMacFieldCount; ++i) {
    mc->add_option(std::string("--") + kMacFields[i], mac.fields[i], "override one parameter");
  }
  mc->add_flag("--show-defaults", mac.show_defaults, "print the certified default parameters");
  mc->add_option("--out", mac.out, "game JSON (stdout if omitted)");
  mc->callback([&] { action = [&](Session& s) { return cmd_mac(s, mac); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  Session session{out, err, {}, std::nullopt, false};
  session.manifest.arguments = args;
  session.manifest.tool_version = MFG_VERSION;
  session.manifest.command = app.get_subcommands().front()->get_name();
  const auto started = std::chrono::steady_clock::now();
  int code = kExitOk;
  try {
    code = action(session);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = exit_code_for(e);
  }
  session.manifest.exit_code = code;
  session.manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_manifest(session, manifest_path);
  return code;
}

}  // namespace mfg::cli
