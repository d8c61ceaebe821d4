#include "mfg/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

constexpr double kTieTol = 1e-9;
constexpr std::size_t kPureProfileCap = 100000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

StationaryTable stationary_or_throw(const GameSpec& game, const GamePolicies& policies) {
  try {
    return stationary_table(game, policies);
  } catch (const NotIrreducible& e) {
    throw AssumptionViolated(std::string("every policy kernel must be irreducible: ") + e.what());
  }
}

MarginalPolicyDist uniform_marginals(const GameSpec& game, const GamePolicies& policies) {
  MarginalPolicyDist x;
  for (std::size_t c = 0; c < game.num_subpops(); ++c) {
    const auto n = static_cast<Eigen::Index>(policies[c].size());
    x.push_back(Vector::Constant(n, game.subpops[c].mass / static_cast<double>(n)));
  }
  return x;
}

MarginalPolicyDist random_marginals(const GameSpec& game, const GamePolicies& policies,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  MarginalPolicyDist x;
  for (std::size_t c = 0; c < game.num_subpops(); ++c) {
    const auto n = static_cast<Eigen::Index>(policies[c].size());
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = expo(rng);
    x.push_back(v * (game.subpops[c].mass / v.sum()));
  }
  return x;
}

struct Attempt {
  MarginalPolicyDist x;
  std::size_t iterations = 0;
  bool settled = false;
};

Attempt iterate(const PayoffEvaluator& evaluator, const StationaryTable& eta,
                MarginalPolicyDist x, const SolverOptions& opt) {
  const auto& game = evaluator.game();
  Attempt out;
  std::size_t calm = 0;
  for (std::size_t k = 0; k < opt.max_iter; ++k) {
    const std::vector<Vector> scores = policy_scores(evaluator, x, eta);
    double step = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      const Vector& sc = scores[c];
      const double best = sc.maxCoeff();
      const double scale = std::max(1.0, sc.cwiseAbs().maxCoeff());
      Vector b = (sc.array() >= best - kTieTol * scale).cast<double>().matrix();
      b *= game.subpops[c].mass / b.sum();
      const Vector next = (1.0 - opt.damping) * x[c] + opt.damping * b;
      step = std::max(step, (next - x[c]).cwiseAbs().maxCoeff());
      x[c] = next;
    }
    out.iterations = k + 1;
    calm = step < opt.tol ? calm + 1 : 0;
    if (calm >= opt.patience) {
      out.settled = true;
      break;
    }
  }
  if (out.settled) {
    // Geometric tails of abandoned policies are rounded away.
    for (std::size_t c = 0; c < x.size(); ++c) {
      const double m = game.subpops[c].mass;
      x[c] = (x[c].array() < opt.tol * std::max(1.0, m)).select(0.0, x[c]);
      x[c] *= m / x[c].sum();
    }
  }
  out.x = std::move(x);
  return out;
}

}  // namespace

MsneVerdict check_msne(const GameSpec& game, const GamePolicies& policies,
                       const StatePolicyDist& mu, const MsneTolerances& tol) {
  const PayoffEvaluator evaluator(game, policies);
  const PayoffTable F = evaluator.evaluate(mu);
  MsneVerdict v;
  v.tolerances = tol;
  v.scale = std::max(1.0, F.max_abs());
  for (std::size_t c = 0; c < mu.num_subpops(); ++c) {
    const Matrix& m = mu[c];
    Matrix residual(m.rows(), m.cols());
    for (Eigen::Index u = 0; u < m.cols(); ++u) {
      const Matrix& P = evaluator.kernel(c, static_cast<std::size_t>(u));
      residual.col(u) = (m.col(u) - P.transpose() * m.col(u)).cwiseAbs();
    }
    for (Eigen::Index s = 0; s < m.rows(); ++s) {
      const Vector Fs = F.at_state(c, static_cast<std::size_t>(s));
      const double best = Fs.maxCoeff();
      for (Eigen::Index u = 0; u < m.cols(); ++u) {
        const auto cs = static_cast<std::size_t>(s);
        const auto cu = static_cast<std::size_t>(u);
        if (m(s, u) > tol.mass && Fs(u) < best - tol.payoff * v.scale) {
          v.optimality.push_back({c, cs, cu, m(s, u), best - Fs(u)});
        }
        if (residual(s, u) > tol.stationarity) {
          v.stationarity.push_back({c, cs, cu, residual(s, u)});
        }
      }
    }
    if (residual.size() > 0) {
      v.max_stationarity_residual = std::max(v.max_stationarity_residual, residual.maxCoeff());
    }
    v.stationarity_residual.push_back(std::move(residual));
  }
  v.pass = v.optimality.empty() && v.stationarity.empty();
  return v;
}

StrictVerdict check_strict_msne(const GameSpec& game, const GamePolicies& policies,
                                const StatePolicyDist& mu, const MsneTolerances& tol) {
  const MsneVerdict base = check_msne(game, policies, mu, tol);
  if (!base.pass) throw NotMsne("distribution is not an MSNE at the given tolerances");
  const PayoffTable F = payoff_table(game, policies, mu);

  StrictVerdict out;
  out.strict = true;
  for (std::size_t c = 0; c < mu.num_subpops(); ++c) {
    const Vector marginal = mu.policy_marginal(c);
    std::vector<std::size_t> supported;
    for (Eigen::Index u = 0; u < marginal.size(); ++u) {
      if (marginal(u) > tol.mass) supported.push_back(static_cast<std::size_t>(u));
    }
    if (supported.size() != 1) {
      out.support.emplace_back();
      out.gaps.push_back(0.0);
      out.min_gap = std::min(out.min_gap, 0.0);
      out.strict = false;
      continue;
    }
    const auto star = static_cast<Eigen::Index>(supported.front());
    out.support.emplace_back(supported.front());
    double gap = std::numeric_limits<double>::infinity();
    const Matrix& V = F.values(c);
    for (Eigen::Index s = 0; s < V.cols(); ++s) {
      for (Eigen::Index v = 0; v < V.rows(); ++v) {
        if (v != star) gap = std::min(gap, V(star, s) - V(v, s));
      }
    }
    out.gaps.push_back(gap);
    out.min_gap = std::min(out.min_gap, gap);
    if (!(gap > tol.payoff * base.scale)) out.strict = false;
  }
  return out;
}

StatePolicyDist assemble_mu(const MarginalPolicyDist& x, const StationaryTable& eta) {
  if (x.size() != eta.size()) throw PreconditionError("assemble_mu: subpopulation count mismatch");
  StatePolicyDist mu;
  for (std::size_t c = 0; c < x.size(); ++c) {
    if (static_cast<std::size_t>(x[c].size()) != eta[c].size() || eta[c].empty()) {
      throw PreconditionError("assemble_mu: policy count mismatch");
    }
    const Eigen::Index p = eta[c].front().size();
    Matrix block(p, x[c].size());
    for (Eigen::Index u = 0; u < x[c].size(); ++u) {
      block.col(u) = x[c](u) * eta[c][static_cast<std::size_t>(u)];
    }
    mu.blocks.push_back(std::move(block));
  }
  return mu;
}

std::vector<Vector> policy_scores(const PayoffEvaluator& evaluator, const MarginalPolicyDist& x,
                                  const StationaryTable& eta) {
  const PayoffTable F = evaluator.evaluate(assemble_mu(x, eta));
  std::vector<Vector> scores;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const Matrix& V = F.values(c);
    scores.push_back(V.rowwise().mean());
  }
  return scores;
}

namespace {

SolverResult finish(const GameSpec& game, const GamePolicies& policies, const StationaryTable& eta,
                    Attempt attempt, const MsneTolerances& tol) {
  SolverResult r;
  r.candidate = assemble_mu(attempt.x, eta);
  r.x = std::move(attempt.x);
  r.iterations = attempt.iterations;
  r.verdict = check_msne(game, policies, r.candidate, tol);
  r.converged = r.verdict.pass;
  return r;
}

void check_options(const SolverOptions& opt) {
  if (!(opt.damping > 0.0 && opt.damping <= 1.0)) {
    throw PreconditionError("solver damping must lie in (0,1]");
  }
  if (opt.max_iter < 1) throw PreconditionError("solver max_iter must be >= 1");
}

}  // namespace

SolverResult solve_msne(const GameSpec& game, const GamePolicies& policies,
                        const SolverOptions& options) {
  check_options(options);
  const StationaryTable eta = stationary_or_throw(game, policies);
  const PayoffEvaluator evaluator(game, policies);
  SolverResult result = finish(game, policies, eta,
                               iterate(evaluator, eta, uniform_marginals(game, policies), options),
                               options.check);
  for (std::size_t r = 1; r <= options.restarts && !result.converged; ++r) {
    const auto start = random_marginals(game, policies, splitmix64(options.seed + r));
    result = finish(game, policies, eta, iterate(evaluator, eta, start, options), options.check);
    result.restarts_used = r;
  }
  return result;
}

std::vector<SolverResult> solve_msne_all(const GameSpec& game, const GamePolicies& policies,
                                         const SolverOptions& options) {
  check_options(options);
  const StationaryTable eta = stationary_or_throw(game, policies);
  const PayoffEvaluator evaluator(game, policies);
  std::vector<SolverResult> found;
  for (std::size_t r = 0; r <= options.restarts; ++r) {
    const auto start = r == 0 ? uniform_marginals(game, policies)
                              : random_marginals(game, policies, splitmix64(options.seed + r));
    SolverResult res = finish(game, policies, eta, iterate(evaluator, eta, start, options),
                              options.check);
    res.restarts_used = r;
    if (!res.converged) continue;
    const bool seen = std::any_of(found.begin(), found.end(), [&](const SolverResult& f) {
      return f.candidate.l1_distance(res.candidate) < 1e-8;
    });
    if (!seen) found.push_back(std::move(res));
  }
  return found;
}

std::vector<PureCandidate> pure_candidates(const GameSpec& game, const GamePolicies& policies,
                                           const MsneTolerances& tol) {
  const StationaryTable eta = stationary_or_throw(game, policies);
  std::size_t total = 1;
  for (const auto& set : policies) {
    if (set.empty()) return {};
    total *= set.size();
    if (total > kPureProfileCap) throw PolicyExplosion("too many pure profiles to enumerate");
  }
  std::vector<PureCandidate> out;
  std::vector<std::size_t> profile(policies.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    MarginalPolicyDist x;
    for (std::size_t c = 0; c < policies.size(); ++c) {
      Vector v = Vector::Zero(static_cast<Eigen::Index>(policies[c].size()));
      v(static_cast<Eigen::Index>(profile[c])) = game.subpops[c].mass;
      x.push_back(std::move(v));
    }
    PureCandidate cand;
    cand.profile = profile;
    cand.mu = assemble_mu(x, eta);
    cand.verdict = check_msne(game, policies, cand.mu, tol);
    if (cand.verdict.pass) cand.strict = check_strict_msne(game, policies, cand.mu, tol);
    out.push_back(std::move(cand));
    // Odometer, last subpopulation fastest.
    for (std::size_t c = policies.size(); c-- > 0;) {
      if (++profile[c] < policies[c].size()) break;
      profile[c] = 0;
    }
  }
  return out;
}

}  // namespace mfg
