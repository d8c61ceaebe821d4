#include "mfg/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

constexpr double kClampTol = 1e-12;
constexpr double kRejectTol = 1e-6;
constexpr double kDecompositionTol = 1e-10;

// y = a + h * b, blockwise.
StatePolicyDist axpy(const StatePolicyDist& a, double h, const StatePolicyDist& b) {
  StatePolicyDist y = a;
  for (std::size_t c = 0; c < y.num_subpops(); ++c) y[c] += h * b[c];
  return y;
}

}  // namespace

StatePolicyDist VectorFieldParts::total() const {
  StatePolicyDist f = drift;
  for (std::size_t c = 0; c < f.num_subpops(); ++c) f[c] += revision[c];
  return f;
}

MeanDynamics::MeanDynamics(const GameSpec& game, const GamePolicies& policies,
                           const ProtocolSpec& protocol)
    : evaluator_(game, policies), protocol_(protocol) {
  if (!(protocol.rate_scale > 0.0)) throw PreconditionError("rate scale kappa must be > 0");
}

StatePolicyDist MeanDynamics::field(const StatePolicyDist& mu) const { return parts(mu).total(); }

VectorFieldParts MeanDynamics::parts(const StatePolicyDist& mu) const {
  return parts(mu, evaluator_.evaluate(mu));
}

VectorFieldParts MeanDynamics::parts(const StatePolicyDist& mu, const PayoffTable& F) const {
  const auto& game = evaluator_.game();
  VectorFieldParts out;
  out.drift.blocks.resize(mu.num_subpops());
  out.revision.blocks.resize(mu.num_subpops());
  for (std::size_t c = 0; c < mu.num_subpops(); ++c) {
    const Matrix& m = mu[c];
    const double Rd = game.subpops[c].decision_rate;
    Matrix drift(m.rows(), m.cols());
    for (Eigen::Index u = 0; u < m.cols(); ++u) {
      const Matrix& P = evaluator_.kernel(c, static_cast<std::size_t>(u));
      drift.col(u) = Rd * (P.transpose() * m.col(u) - m.col(u));
    }
    Matrix revision(m.rows(), m.cols());
    for (Eigen::Index s = 0; s < m.rows(); ++s) {
      const Vector sigma = m.row(s).transpose();
      revision.row(s) = net_flow(protocol_, F.at_state(c, static_cast<std::size_t>(s)), sigma).transpose();
    }
    out.drift[c] = std::move(drift);
    out.revision[c] = std::move(revision);
  }
  return out;
}

StatePolicyDist vector_field(const GameSpec& game, const GamePolicies& policies,
                             const ProtocolSpec& protocol, const StatePolicyDist& mu) {
  return MeanDynamics(game, policies, protocol).field(mu);
}

VectorFieldParts vector_field_parts(const GameSpec& game, const GamePolicies& policies,
                                    const ProtocolSpec& protocol, const StatePolicyDist& mu) {
  return MeanDynamics(game, policies, protocol).parts(mu);
}

double rest_residual(const GameSpec& game, const GamePolicies& policies,
                     const ProtocolSpec& protocol, const StatePolicyDist& mu) {
  return vector_field(game, policies, protocol, mu).max_abs();
}

Trajectory integrate(const MeanDynamics& dynamics, const StatePolicyDist& mu0,
                     const IntegrateOptions& options) {
  if (!(options.dt > 0.0)) throw PreconditionError("integration step dt must be > 0");
  if (!(options.t_end >= 0.0)) throw PreconditionError("t_end must be >= 0");
  if (options.record_every < 1) throw PreconditionError("record_every must be >= 1");

  std::vector<double> masses(mu0.num_subpops());
  for (std::size_t c = 0; c < mu0.num_subpops(); ++c) masses[c] = mu0[c].sum();

  Trajectory traj;
  traj.metadata.source = "meanfield";
  traj.metadata.protocol = std::string(protocol_name(dynamics.protocol().kind));
  traj.metadata.rate_scale = dynamics.protocol().rate_scale;
  traj.metadata.dt = options.dt;
  traj.times.push_back(0.0);
  traj.snapshots.push_back(mu0);

  auto steps = static_cast<std::size_t>(std::ceil(options.t_end / options.dt - 1e-9));
  GuardStats& guard = traj.metadata.guard;
  StatePolicyDist y = mu0;
  double t = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_next = k == steps ? options.t_end : static_cast<double>(k) * options.dt;
    const double h = t_next - t;
    const StatePolicyDist k1 = dynamics.field(y);
    const StatePolicyDist k2 = dynamics.field(axpy(y, 0.5 * h, k1));
    const StatePolicyDist k3 = dynamics.field(axpy(y, 0.5 * h, k2));
    const StatePolicyDist k4 = dynamics.field(axpy(y, h, k3));
    for (std::size_t c = 0; c < y.num_subpops(); ++c) {
      y[c] += (h / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }

    bool clamped = false;
    for (std::size_t c = 0; c < y.num_subpops(); ++c) {
      Matrix& block = y[c];
      for (Eigen::Index i = 0; i < block.size(); ++i) {
        double& v = block.data()[i];
        if (v >= 0.0) continue;
        if (!std::isfinite(v) || v < -kRejectTol) {
          std::ostringstream os;
          os << "RK4 step rejected at t = " << t_next << ": entry " << v
             << " below -1e-6 (reduce dt)";
          throw StepRejected(os.str());
        }
        if (v < -kClampTol) {
          ++guard.large_clamps;
        } else {
          ++guard.clamped_entries;
        }
        guard.max_correction = std::max(guard.max_correction, -v);
        v = 0.0;
        clamped = true;
      }
      const double total = block.sum();
      if (total > 0.0 && total != masses[c]) {
        guard.max_correction = std::max(guard.max_correction, std::abs(total - masses[c]));
        block *= masses[c] / total;
      }
    }
    if (clamped) ++guard.activations;
    ++guard.steps;
    t = t_next;

    if (k % options.record_every == 0 || k == steps) {
      traj.times.push_back(t);
      traj.snapshots.push_back(y);
    }
    if (options.observer && !options.observer(t, y)) {
      if (traj.times.back() != t) {
        traj.times.push_back(t);
        traj.snapshots.push_back(y);
      }
      break;
    }
  }
  return traj;
}

Trajectory integrate(const GameSpec& game, const GamePolicies& policies,
                     const ProtocolSpec& protocol, const StatePolicyDist& mu0, double t_end,
                     double dt) {
  IntegrateOptions options;
  options.t_end = t_end;
  options.dt = dt;
  return integrate(MeanDynamics(game, policies, protocol), mu0, options);
}

GrowthRateTable growth_rates(const GameSpec& game, const GamePolicies& policies,
                             const ProtocolSpec& protocol, const StatePolicyDist& mu) {
  if (protocol.kind != ProtocolKind::ImitativePPI) {
    throw WrongProtocol("growth rates are defined for the imitative protocol only");
  }
  const MeanDynamics dynamics(game, policies, protocol);
  const PayoffTable F = dynamics.evaluator().evaluate(mu);
  const VectorFieldParts parts = dynamics.parts(mu, F);

  GrowthRateTable table(mu.num_subpops());
  for (std::size_t c = 0; c < mu.num_subpops(); ++c) {
    const Matrix& m = mu[c];
    Matrix G = Matrix::Zero(m.rows(), m.cols());
    for (Eigen::Index s = 0; s < m.rows(); ++s) {
      const Vector sigma = m.row(s).transpose();
      const double total = sigma.sum();
      if (!(total > 0.0)) continue;
      const Vector Fs = F.at_state(c, static_cast<std::size_t>(s));
      for (Eigen::Index u = 0; u < m.cols(); ++u) {
        double g = 0.0;
        for (Eigen::Index w = 0; w < m.cols(); ++w) {
          g += sigma(w) / total *
               (conditional_imitation_rate(protocol, Fs, w, u) -
                conditional_imitation_rate(protocol, Fs, u, w));
        }
        G(s, u) = g;
      }
    }
    const Matrix recomposed = m.cwiseProduct(G);
    const double scale = std::max(1.0, parts.revision[c].cwiseAbs().maxCoeff());
    const double mismatch = (recomposed - parts.revision[c]).cwiseAbs().maxCoeff();
    if (mismatch > kDecompositionTol * scale) {
      throw NumericalFailure("growth-rate decomposition mismatch " + std::to_string(mismatch));
    }
    table[c] = std::move(G);
  }
  return table;
}

LyapunovFunction::LyapunovFunction(const StatePolicyDist& mu_star, double K)
    : mu_star_(mu_star), K_(K) {
  if (!(K > 1.0)) throw PreconditionError("Lyapunov weight K must be > 1");
  for (std::size_t c = 0; c < mu_star.num_subpops(); ++c) {
    const Vector marginal = mu_star.policy_marginal(c);
    Eigen::Index best = 0;
    marginal.maxCoeff(&best);
    support_.push_back(static_cast<std::size_t>(best));
  }
}

double LyapunovFunction::operator()(const StatePolicyDist& mu) const {
  double value = 0.0;
  for (std::size_t c = 0; c < mu.num_subpops(); ++c) {
    const Matrix diff = (mu[c] - mu_star_[c]).cwiseAbs();
    const auto star = static_cast<Eigen::Index>(support_[c]);
    const double on_support = diff.col(star).sum();
    value += on_support + K_ * (diff.sum() - on_support);
  }
  return value;
}

std::vector<LyapunovSample> lyapunov_monitor(const Trajectory& traj,
                                             const StatePolicyDist& mu_star, double K) {
  const LyapunovFunction V(mu_star, K);
  std::vector<LyapunovSample> samples;
  samples.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    samples.push_back({traj.times[i], V(traj.snapshots[i])});
  }
  return samples;
}

}  // namespace mfg
