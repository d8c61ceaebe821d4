#include "mfg/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mfg/errors.hpp"

namespace mfg {

std::string_view protocol_name(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::ImitativePPI: return "imitative";
    case ProtocolKind::BNN: return "bnn";
    case ProtocolKind::Smith: return "smith";
  }
  return "unknown";
}

ProtocolKind parse_protocol(std::string_view name) {
  if (name == "imitative") return ProtocolKind::ImitativePPI;
  if (name == "bnn") return ProtocolKind::BNN;
  if (name == "smith") return ProtocolKind::Smith;
  throw ConfigError("unknown protocol '" + std::string(name) + "' (expected imitative, bnn or smith)");
}

Vector excess_payoff(const Vector& F, const Vector& sigma) {
  const double total = sigma.sum();
  if (!(total > 0.0)) return Vector::Zero(F.size());
  return F.array() - F.dot(sigma) / total;
}

double conditional_imitation_rate(const ProtocolSpec& p, const Vector& F, Eigen::Index u,
                                  Eigen::Index v) {
  return p.rate_scale * std::max(0.0, F(v) - F(u));
}

void switch_rate_row(const ProtocolSpec& p, const Vector& F, const Vector& sigma,
                     const Vector& excess, Eigen::Index u, Vector& row) {
  const auto n = F.size();
  row.resize(n);
  switch (p.kind) {
    case ProtocolKind::ImitativePPI: {
      const double total = sigma.sum();
      if (!(total > 0.0)) {
        row.setZero();
        break;
      }
      for (Eigen::Index v = 0; v < n; ++v) {
        row(v) = conditional_imitation_rate(p, F, u, v) * sigma(v) / total;
      }
      break;
    }
    case ProtocolKind::BNN:
      for (Eigen::Index v = 0; v < n; ++v) row(v) = p.rate_scale * std::max(0.0, excess(v));
      break;
    case ProtocolKind::Smith:
      for (Eigen::Index v = 0; v < n; ++v) row(v) = p.rate_scale * std::max(0.0, F(v) - F(u));
      break;
  }
  row(u) = 0.0;
}

Matrix switch_rates(const ProtocolSpec& p, const Vector& F, const Vector& sigma) {
  const auto n = F.size();
  const Vector excess = p.kind == ProtocolKind::BNN ? excess_payoff(F, sigma) : Vector();
  Matrix rho(n, n);
  Vector row;
  for (Eigen::Index u = 0; u < n; ++u) {
    switch_rate_row(p, F, sigma, excess, u, row);
    rho.row(u) = row.transpose();
  }
  return rho;
}

Vector net_flow(const ProtocolSpec& p, const Vector& F, const Vector& sigma) {
  const Matrix rho = switch_rates(p, F, sigma);
  const auto n = F.size();
  Vector V = Vector::Zero(n);
  // Each pairwise flow is added to the receiver and removed from the sender,
  // so the components telescope to zero.
  for (Eigen::Index from = 0; from < n; ++from) {
    for (Eigen::Index to = 0; to < n; ++to) {
      if (from == to) continue;
      const double flow = sigma(from) * rho(from, to);
      V(to) += flow;
      V(from) -= flow;
    }
  }
  return V;
}

double worst_case_switch_rate(const ProtocolSpec& p, double payoff_bound, std::size_t n) {
  if (n <= 1) return 0.0;
  return static_cast<double>(n - 1) * p.rate_scale * 2.0 * payoff_bound;
}

BoundReport check_rate_bound(const GameSpec& game, const ProtocolSpec& p) {
  BoundReport report;
  report.reward_bound = reward_magnitude_bound(game);
  report.payoff_bound = game.beta * report.reward_bound / (1.0 - game.beta);
  report.passed = true;
  const GamePolicies policies = enumerate_policies(game);
  for (std::size_t c = 0; c < game.subpops.size(); ++c) {
    const auto& sub = game.subpops[c];
    SubpopBound b;
    b.name = sub.name;
    b.revision_rate = sub.revision_rate;
    b.minimal_revision_rate = worst_case_switch_rate(p, report.payoff_bound, policies[c].size());
    b.bound = b.minimal_revision_rate / sub.revision_rate;
    b.passed = b.bound <= 1.0;
    report.passed = report.passed && b.passed;
    report.subpops.push_back(std::move(b));
  }
  return report;
}

ProbeReport positive_correlation_probe(const ProtocolSpec& p, std::size_t n, std::size_t samples,
                                       std::uint64_t seed) {
  if (samples < 1) throw PreconditionError("positive_correlation_probe needs samples >= 1");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  ProbeReport report;
  report.samples = samples;
  report.min_inner_product = std::numeric_limits<double>::infinity();
  const auto dim = static_cast<Eigen::Index>(n);
  Vector sigma(dim);
  Vector F(dim);
  for (std::size_t k = 0; k < samples; ++k) {
    // Uniform on the corner simplex: n+1 exponential spacings, last one dropped.
    double total = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) total += sigma(i) = expo(rng);
    total += expo(rng);
    sigma /= total;
    for (Eigen::Index i = 0; i < dim; ++i) F(i) = normal(rng);

    const Vector V = net_flow(p, F, sigma);
    if (V.cwiseAbs().maxCoeff() > 1e-9) {
      ++report.nonzero_flows;
      const double inner = V.dot(F);
      report.min_inner_product = std::min(report.min_inner_product, inner);
      if (!(inner > 1e-12)) ++report.violations;
    }
  }
  if (report.nonzero_flows == 0) report.min_inner_product = 0.0;
  return report;
}

}  // namespace mfg
