#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mfg/game.hpp"

namespace mfg {

enum class ProtocolKind {
  ImitativePPI,  // pairwise proportional imitation
  BNN,           // Brown-von Neumann-Nash, separable excess payoff
  Smith,         // pairwise comparison
};

struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::ImitativePPI;
  double rate_scale = 1.0;  // kappa > 0
};

/// "imitative", "bnn" or "smith".
std::string_view protocol_name(ProtocolKind kind);
/// Inverse of protocol_name(); throws ConfigError on unknown names.
ProtocolKind parse_protocol(std::string_view name);

/// F - 1 (F.sigma)/(1.sigma), or zeros when sigma sums to zero.
Vector excess_payoff(const Vector& F, const Vector& sigma);

/// Conditional imitation rate of ImitativePPI: kappa * max(0, F_v - F_u).
double conditional_imitation_rate(const ProtocolSpec& p, const Vector& F, Eigen::Index u,
                                  Eigen::Index v);

/// Switch-rate matrix rho[u][v] at payoffs F and state-conditional masses
/// sigma. The diagonal is zero.
Matrix switch_rates(const ProtocolSpec& p, const Vector& F, const Vector& sigma);

/// Row u of switch_rates() without building the whole matrix. `excess` must
/// hold excess_payoff(F, sigma) for BNN and is ignored otherwise.
void switch_rate_row(const ProtocolSpec& p, const Vector& F, const Vector& sigma,
                     const Vector& excess, Eigen::Index u, Vector& row);

/// V_u = sum_u' sigma_u' rho_u'u - sigma_u sum_u' rho_uu'.
Vector net_flow(const ProtocolSpec& p, const Vector& F, const Vector& sigma);

/// Worst-case sum_{v != u} rho_uv for payoffs bounded by `payoff_bound` in
/// magnitude: (n - 1) * kappa * 2B for every variant.
double worst_case_switch_rate(const ProtocolSpec& p, double payoff_bound, std::size_t n);

struct SubpopBound {
  std::string name;
  double bound = 0.0;             // worst-case sum of rates / Rr
  double revision_rate = 0.0;
  double minimal_revision_rate = 0.0;
  bool passed = false;
};

struct BoundReport {
  double reward_bound = 0.0;  // r_max over the state-action space
  double payoff_bound = 0.0;  // B = beta r_max / (1 - beta)
  std::vector<SubpopBound> subpops;
  bool passed = false;
};

/// Conservative check that switch probabilities rho/Rr stay in [0,1].
/// A pass guarantees well-defined revisions; a fail is only a warning.
BoundReport check_rate_bound(const GameSpec& game, const ProtocolSpec& p);

struct ProbeReport {
  std::size_t samples = 0;
  std::size_t nonzero_flows = 0;
  std::size_t violations = 0;
  double min_inner_product = 0.0;  // over samples with a nonzero flow
};

/// Samples (sigma, F) with sigma uniform on {sigma >= 0, sum sigma <= 1} and F
/// standard normal, and counts samples where ||V||_inf > 1e-9 but V.F <= 1e-12.
ProbeReport positive_correlation_probe(const ProtocolSpec& p, std::size_t n, std::size_t samples,
                                       std::uint64_t seed);

}  // namespace mfg
