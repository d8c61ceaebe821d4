#include <gtest/gtest.h>

#include <random>

#include "builders.hpp"
#include "mfg/errors.hpp"
#include "mfg/protocols.hpp"
#include "oracles.hpp"

namespace mfg {
namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

const ProtocolSpec kImitative{ProtocolKind::ImitativePPI, 1.0};
const ProtocolSpec kBnn{ProtocolKind::BNN, 1.0};
const ProtocolSpec kSmith{ProtocolKind::Smith, 1.0};

TEST(ProtocolNames, RoundTripAndRejectUnknown) {
  for (auto k : {ProtocolKind::ImitativePPI, ProtocolKind::BNN, ProtocolKind::Smith}) {
    EXPECT_EQ(parse_protocol(protocol_name(k)), k);
  }
  EXPECT_THROW(parse_protocol("logit"), ConfigError);
}

TEST(SwitchRates, SmithPrefersTheBetterPolicy) {
  const Matrix rho = switch_rates(kSmith, vec({0, 1}), vec({0.5, 0.5}));
  EXPECT_EQ(rho(0, 1), 1.0);
  EXPECT_EQ(rho(1, 0), 0.0);
}

TEST(SwitchRates, ConstantPayoffsGiveNoSwitching) {
  const Vector F = vec({2, 2, 2});
  const Vector sigma = vec({0.2, 0.3, 0.1});
  for (const auto& p : {kImitative, kBnn, kSmith}) {
    EXPECT_EQ(switch_rates(p, F, sigma).cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_EQ(excess_payoff(F, sigma).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SwitchRates, BnnHalfAndHalf) {
  const Vector F = vec({0, 1});
  const Vector sigma = vec({0.5, 0.5});
  EXPECT_TRUE(excess_payoff(F, sigma).isApprox(vec({-0.5, 0.5})));
  const Matrix rho = switch_rates(kBnn, F, sigma);
  EXPECT_EQ(rho(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(rho(0, 1), 0.5);
}

TEST(SwitchRates, KappaScalesEveryRate) {
  const Vector F = vec({0.3, -1.2, 0.9, 0.1});
  const Vector sigma = vec({0.1, 0.4, 0.2, 0.05});
  for (auto kind : {ProtocolKind::ImitativePPI, ProtocolKind::BNN, ProtocolKind::Smith}) {
    const Matrix a = switch_rates({kind, 1.0}, F, sigma);
    const Matrix b = switch_rates({kind, 2.5}, F, sigma);
    EXPECT_TRUE(b.isApprox(2.5 * a, 1e-15));
  }
}

TEST(SwitchRates, AgreeWithTheOracleFormulas) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 2 + trial % 5;
    Vector F(n), sigma(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      F(i) = normal(rng);
      sigma(i) = unit(rng) < 0.25 ? 0.0 : unit(rng);
    }
    for (const auto& p : {kImitative, kBnn, kSmith}) {
      const Matrix rho = switch_rates(p, F, sigma);
      for (Eigen::Index u = 0; u < n; ++u) {
        for (Eigen::Index v = 0; v < n; ++v) {
          if (u == v) continue;
          EXPECT_NEAR(rho(u, v),
                      oracle::switch_rate(p, F, sigma, static_cast<std::size_t>(u),
                                          static_cast<std::size_t>(v)),
                      1e-14);
        }
      }
    }
  }
}

class RateInvariants : public ::testing::TestWithParam<std::uint64_t> {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(GetParam());
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(GetParam() % 6);
    F.resize(n);
    sigma.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      F(i) = normal(rng);
      sigma(i) = unit(rng) < 0.3 ? 0.0 : unit(rng);
    }
  }
  Vector F, sigma;
};

TEST_P(RateInvariants, EntriesAreNonnegativeAndFinite) {
  for (const auto& p : {kImitative, kBnn, kSmith}) {
    const Matrix rho = switch_rates(p, F, sigma);
    EXPECT_TRUE(rho.allFinite());
    EXPECT_GE(rho.minCoeff(), 0.0);
  }
}

TEST_P(RateInvariants, NetFlowTelescopes) {
  for (const auto& p : {kImitative, kBnn, kSmith}) {
    EXPECT_LE(std::abs(net_flow(p, F, sigma).sum()), 1e-13);
  }
}

TEST_P(RateInvariants, SmithIsSignPreserving) {
  const Matrix rho = switch_rates(kSmith, F, sigma);
  for (Eigen::Index u = 0; u < F.size(); ++u) {
    for (Eigen::Index v = 0; v < F.size(); ++v) {
      if (u != v) EXPECT_EQ(rho(u, v) > 0.0, F(v) > F(u));
    }
  }
}

TEST_P(RateInvariants, ImitationNeedsARoleModel) {
  const Matrix rho = switch_rates(kImitative, F, sigma);
  for (Eigen::Index v = 0; v < F.size(); ++v) {
    if (sigma(v) == 0.0) EXPECT_EQ(rho.col(v).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST_P(RateInvariants, BnnRatesDoNotDependOnTheSender) {
  const Matrix rho = switch_rates(kBnn, F, sigma);
  const Vector excess = excess_payoff(F, sigma);
  for (Eigen::Index v = 0; v < F.size(); ++v) {
    for (Eigen::Index u = 0; u < F.size(); ++u) {
      if (u != v) EXPECT_EQ(rho(u, v), std::max(0.0, excess(v)));
    }
  }
}

TEST_P(RateInvariants, ExcessPayoffIsOrthogonalToSigma) {
  if (sigma.sum() > 0.0) EXPECT_LE(std::abs(excess_payoff(F, sigma).dot(sigma)), 1e-12);
}

TEST_P(RateInvariants, NetFlowIsPositivelyCorrelated) {
  for (const auto& p : {kImitative, kBnn, kSmith}) {
    const Vector V = net_flow(p, F, sigma);
    if (V.cwiseAbs().maxCoeff() > 1e-9) EXPECT_GT(V.dot(F), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RateInvariants, ::testing::Range<std::uint64_t>(1, 61));

TEST(NetFlow, EmptyStateHasNoFlow) {
  const Vector F = vec({0, 1, 3});
  for (const auto& p : {kImitative, kBnn, kSmith}) {
    EXPECT_EQ(net_flow(p, F, Vector::Zero(3)).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(NetFlow, SmithMovesEverythingTowardTheBetterPolicy) {
  const Vector V = net_flow(kSmith, vec({0, 1}), vec({1, 0}));
  EXPECT_DOUBLE_EQ(V(0), -1.0);
  EXPECT_DOUBLE_EQ(V(1), 1.0);
}

TEST(NetFlow, ConstantPayoffsGiveZero) {
  for (const auto& p : {kImitative, kBnn, kSmith}) {
    EXPECT_EQ(net_flow(p, vec({1, 1, 1}), vec({0.2, 0.5, 0.3})).cwiseAbs().maxCoeff(), 0.0);
  }
}

// One state, three actions, so three policies; constant reward 1 at beta 0.5
// gives the payoff bound B = 1.
GameSpec three_policy_game(double reward, double revision_rate) {
  auto sub = testing::make_subpop("x", 1, 3);
  sub.revision_rate = revision_rate;
  GameSpec g = testing::make_game({sub}, 0.5);
  testing::set_constant_reward(g, reward);
  return g;
}

TEST(RateBound, ZeroRewardAlwaysPasses) {
  for (const auto& p : {kImitative, kBnn, kSmith}) {
    const BoundReport r = check_rate_bound(three_policy_game(0.0, 1e-6), p);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.subpops.front().bound, 0.0);
  }
}

TEST(RateBound, SmithPassesWithRoom) {
  const BoundReport r = check_rate_bound(three_policy_game(1.0, 10.0), kSmith);
  EXPECT_DOUBLE_EQ(r.payoff_bound, 1.0);
  EXPECT_DOUBLE_EQ(r.subpops.front().bound, 0.4);
  EXPECT_TRUE(r.passed);
}

TEST(RateBound, SmithFailsAndReportsTheMinimalRate) {
  const BoundReport r = check_rate_bound(three_policy_game(1.0, 0.1), kSmith);
  EXPECT_FALSE(r.passed);
  EXPECT_DOUBLE_EQ(r.subpops.front().minimal_revision_rate, 4.0);
}

TEST(RateBound, BoundDominatesRealizedRowSums) {
  oracle::RandomGameOptions opt;
  opt.max_states = 3;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const GameSpec g = oracle::random_game(seed, opt);
    const auto pol = enumerate_policies(g);
    const PayoffTable F = payoff_table(g, pol, oracle::random_distribution(g, pol, seed));
    for (const auto& p : {kImitative, kBnn, kSmith}) {
      const BoundReport rep = check_rate_bound(g, p);
      for (std::size_t c = 0; c < g.num_subpops(); ++c) {
        for (std::size_t s = 0; s < g.subpops[c].num_states(); ++s) {
          const Vector sigma = Vector::Ones(static_cast<Eigen::Index>(pol[c].size()));
          const Matrix rho = switch_rates(p, F.at_state(c, s), sigma);
          EXPECT_LE(rho.rowwise().sum().maxCoeff(),
                    rep.subpops[c].minimal_revision_rate * (1.0 + 1e-12));
        }
      }
    }
  }
}

TEST(PositiveCorrelationProbe, NoViolationsForAnyProtocol) {
  for (const auto& p : {kImitative, kBnn, kSmith}) {
    const ProbeReport r = positive_correlation_probe(p, 4, 10000, 11);
    EXPECT_EQ(r.samples, 10000u);
    EXPECT_EQ(r.violations, 0u) << protocol_name(p.kind);
    EXPECT_GT(r.nonzero_flows, 0u);
  }
}

TEST(PositiveCorrelationProbe, RejectsZeroSamples) {
  EXPECT_THROW(positive_correlation_probe(kSmith, 3, 0, 1), PreconditionError);
}

}  // namespace
}  // namespace mfg
