#include <gtest/gtest.h>

#include <random>
#include <set>

#include "builders.hpp"
#include "mfg/errors.hpp"
#include "mfg/game.hpp"
#include "mfg/mac.hpp"
#include "oracles.hpp"

namespace mfg {
namespace {

using testing::make_game;
using testing::make_subpop;

TEST(EnumeratePolicies, SingletonFeasibleSetsGiveOnePolicy) {
  auto sub = make_subpop("x", 3, 2);
  for (auto& f : sub.feasible) f = {1};
  const auto policies = enumerate_policies(sub);
  ASSERT_EQ(policies.size(), 1u);
  EXPECT_EQ(policies[0].choice, (std::vector<int>{1, 1, 1}));
}

TEST(EnumeratePolicies, ProductCountInLexicographicOrder) {
  auto sub = make_subpop("x", 2, 3);
  sub.feasible = {{0, 2}, {0, 1, 2}};
  const auto policies = enumerate_policies(sub);
  ASSERT_EQ(policies.size(), 6u);
  const std::vector<std::vector<int>> expected = {{0, 0}, {0, 1}, {0, 2}, {2, 0}, {2, 1}, {2, 2}};
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(policies[i].choice, expected[i]);
}

TEST(EnumeratePolicies, NoDuplicatesAndProductSizeOnRandomGames) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const GameSpec g = oracle::random_game(seed);
    for (const auto& sub : g.subpops) {
      const auto policies = enumerate_policies(sub);
      std::size_t product = 1;
      for (const auto& f : sub.feasible) product *= f.size();
      EXPECT_EQ(policies.size(), product);
      std::set<std::vector<int>> unique;
      for (const auto& u : policies) {
        unique.insert(u.choice);
        for (std::size_t s = 0; s < sub.num_states(); ++s) EXPECT_TRUE(sub.is_feasible(s, u(s)));
      }
      EXPECT_EQ(unique.size(), policies.size());
    }
  }
}

TEST(EnumeratePolicies, CapRaisesPolicyExplosion) {
  const auto sub = make_subpop("x", 4, 4);  // 256 policies
  EXPECT_THROW(enumerate_policies(sub, 255), PolicyExplosion);
  EXPECT_EQ(enumerate_policies(sub, 256).size(), 256u);
  GameSpec g = make_game({sub});
  g.policy_cap = 100;
  EXPECT_THROW(enumerate_policies(g), PolicyExplosion);
}

TEST(EnumeratePolicies, MacGameHasTheFourBatteryPolicies) {
  const GameSpec g = build_mac(default_params());
  const auto policies = enumerate_policies(g);
  ASSERT_EQ(policies[0].size(), 4u);
  // (AF, F) choices of u1..u4: (L,L), (L,H), (H,L), (H,H).
  const int expected[4][2] = {{kMacLow, kMacLow}, {kMacLow, kMacHigh}, {kMacHigh, kMacLow}, {kMacHigh, kMacHigh}};
  for (std::size_t u = 0; u < 4; ++u) {
    EXPECT_EQ(policies[0][u](kMacEmpty), kMacNone);
    EXPECT_EQ(policies[0][u](kMacAlmostEmpty), kMacLow);
    EXPECT_EQ(policies[0][u](kMacAlmostFull), expected[u][0]);
    EXPECT_EQ(policies[0][u](kMacFull), expected[u][1]);
  }
}

class ProjectionTest : public ::testing::Test {
 protected:
  GameSpec game = make_game({make_subpop("x", 2, 2)});
  GamePolicies policies = enumerate_policies(game);
};

TEST_F(ProjectionTest, SinglePolicyMassLandsOnItsAction) {
  StatePolicyDist mu = zero_distribution(game, policies);
  // policy index 2 is (a1, a0): state 0 plays a1.
  mu[0](0, 2) = 0.3;
  mu[0](1, 2) = 0.7;
  const StateActionDist sa = project_state_action(game, policies, mu);
  EXPECT_DOUBLE_EQ(sa[0](0, 1), 0.3);
  EXPECT_DOUBLE_EQ(sa[0](0, 0), 0.0);
  EXPECT_DOUBLE_EQ(sa[0](1, 0), 0.7);
  EXPECT_DOUBLE_EQ(sa[0](1, 1), 0.0);
}

TEST_F(ProjectionTest, AgreeingPoliciesAdd) {
  StatePolicyDist mu = zero_distribution(game, policies);
  // policies 0 = (a0,a0) and 1 = (a0,a1) agree at state 0.
  mu[0](0, 0) = 0.2;
  mu[0](0, 1) = 0.1;
  mu[0](1, 3) = 0.7;
  const StateActionDist sa = project_state_action(game, policies, mu);
  EXPECT_DOUBLE_EQ(sa[0](0, 0), 0.2 + 0.1);
}

TEST(Projection, PreservesMassOnRandomGames) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const GameSpec g = oracle::random_game(seed);
    const GamePolicies pol = enumerate_policies(g);
    const StatePolicyDist mu = oracle::random_distribution(g, pol, seed, 0.3);
    const StateActionDist sa = project_state_action(g, pol, mu);
    for (std::size_t c = 0; c < g.num_subpops(); ++c) {
      EXPECT_NEAR(sa[c].sum(), mu[c].sum(), 1e-14);
      for (std::size_t s = 0; s < g.subpops[c].num_states(); ++s) {
        EXPECT_NEAR(sa[c].row(static_cast<Eigen::Index>(s)).sum(),
                    mu[c].row(static_cast<Eigen::Index>(s)).sum(), 1e-14);
        for (std::size_t a = 0; a < g.subpops[c].num_actions(); ++a) {
          if (!g.subpops[c].is_feasible(s, static_cast<int>(a))) {
            EXPECT_EQ(sa[c](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)), 0.0);
          }
        }
      }
    }
  }
}

TEST(EvaluateReward, AffineWithoutWeightsIsTheBase) {
  auto sub = make_subpop("x", 2, 2);
  testing::affine(sub).base << 1.5, -2.0, 0.25, 3.0;
  const GameSpec g = make_game({sub});
  const GamePolicies pol = enumerate_policies(g);
  const StateActionDist sa = project_state_action(g, pol, uniform_distribution(g, pol));
  EXPECT_EQ(evaluate_reward(g, 0, 0, 1, sa), -2.0);
  EXPECT_EQ(evaluate_reward(g, 0, 1, 0, sa), 0.25);
}

TEST(EvaluateReward, InfeasibleActionThrows) {
  auto sub = make_subpop("x", 2, 2);
  sub.feasible[1] = {0};
  const GameSpec g = make_game({sub});
  const GamePolicies pol = enumerate_policies(g);
  const StateActionDist sa = project_state_action(g, pol, uniform_distribution(g, pol));
  EXPECT_THROW(evaluate_reward(g, 0, 1, 1, sa), InfeasibleAction);
}

TEST(EvaluateReward, MacNoTransmissionEarnsNothing) {
  const GameSpec g = build_mac(default_params());
  const GamePolicies pol = enumerate_policies(g);
  const StateActionDist sa = project_state_action(g, pol, uniform_distribution(g, pol));
  EXPECT_EQ(evaluate_reward(g, 0, kMacEmpty, kMacNone, sa), 0.0);
}

TEST(EvaluateReward, MacWithoutInterferenceIsPowerOverNoiseMinusPrice) {
  const MacParams p = default_params();
  const GameSpec g = build_mac(p);
  StateActionDist sa;
  sa.blocks.push_back(Matrix::Zero(4, 3));
  sa[0](kMacEmpty, kMacNone) = 1.0;  // all mass silent
  EXPECT_NEAR(evaluate_reward(g, 0, kMacFull, kMacHigh, sa), p.P_H / p.sigma2 - p.beta_price * p.P_H, 1e-12);
  EXPECT_NEAR(evaluate_reward(g, 0, kMacAlmostEmpty, kMacLow, sa), p.P_L / p.sigma2 - p.beta_price * p.P_L, 1e-12);
}

TEST(EvaluateReward, AffineRewardIsLipschitzWithRowSumConstant) {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const GameSpec g = oracle::random_game(seed);
    const GamePolicies pol = enumerate_policies(g);
    for (int k = 0; k < 10; ++k) {
      const auto a = oracle::random_distribution(g, pol, rng(), 0.2);
      const auto b = oracle::random_distribution(g, pol, rng(), 0.2);
      const StateActionDist sa = project_state_action(g, pol, a);
      const StateActionDist sb = project_state_action(g, pol, b);
      double dist = 0.0;
      for (std::size_t c = 0; c < g.num_subpops(); ++c) dist += (sa[c] - sb[c]).cwiseAbs().sum();
      for (std::size_t c = 0; c < g.num_subpops(); ++c) {
        const double L = affine_lipschitz_constant(std::get<AffineCongestion>(g.subpops[c].reward));
        for (std::size_t s = 0; s < g.subpops[c].num_states(); ++s) {
          for (int act : g.subpops[c].feasible[s]) {
            const double diff = std::abs(evaluate_reward(g, c, s, act, sa) - evaluate_reward(g, c, s, act, sb));
            EXPECT_LE(diff, L * dist + 1e-12);
          }
        }
      }
    }
  }
}

TEST(RewardBounds, MagnitudeBoundCoversSampledRewards) {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const GameSpec g = oracle::random_game(seed);
    const GamePolicies pol = enumerate_policies(g);
    const double bound = reward_magnitude_bound(g);
    for (int k = 0; k < 10; ++k) {
      const StateActionDist sa = project_state_action(g, pol, oracle::random_distribution(g, pol, rng(), 0.5));
      for (std::size_t c = 0; c < g.num_subpops(); ++c) {
        for (std::size_t s = 0; s < g.subpops[c].num_states(); ++s) {
          for (int act : g.subpops[c].feasible[s]) {
            EXPECT_LE(std::abs(evaluate_reward(g, c, s, act, sa)), bound + 1e-12);
          }
        }
      }
    }
  }
  const GameSpec mac = build_mac(default_params());
  const GamePolicies mp = enumerate_policies(mac);
  const StateActionDist sa = project_state_action(mac, mp, uniform_distribution(mac, mp));
  EXPECT_LE(std::abs(evaluate_reward(mac, 0, kMacFull, kMacHigh, sa)), reward_magnitude_bound(mac));
}

TEST(Distributions, UniformAndZeroHelpers) {
  const GameSpec g = oracle::random_game(3);
  const GamePolicies pol = enumerate_policies(g);
  const StatePolicyDist u = uniform_distribution(g, pol);
  EXPECT_TRUE(is_valid_distribution(g, u));
  for (std::size_t c = 0; c < g.num_subpops(); ++c) {
    EXPECT_NEAR(u[c].sum(), g.subpops[c].mass, 1e-14);
    EXPECT_NEAR(u[c].maxCoeff(), u[c].minCoeff(), 1e-15);
  }
  EXPECT_FALSE(is_valid_distribution(g, zero_distribution(g, pol)));
  StatePolicyDist neg = u;
  neg[0](0, 0) = -1e-3;
  neg[0](0, neg[0].cols() - 1) += 1e-3 + u[0](0, 0);
  EXPECT_FALSE(is_valid_distribution(g, neg));
}

TEST(Distributions, FlattenRoundTripAndMetrics) {
  const GameSpec g = oracle::random_game(4);
  const GamePolicies pol = enumerate_policies(g);
  const StatePolicyDist a = oracle::random_distribution(g, pol, 1);
  const StatePolicyDist b = oracle::random_distribution(g, pol, 2);
  const StatePolicyDist back = StatePolicyDist::unflatten(a.flatten(), a);
  EXPECT_EQ(back.l1_distance(a), 0.0);
  EXPECT_NEAR(a.l1_distance(b), (a.flatten() - b.flatten()).cwiseAbs().sum(), 1e-14);
  EXPECT_NEAR(a.policy_marginal(0).sum(), g.subpops[0].mass, 1e-14);
}

}  // namespace
}  // namespace mfg
