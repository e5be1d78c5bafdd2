#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "abx/environments.hpp"
#include "abx/history.hpp"

using namespace abx;
namespace wc = abx::warm_cold_ids;
namespace sc = abx::sign_chain_ids;

namespace {

LatentState single(const LatentDistribution& d) {
  EXPECT_EQ(d.size(), 1u);
  return d.front().first;
}

int single_obs(const ObservationDistribution& d) {
  EXPECT_EQ(d.size(), 1u);
  return d.front().first;
}

}  // namespace

TEST(WarmCold, StepIntoGoal) {
  const auto p = warm_cold(WarmColdConfig{});
  const LatentState s{0, 1, -1};
  const LatentState next = single(p.transition(s, wc::kDown));
  EXPECT_EQ(next, (LatentState{0, 0, wc::kDown}));
  EXPECT_EQ(single_obs(p.observe(next)), wc::kWarm);
  EXPECT_EQ(p.reward(s, wc::kDown), 1.0);
  EXPECT_TRUE(p.terminal(next));
}

TEST(WarmCold, StepAway) {
  const auto p = warm_cold(WarmColdConfig{});
  const LatentState s{2, 0, wc::kUp};
  const LatentState next = single(p.transition(s, wc::kRight));
  EXPECT_EQ(next[0], 3);
  EXPECT_EQ(next[1], 0);
  EXPECT_EQ(single_obs(p.observe(next)), wc::kCold);
  EXPECT_EQ(p.reward(s, wc::kRight), 0.0);
}

TEST(WarmCold, StartObservationKnob) {
  EXPECT_EQ(single_obs(warm_cold(WarmColdConfig{}).observe({3, 0, -1})), wc::kStart);
  WarmColdConfig cfg;
  cfg.start_observation = wc::kCold;
  EXPECT_EQ(single_obs(warm_cold(cfg).observe({3, 0, -1})), wc::kCold);
  cfg.start_observation = wc::kWarm;
  EXPECT_THROW(warm_cold(cfg), ContractError);
}

TEST(WarmCold, EveryStepChangesDistanceByOne) {
  const auto p = warm_cold(WarmColdConfig{});
  for (int x = -5; x <= 5; ++x)
    for (int y = -5; y <= 5; ++y)
      for (int a = 0; a < 4; ++a) {
        const LatentState s{x, y, -1};
        const LatentState n = single(p.transition(s, a));
        EXPECT_EQ(std::abs(manhattan(n) - manhattan(s)), 1);
        EXPECT_EQ(single_obs(p.observe(n)), manhattan(n) < manhattan(s) ? wc::kWarm : wc::kCold);
      }
}

TEST(WarmCold, RingsAndOptimalActions) {
  for (int d = 1; d <= 6; ++d) {
    const auto ring = warm_cold_ring(d);
    EXPECT_EQ(ring.size(), static_cast<std::size_t>(4 * d));
    for (const auto& s : ring) EXPECT_EQ(manhattan(s), d);
  }
  EXPECT_EQ(warm_cold_ball(3).size(), 24u);
  EXPECT_EQ(warm_cold_optimal_actions({2, 0, -1}), std::vector<int>{wc::kLeft});
  EXPECT_EQ(warm_cold_optimal_actions({1, -1, -1}), (std::vector<int>{wc::kUp, wc::kLeft}));
}

TEST(WarmCold, LatticeSymmetry) {
  // Rotation by 90 degrees maps up->left->down->right->up; observations are
  // preserved for every state-action pair in a box.
  const auto p = warm_cold(WarmColdConfig{});
  const int rot[4] = {wc::kLeft, wc::kRight, wc::kDown, wc::kUp};
  auto rotate = [](const LatentState& s) { return LatentState{-s[1], s[0], -1}; };
  for (int x = -4; x <= 4; ++x)
    for (int y = -4; y <= 4; ++y)
      for (int a = 0; a < 4; ++a) {
        const LatentState s{x, y, -1};
        const LatentState n1 = single(p.transition(s, a));
        const LatentState n2 = single(p.transition(rotate(s), rot[a]));
        EXPECT_EQ(rotate(n1)[0], n2[0]);
        EXPECT_EQ(rotate(n1)[1], n2[1]);
        EXPECT_EQ(single_obs(p.observe(n1)), single_obs(p.observe(n2)));
        EXPECT_EQ(p.reward(s, a), p.reward(rotate(s), rot[a]));
      }
}

TEST(SignChain, ObservationsAndOptimalWalk) {
  const SignChainConfig cfg;
  const auto p = sign_chain(cfg);
  const auto train = sign_chain_starts(cfg, true);
  EXPECT_EQ(single_obs(p.observe(train[0])), sc::kRightSign);
  EXPECT_EQ(single_obs(p.observe(train[1])), sc::kLeftSign);
  const auto test = sign_chain_starts(cfg, false);
  EXPECT_EQ(single_obs(p.observe(test[0])), sc::kRightSign);
  EXPECT_EQ(single_obs(p.observe(test[1])), sc::kLeftSign);
  for (const auto& start : {train[0], train[1], test[0], test[1]}) {
    LatentState s = start;
    int steps = 0;
    double reward = 0.0;
    while (!p.terminal(s)) {
      const int a = sign_chain_optimal_actions(s).front();
      reward += p.reward(s, a);
      s = single(p.transition(s, a));
      ++steps;
    }
    EXPECT_EQ(steps, sign_chain_distance(start));
    EXPECT_EQ(reward, 1.0);
    EXPECT_EQ(single_obs(p.observe(s)), sc::kGoal);
  }
  const LatentState blank{sc::kTrainLane, 2, 0};
  EXPECT_EQ(single_obs(p.observe(blank)), sc::kBlank);
}

TEST(SignChain, TrainAndTestReachableSetsDisjointExceptGoal) {
  const SignChainConfig cfg;
  const auto p = sign_chain(cfg);
  auto reachable = [&](const std::vector<LatentState>& starts, int depth) {
    std::set<LatentState> seen(starts.begin(), starts.end());
    std::vector<LatentState> frontier(starts.begin(), starts.end());
    for (int t = 0; t < depth; ++t) {
      std::vector<LatentState> next;
      for (const auto& s : frontier) {
        if (p.terminal(s)) continue;
        for (int a = 0; a < 2; ++a)
          for (const auto& [n, q] : p.transition(s, a))
            if (seen.insert(n).second) next.push_back(n);
      }
      frontier = std::move(next);
    }
    return seen;
  };
  const auto a = reachable(sign_chain_starts(cfg, true), 30);
  const auto b = reachable(sign_chain_starts(cfg, false), 30);
  std::set<LatentState> common;
  for (const auto& s : a)
    if (b.count(s)) common.insert(s);
  EXPECT_EQ(common, (std::set<LatentState>{{0, 0, 0}}));
}

TEST(SignChain, RejectsTestPostsInsideTraining) {
  SignChainConfig cfg;
  cfg.test_left = 5;
  EXPECT_THROW(sign_chain(cfg), ContractError);
}

TEST(Chain, StructureAndGoalInOneStep) {
  const ChainConfig cfg{2, 1.0, 0.9};
  const FiniteMdp mdp = chain(cfg);
  EXPECT_NEAR(mdp.transitions().coeff(1 * 2 + chain_ids::kLeft, 0), 1.0, 1e-15);
  EXPECT_EQ(mdp.reward(1, chain_ids::kLeft), 1.0);
  const ChainConfig cfg10{10, 0.7, 0.9};
  const FiniteMdp m10 = chain(cfg10);
  for (int s = 0; s < 10; ++s) EXPECT_NEAR(m10.transitions().coeff(s * 2 + chain_ids::kRight, s), 1.0, 1e-15);
  EXPECT_NEAR(m10.transitions().coeff(5 * 2 + chain_ids::kLeft, 4), 0.7, 1e-15);
  EXPECT_THROW(chain(ChainConfig{1, 1.0, 0.9}), ContractError);
  EXPECT_THROW(chain(ChainConfig{5, 0.0, 0.9}), ContractError);
}

TEST(Chain, AlwaysLeftSrIsGeometric) {
  const ChainConfig cfg{10, 1.0, 0.9};
  const FiniteMdp mdp = chain(cfg);
  const auto d = normalized_sr(mdp, chain_always_left(cfg), chain_start(cfg), SrKind::kState);
  for (int t = 0; t < 9; ++t) EXPECT_NEAR(d(9 - t), 0.1 * std::pow(0.9, t), 1e-10);
  EXPECT_NEAR(d(0), std::pow(0.9, 9), 1e-10);
  EXPECT_EQ(chain_abstraction(cfg).map(), (std::vector<int>{0, 1, 1, 1, 1, 1, 1, 1, 1, 1}));
}
