#pragma once

#include <vector>

#include "abx/abstraction.hpp"
#include "abx/pomdp.hpp"
#include "abx/tabular.hpp"

namespace abx {

// ---------------------------------------------------------------------------
// Warm-cold lattice. Latent state (x, y, last action or -1); goal at origin.

namespace warm_cold_ids {
inline constexpr int kUp = 0;
inline constexpr int kDown = 1;
inline constexpr int kLeft = 2;
inline constexpr int kRight = 3;
inline constexpr int kWarm = 0;
inline constexpr int kCold = 1;
inline constexpr int kStart = 2;
}  // namespace warm_cold_ids

struct WarmColdConfig {
  int train_radius = 3;
  std::vector<int> test_distances{3, 10, 50, 100};
  double discount = 0.9;
  /// Observation emitted at the start state; kStart by default, kCold as a
  /// sensitivity knob.
  int start_observation = warm_cold_ids::kStart;
};

GenerativePomdp warm_cold(const WarmColdConfig& config);

/// Start states (x, y, -1) with |x| + |y| == distance, in lexicographic order.
std::vector<LatentState> warm_cold_ring(int distance);
/// Start states with 1 <= |x| + |y| <= radius.
std::vector<LatentState> warm_cold_ball(int radius);
/// Actions that strictly decrease Manhattan distance to the origin.
std::vector<int> warm_cold_optimal_actions(const LatentState& s);
int manhattan(const LatentState& s);

// ---------------------------------------------------------------------------
// Sign chain. Latent state (lane, position, 0): lane 0 holds the training
// posts, lane 1 the test posts; both lanes share the goal (0, 0, 0).

namespace sign_chain_ids {
inline constexpr int kLeft = 0;
inline constexpr int kRight = 1;
inline constexpr int kLeftSign = 0;
inline constexpr int kRightSign = 1;
inline constexpr int kBlank = 2;
inline constexpr int kGoal = 3;
inline constexpr std::int64_t kTrainLane = 0;
inline constexpr std::int64_t kTestLane = 1;
}  // namespace sign_chain_ids

struct SignChainConfig {
  int train_left = 5;   // post A at -train_left shows the move-right sign
  int train_right = 5;  // post B at +train_right shows the move-left sign
  int test_left = 10;   // post C
  int test_right = 10;  // post D
  double discount = 0.9;
};

GenerativePomdp sign_chain(const SignChainConfig& config);

/// {A, B} for the training lane, {C, D} for the test lane.
std::vector<LatentState> sign_chain_starts(const SignChainConfig& config, bool train);
/// The single goal-ward action (empty at the goal).
std::vector<int> sign_chain_optimal_actions(const LatentState& s);
int sign_chain_distance(const LatentState& s);

// ---------------------------------------------------------------------------
// Chain: positions 1..N stored at index position-1. Left succeeds with
// probability p, right self-loops; position 1 is absorbing and the reward is
// paid on entering it.

namespace chain_ids {
inline constexpr int kLeft = 0;
inline constexpr int kRight = 1;
}  // namespace chain_ids

struct ChainConfig {
  int length = 10;
  double p = 1.0;
  double discount = 0.9;
};

FiniteMdp chain(const ChainConfig& config);
/// Goal -> 0, every other position -> 1.
AbstractionFn chain_abstraction(const ChainConfig& config);
Policy chain_always_left(const ChainConfig& config);
/// Point mass on position N.
NormalizedSr chain_start(const ChainConfig& config);

}  // namespace abx
