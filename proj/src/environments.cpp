#include "abx/environments.hpp"

#include <algorithm>
#include <cstdlib>

namespace abx {

namespace {

constexpr std::int64_t kDx[4] = {0, 0, -1, 1};
constexpr std::int64_t kDy[4] = {1, -1, 0, 0};

}  // namespace

int manhattan(const LatentState& s) { return static_cast<int>(std::llabs(s[0]) + std::llabs(s[1])); }

GenerativePomdp warm_cold(const WarmColdConfig& config) {
  using namespace warm_cold_ids;
  if (config.train_radius < 1) throw ContractError("warm_cold: train radius must be at least 1");
  for (int d : config.test_distances)
    if (d < 1) throw ContractError("warm_cold: test distances must be at least 1");
  if (config.start_observation != kStart && config.start_observation != kCold)
    throw ContractError("warm_cold: start observation must be START or C");

  GenerativePomdp p;
  p.id = "warm_cold";
  p.action_names = {"up", "down", "left", "right"};
  p.observation_names = {"W", "C", "START"};
  p.discount = config.discount;
  p.r_max = 1.0;
  p.terminal = [](const LatentState& s) { return s[0] == 0 && s[1] == 0; };
  p.transition = [](const LatentState& s, int a) -> LatentDistribution {
    return {{LatentState{s[0] + kDx[a], s[1] + kDy[a], a}, 1.0}};
  };
  p.reward = [](const LatentState& s, int a) {
    const bool enters = (s[0] != 0 || s[1] != 0) && s[0] + kDx[a] == 0 && s[1] + kDy[a] == 0;
    return enters ? 1.0 : 0.0;
  };
  const int start_obs = config.start_observation;
  p.observe = [start_obs](const LatentState& s) -> ObservationDistribution {
    if (s[2] < 0) return {{start_obs, 1.0}};
    const LatentState prev{s[0] - kDx[s[2]], s[1] - kDy[s[2]], -1};
    return {{manhattan(s) < manhattan(prev) ? kWarm : kCold, 1.0}};
  };
  return p;
}

std::vector<LatentState> warm_cold_ring(int distance) {
  std::vector<LatentState> out;
  for (std::int64_t x = -distance; x <= distance; ++x) {
    const std::int64_t rest = distance - std::llabs(x);
    out.push_back({x, -rest, -1});
    if (rest != 0) out.push_back({x, rest, -1});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<LatentState> warm_cold_ball(int radius) {
  std::vector<LatentState> out;
  for (int d = 1; d <= radius; ++d) {
    auto ring = warm_cold_ring(d);
    out.insert(out.end(), ring.begin(), ring.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> warm_cold_optimal_actions(const LatentState& s) {
  std::vector<int> out;
  const int here = manhattan(s);
  for (int a = 0; a < 4; ++a)
    if (manhattan(LatentState{s[0] + kDx[a], s[1] + kDy[a], a}) < here) out.push_back(a);
  return out;
}

// ---------------------------------------------------------------------------

GenerativePomdp sign_chain(const SignChainConfig& config) {
  using namespace sign_chain_ids;
  if (config.train_left < 1 || config.train_right < 1) throw ContractError("sign_chain: train offsets must be positive");
  if (config.test_left <= config.train_left || config.test_right <= config.train_right)
    throw ContractError("sign_chain: test offsets must be strictly farther than train offsets");

  GenerativePomdp p;
  p.id = "sign_chain";
  p.action_names = {"left", "right"};
  p.observation_names = {"LEFT_SIGN", "RIGHT_SIGN", "BLANK", "GOAL"};
  p.discount = config.discount;
  p.r_max = 1.0;
  p.terminal = [](const LatentState& s) { return s[1] == 0; };
  p.transition = [](const LatentState& s, int a) -> LatentDistribution {
    const std::int64_t next = s[1] + (a == kLeft ? -1 : 1);
    if (next == 0) return {{LatentState{0, 0, 0}, 1.0}};
    return {{LatentState{s[0], next, 0}, 1.0}};
  };
  p.reward = [](const LatentState& s, int a) {
    return s[1] != 0 && s[1] + (a == kLeft ? -1 : 1) == 0 ? 1.0 : 0.0;
  };
  p.observe = [config](const LatentState& s) -> ObservationDistribution {
    if (s[1] == 0) return {{kGoal, 1.0}};
    const bool train = s[0] == kTrainLane;
    const int left_post = train ? config.train_left : config.test_left;
    const int right_post = train ? config.train_right : config.test_right;
    if (s[1] == -left_post) return {{kRightSign, 1.0}};
    if (s[1] == right_post) return {{kLeftSign, 1.0}};
    return {{kBlank, 1.0}};
  };
  return p;
}

std::vector<LatentState> sign_chain_starts(const SignChainConfig& config, bool train) {
  using namespace sign_chain_ids;
  if (train) return {{kTrainLane, -config.train_left, 0}, {kTrainLane, config.train_right, 0}};
  return {{kTestLane, -config.test_left, 0}, {kTestLane, config.test_right, 0}};
}

std::vector<int> sign_chain_optimal_actions(const LatentState& s) {
  if (s[1] < 0) return {sign_chain_ids::kRight};
  if (s[1] > 0) return {sign_chain_ids::kLeft};
  return {};
}

int sign_chain_distance(const LatentState& s) { return static_cast<int>(std::llabs(s[1])); }

// ---------------------------------------------------------------------------

FiniteMdp chain(const ChainConfig& config) {
  if (config.length < 2) throw ContractError("chain: length must be at least 2");
  if (!(config.p > 0.0 && config.p <= 1.0)) throw ContractError("chain: p must lie in (0, 1]");
  const int n = config.length;
  std::vector<Eigen::Triplet<double>> triplets;
  Vector rewards = Vector::Zero(2 * n);
  triplets.emplace_back(chain_ids::kLeft, 0, 1.0);
  triplets.emplace_back(chain_ids::kRight, 0, 1.0);
  for (int s = 1; s < n; ++s) {
    const int left = s * 2 + chain_ids::kLeft;
    triplets.emplace_back(left, s - 1, config.p);
    if (config.p < 1.0) triplets.emplace_back(left, s, 1.0 - config.p);
    triplets.emplace_back(s * 2 + chain_ids::kRight, s, 1.0);
  }
  rewards(1 * 2 + chain_ids::kLeft) = config.p;
  SparseRows p(2 * n, n);
  p.setFromTriplets(triplets.begin(), triplets.end());
  return FiniteMdp(n, 2, std::move(p), std::move(rewards), config.discount, 1.0);
}

AbstractionFn chain_abstraction(const ChainConfig& config) {
  std::vector<int> map(static_cast<std::size_t>(config.length), 1);
  map[0] = 0;
  return AbstractionFn::from_table(std::move(map), "goal_vs_rest");
}

Policy chain_always_left(const ChainConfig& config) {
  return Policy::deterministic(std::vector<int>(static_cast<std::size_t>(config.length), chain_ids::kLeft), 2);
}

NormalizedSr chain_start(const ChainConfig& config) { return NormalizedSr::point(config.length, config.length - 1); }

}  // namespace abx
