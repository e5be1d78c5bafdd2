#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "abx/abstraction.hpp"
#include "abx/environments.hpp"
#include "abx/history.hpp"
#include "abx/pomdp.hpp"

namespace abx {

using OptimalActionsFn = std::function<std::vector<int>(const LatentState&)>;

/// Map from history key to per-action optimal-action counts. Keys are stored
/// in a packed byte encoding; counts live in one flat arena.
class PolicyDictionary {
 public:
  PolicyDictionary() = default;
  explicit PolicyDictionary(int n_actions) : n_actions_(n_actions) {}

  int n_actions() const { return n_actions_; }
  std::size_t size() const { return index_.size(); }
  bool empty() const { return index_.empty(); }

  /// Adds one to the count of each action in `actions` under `key`.
  void add(const HistoryKey& key, const std::vector<int>& actions);
  /// Count row for `key`, or nullptr when absent.
  const std::uint32_t* find(const HistoryKey& key) const;
  /// Every stored key in sorted order (decoded).
  std::vector<HistoryKey> keys() const;

  static std::string encode(const HistoryKey& key);

 private:
  int n_actions_ = 0;
  std::unordered_map<std::string, std::uint32_t> index_;  // packed key -> arena offset
  std::vector<std::uint32_t> counts_;
};

/// Enumerates every reachable history of length <= horizon from each start
/// and credits the optimal actions of each non-terminal latent state under
/// the history's key.
PolicyDictionary build_policy_dictionary(const GenerativePomdp& pomdp, const std::vector<LatentState>& starts,
                                         int horizon, const HistoryKeyFn& key, const OptimalActionsFn& optimal,
                                         std::size_t cap = 50'000'000);

struct RolloutRecord {
  std::string environment;
  std::string abstraction;
  LatentState start{};
  int start_index = 0;
  int repeat = 0;
  int steps = 0;
  bool reached_goal = false;
  int mistakes_total = 0;
  int mistakes_known_key = 0;
  int mistakes_missing_key = 0;
  std::uint64_t seed = 0;
};

struct RolloutSpec {
  int walks_per_start = 5;
  int max_steps = 500;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

/// Walks from every test start; records sorted by (start index, repeat).
std::vector<RolloutRecord> run_rollouts(const GenerativePomdp& pomdp, const PolicyDictionary& dict,
                                        const HistoryKeyFn& key, const std::string& abstraction_id,
                                        const OptimalActionsFn& optimal, const std::vector<LatentState>& test_starts,
                                        const RolloutSpec& spec);

// ---------------------------------------------------------------------------
// Drivers

struct WarmColdExperimentConfig {
  WarmColdConfig env;
  std::vector<int> k_list{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<int> distances{3, 10, 50, 100};
  int walks = 5;
  int max_steps = 500;
  /// Dictionary enumeration depth; 0 uses each k.
  int horizon = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct WarmColdRow {
  int goal_distance = 0;
  int suffix_k = 0;
  RolloutRecord record;
};

/// Rows ordered by (k, distance, start, repeat).
std::vector<WarmColdRow> warm_cold_experiment(const WarmColdExperimentConfig& config);

struct SignChainExperimentConfig {
  SignChainConfig env;
  std::vector<int> distances{6, 8, 10, 15, 20, 25, 30};
  int repeats = 5;
  int max_steps = 500;
  /// Dictionary enumeration depth for the full-history abstraction.
  int horizon = 10;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct SignChainRow {
  std::string abstraction;  // first_obs, full_history or random
  int distance = 0;
  int repeat = 0;
  int optimal_steps = 0;
  int actual_steps = 0;
  double ratio = 0.0;
  std::uint64_t seed = 0;
};

/// One row per (abstraction, distance, repeat): a walk from each test post,
/// ratio = optimal / actual summed over both.
std::vector<SignChainRow> sign_chain_experiment(const SignChainExperimentConfig& config);

struct ChainErrorRow {
  int N = 0;
  double weighted_eps_p = 0.0;
  double max_eps_p = 0.0;
};

std::vector<ChainErrorRow> chain_error_experiment(const std::vector<int>& n_list, double p = 1.0,
                                                  double discount = 0.9);

struct CorollaryRow {
  int s_phi = 0;
  int T = 0;
  double eps = 0.0;
  double B = 0.0;
  double bound = 0.0;
};

std::vector<CorollaryRow> corollary_experiment(const std::vector<int>& t_list, double eps, double B, int n_actions,
                                               const std::vector<int>& s_phi_list);

// ---------------------------------------------------------------------------
// Summaries

struct CellStats {
  int count = 0;
  double mean = 0.0;
  double sem = 0.0;
};

CellStats summarize(const std::vector<double>& values);

}  // namespace abx
