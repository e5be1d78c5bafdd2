#pragma once

#include <cstddef>
#include <vector>

#include "abx/pomdp.hpp"
#include "abx/tabular.hpp"

namespace abx {

/// Observation-action history (o_0, a_1, o_1, ..., a_t, o_t).
struct History {
  int first_observation = -1;
  std::vector<std::pair<int, int>> steps;  // (action, observation)

  std::size_t length() const { return steps.size(); }
  int last_observation() const { return steps.empty() ? first_observation : steps.back().second; }

  friend bool operator==(const History&, const History&) = default;
};

/// Canonical order: length, then observation ids (o_0 first), then action ids.
bool history_less(const History& a, const History& b);

inline constexpr std::size_t kDefaultHistoryCap = 5'000'000;

/// Truncated history MDP. State 0 is an absorbing zero-reward sink that
/// receives terminal and beyond-horizon mass; states 1.. are the reachable
/// histories in canonical order.
struct HistoryMdp {
  FiniteMdp mdp;
  std::vector<History> histories;           // [0] is a placeholder for the sink
  std::vector<LatentDistribution> beliefs;  // [0] empty
  int horizon = 0;
  NormalizedSr start;

  static constexpr int kSink = 0;

  int size() const { return mdp.n_states(); }
  int n_histories() const { return size() - 1; }
  /// Index of `h`, or -1 when it was not enumerated.
  int index_of(const History& h) const;
};

/// Breadth-first enumeration of every history with positive probability under
/// `d0` up to length `horizon`. Transitions out of length-`horizon` histories
/// go to the sink. Throws CapacityError when more than `cap` histories arise.
HistoryMdp enumerate_histories(const GenerativePomdp& pomdp, const LatentDistribution& d0, int horizon,
                               std::size_t cap = kDefaultHistoryCap);

}  // namespace abx
