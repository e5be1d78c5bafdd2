#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "abx/rng.hpp"
#include "abx/tabular.hpp"

namespace abx {

/// Opaque symbolic latent state. Environments pack their coordinates into the
/// three slots; equality and ordering are lexicographic.
using LatentState = std::array<std::int64_t, 3>;

/// Sparse distribution over latent states, sorted by state with no duplicates.
using LatentDistribution = std::vector<std::pair<LatentState, double>>;

/// Sparse distribution over observation ids.
using ObservationDistribution = std::vector<std::pair<int, double>>;

/// Sorts, merges duplicates, drops zero masses. Validates unit mass within
/// kRowTolerance and renormalizes.
LatentDistribution make_distribution(std::vector<std::pair<LatentState, double>> entries);

LatentState sample_latent(const LatentDistribution& dist, Rng& rng);
int sample_observation(const ObservationDistribution& dist, Rng& rng);

/// POMDP over a lazily expanded latent space. Observations are emitted by the
/// state entered (including o_0, emitted by the start state). Terminal states
/// are absorbing with zero reward.
struct GenerativePomdp {
  std::string id;
  std::vector<std::string> action_names;
  std::vector<std::string> observation_names;
  double discount = 0.9;
  double r_max = 1.0;
  std::function<LatentDistribution(const LatentState&, int)> transition;
  std::function<double(const LatentState&, int)> reward;
  std::function<ObservationDistribution(const LatentState&)> observe;
  std::function<bool(const LatentState&)> terminal;

  int n_actions() const { return static_cast<int>(action_names.size()); }
  int n_observations() const { return static_cast<int>(observation_names.size()); }
  double v_max() const { return r_max / (1.0 - discount); }
};

struct BeliefUpdate {
  LatentDistribution posterior;
  double marginal = 0.0;
};

/// Bayes posterior over the successor latent state after taking `action` and
/// observing `observation`. Terminal states in `belief` are treated as
/// absorbing. Throws ImpossibleObservationError on a zero marginal.
BeliefUpdate belief_update(const GenerativePomdp& pomdp, const LatentDistribution& belief, int action,
                           int observation);

struct BisimulationResult {
  bool bisimilar = true;
  /// First related pair (m1 index, m2 index) that failed, with the action.
  std::optional<std::pair<int, int>> counterexample;
  int action = -1;
  std::string reason;
};

/// Checks that every related pair agrees on rewards and on the transition
/// mass sent into each class of the equivalence closure of `relation`.
BisimulationResult check_bisimilar(const FiniteMdp& m1, const FiniteMdp& m2,
                                   const std::vector<std::pair<int, int>>& relation,
                                   double tol = 1e-10);

/// Relabels states: state i of `mdp` becomes state permutation[i].
FiniteMdp permute_states(const FiniteMdp& mdp, const std::vector<int>& permutation);

}  // namespace abx
