#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "abx/bounds.hpp"
#include "abx/pomdp.hpp"
#include "abx/rng.hpp"
#include "abx/tabular.hpp"

namespace abx {

// ---------------------------------------------------------------------------
// Random instances

/// Flat-Dirichlet probability vector; with `support` in [1, n] only that many
/// randomly chosen entries are positive.
Vector random_distribution(int n, Rng& rng, int support = 0);
FiniteMdp random_mdp(int n_states, int n_actions, double discount, Rng& rng);
FiniteMrp random_mrp(int n_states, double discount, Rng& rng);
/// Mix of deterministic and stochastic rows.
Policy random_policy(int n_states, int n_actions, Rng& rng);
/// Surjective map onto n_abstract ids, ids in first-occurrence order.
std::vector<int> random_partition(int n_ground, int n_abstract, Rng& rng);
/// POMDP with latent states (i, 0, 0), noisy observations and an optional
/// terminal state.
GenerativePomdp random_pomdp(int n_latent, int n_actions, int n_observations, double discount, Rng& rng);

// ---------------------------------------------------------------------------
// Suites

struct SuiteResult {
  std::string name;
  int trials = 0;
  int violations = 0;
  /// Smallest and largest bound - gap over trials (bound suites only).
  double min_slack = 0.0;
  double max_slack = 0.0;
  /// Largest absolute identity error (identity suites only).
  double max_error = 0.0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  /// Serialized JSON of the first violating trial, empty when none.
  std::string counterexample;
  /// Trials that break the per-action hypothesis form of the simulation
  /// lemma; informational only.
  int per_action_form_failures = 0;
};

inline constexpr double kIdentityTolerance = 1e-12;

SuiteResult simulation_lemma_suite(std::uint64_t seed, int trials, unsigned threads = 0);
SuiteResult mrp_value_loss_suite(std::uint64_t seed, int trials, unsigned threads = 0);
SuiteResult telescoping_suite(std::uint64_t seed, int trials, unsigned threads = 0);
SuiteResult model_reduction_suite(std::uint64_t seed, int trials, unsigned threads = 0);
SuiteResult ood_generalization_suite(std::uint64_t seed, int trials, unsigned threads = 0);
SuiteResult finite_learning_suite(std::uint64_t seed, int trials, unsigned threads = 0);

SuiteResult norm_axioms_suite(std::uint64_t seed, int trials, unsigned threads = 0);
SuiteResult push_forward_suite(std::uint64_t seed, int trials, unsigned threads = 0);
SuiteResult holder_suite(std::uint64_t seed, int trials, unsigned threads = 0);
SuiteResult projection_associativity_suite(std::uint64_t seed, int trials, unsigned threads = 0);
SuiteResult norm_projection_suite(std::uint64_t seed, int trials, unsigned threads = 0);
SuiteResult up_down_suite(std::uint64_t seed, int trials, unsigned threads = 0);

struct DirichletResult {
  int n = 0;
  int T = 0;
  int samples = 0;
  DirichletCheck check;
  bool within_3se = false;
};

struct VerificationReport {
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<SuiteResult> bound_suites;
  std::vector<SuiteResult> identity_suites;
  std::vector<DirichletResult> dirichlet;
  double seconds = 0.0;

  int total_violations() const;
  bool passed() const;
};

VerificationReport verify_bounds_suite(std::uint64_t seed, int trials, unsigned threads = 0,
                                       int dirichlet_samples = 100000);

}  // namespace abx
