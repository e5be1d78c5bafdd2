#pragma once

#include <cstdint>
#include <vector>

#include "abx/abstraction.hpp"
#include "abx/history.hpp"
#include "abx/pomdp.hpp"
#include "abx/tabular.hpp"

namespace abx {

inline constexpr double kHoldsTolerance = 1e-8;

/// Decomposed evaluation of one bound instance. Components are already scaled
/// by 1/(1-gamma) and summed over both weightings where applicable, so that
/// bound == sum of components.
struct BoundReport {
  double bound = 0.0;
  double approx_reward = 0.0;
  double approx_transition = 0.0;
  double ood_reward = 0.0;
  double ood_transition = 0.0;
  double unknown_mass = 0.0;
  double known_mass = 0.0;
  double gap = 0.0;
  bool holds = true;
  double slack = 0.0;
};

/// Sets holds and slack from bound and gap.
BoundReport finalize(BoundReport report);

/// (1/(1-gamma)) (eps_r + gamma/2 v_max eps_p).
double simulation_lemma_bound(double eps_r, double eps_p, double gamma, double v_max);

/// Value loss between two MRPs on a common state space. The errors are
/// measured under the normalized SR of `propagating` started from d0; the gap
/// is ||v - v'||_{d0}.
struct MrpLossReport {
  double eps_r = 0.0;
  double eps_p = 0.0;
  BoundReport report;
};
MrpLossReport mrp_value_loss(const FiniteMrp& propagating, const FiniteMrp& other, const NormalizedSr& d0);

/// Learned policy that is near-optimal on `observed` states.
struct LearningOutcome {
  std::vector<char> observed;
  double epsilon = 0.0;
  Policy policy;
};

/// (1/(1-gamma)) (d(obs) eps (r_max + gamma/2 v_max) + d(unk) v_max).
double finite_learning_bound(const std::vector<char>& observed, double epsilon, const NormalizedSr& state_sr,
                             double gamma, double r_max);
/// Bound under `state_sr` together with the gap J(pi*) - J(pi_hat).
BoundReport finite_learning_report(const FiniteMdp& mdp, const LearningOutcome& outcome, const Policy& optimal,
                                   const NormalizedSr& d0, const NormalizedSr& state_sr);

/// Bellman-residual bound on J(pi) - J(pi_f) where pi_f is greedy on f.
BoundReport telescoping_gap_bound(const FiniteMdp& mdp, const Vector& f, const Policy& pi, const NormalizedSr& d0);

/// Performance loss of the lifted abstract-optimal policy.
struct ModelReductionReport {
  BoundReport report;
  /// Same bound with the errors replaced by their maxima over all rows.
  double max_norm_bound = 0.0;
  Policy abstract_policy;  // lifted to the ground MDP
};
ModelReductionReport model_reduction_bound(const FiniteMdp& ground, const AbstractMdp& abstract,
                                           const NormalizedSr& d0);

/// Out-of-distribution bound on the truncated test history MDP. Keys are
/// interned in a codebook shared by the train and test history MDPs; abstract
/// states present on one side only become absorbing on the other.
struct OodReport {
  BoundReport report;
  int n_abstract = 0;
  int n_train_histories = 0;
  int n_test_histories = 0;
};
OodReport ood_generalization_bound(const GenerativePomdp& pomdp, const LatentDistribution& d0_train,
                                   const LatentDistribution& d0_test, const HistoryKeyFn& key, int horizon,
                                   std::size_t cap = kDefaultHistoryCap);

/// 1/|S|^|A| + (1 - S) eps + S + B with S = (|S|-1)/(T+|S|-1).
double corollary_expression(int s_phi, int n_actions, int T, double eps, double B);

/// n(n-1)/(T+n-1); T = 0 gives n.
double dirichlet_expected_unseen(int n, int T);

struct DirichletCheck {
  double monte_carlo_mean = 0.0;
  double standard_error = 0.0;
  double formula = 0.0;
};
DirichletCheck dirichlet_unknown_mass_check(int n, int T, int samples, std::uint64_t seed);

struct ScalingRow {
  int s_phi = 0;
  double eps_r = 0.0;
  double eps_p = 0.0;
};
/// Weighted reduction errors for each abstraction, aggregating with and
/// measuring under the same state-action weights.
std::vector<ScalingRow> approx_error_scaling_probe(const FiniteMdp& ground, const std::vector<AbstractionFn>& family,
                                                   const NormalizedSr& weights);

}  // namespace abx
