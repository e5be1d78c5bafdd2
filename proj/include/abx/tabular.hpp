#pragma once

// Exact tabular MDP/MRP machinery: policy evaluation, control, normalized
// successor representations, distribution-weighted norms and the
// state-action Bellman operator.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <vector>

#include "abx/errors.hpp"

namespace abx {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Row-major sparse matrix; each row is one (state, action) or one state.
using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr double kRowTolerance = 1e-12;
inline constexpr double kDefaultTolerance = 1e-10;

/// Bijection between (state, action) pairs and flat indices,
/// flat = state * n_actions + action.
struct StateActionIndexer {
  int n_states = 0;
  int n_actions = 0;

  int size() const { return n_states * n_actions; }
  int flat(int state, int action) const { return state * n_actions + action; }
  int state(int flat_index) const { return flat_index / n_actions; }
  int action(int flat_index) const { return flat_index % n_actions; }
};

/// Finite MDP with state-action indexed transition rows and rewards.
///
/// Rows are validated to within kRowTolerance on construction and then
/// renormalized once; rewards must lie in [0, r_max].
class FiniteMdp {
 public:
  FiniteMdp(int n_states, int n_actions, SparseRows transitions, Vector rewards, double discount,
            double r_max);

  /// Dense convenience constructor: transitions[s][a][s'], rewards[s][a].
  static FiniteMdp from_dense(const std::vector<std::vector<std::vector<double>>>& transitions,
                              const std::vector<std::vector<double>>& rewards, double discount,
                              double r_max);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  StateActionIndexer indexer() const { return {n_states_, n_actions_}; }
  const SparseRows& transitions() const { return transitions_; }
  const Vector& rewards() const { return rewards_; }
  double reward(int state, int action) const { return rewards_(state * n_actions_ + action); }
  double discount() const { return discount_; }
  double r_max() const { return r_max_; }
  double v_max() const { return r_max_ / (1.0 - discount_); }

 private:
  int n_states_;
  int n_actions_;
  SparseRows transitions_;
  Vector rewards_;
  double discount_;
  double r_max_;
};

/// Stationary stochastic policy; row s is a distribution over actions.
class Policy {
 public:
  explicit Policy(Matrix probabilities);

  static Policy deterministic(const std::vector<int>& actions, int n_actions);
  static Policy uniform(int n_states, int n_actions);

  int n_states() const { return static_cast<int>(probabilities_.rows()); }
  int n_actions() const { return static_cast<int>(probabilities_.cols()); }
  double operator()(int state, int action) const { return probabilities_(state, action); }
  const Matrix& probabilities() const { return probabilities_; }

 private:
  Matrix probabilities_;
};

/// Markov reward process induced by fixing a policy in an MDP.
struct FiniteMrp {
  SparseRows transitions;  // n_states x n_states
  Vector rewards;
  double discount = 0.0;
  double r_max = 0.0;

  int n_states() const { return static_cast<int>(rewards.size()); }
  double v_max() const { return r_max / (1.0 - discount); }
};

enum class SrKind { kState, kStateAction };

/// Probability vector of discounted visitation frequencies (or any
/// probability weighting used by the weighted norms).
class NormalizedSr {
 public:
  /// Validates non-negativity and unit mass within `tolerance`, then
  /// renormalizes.
  NormalizedSr(Vector weights, SrKind kind, double tolerance = 1e-9);

  static NormalizedSr point(int size, int index, SrKind kind = SrKind::kState);
  static NormalizedSr uniform(int size, SrKind kind = SrKind::kState);

  const Vector& weights() const { return weights_; }
  SrKind kind() const { return kind_; }
  int size() const { return static_cast<int>(weights_.size()); }
  double operator()(int i) const { return weights_(i); }

 private:
  Vector weights_;
  SrKind kind_;
};

/// Fixed-point iteration cap: 10 * ceil(log(tol (1 - gamma) / scale) / log gamma).
int iteration_cap(double tol, double discount, double scale);

FiniteMrp induce_mrp(const FiniteMdp& mdp, const Policy& policy);

/// Value of an MRP to Bellman residual `tol` (sup norm).
Vector evaluate_mrp(const FiniteMrp& mrp, double tol = kDefaultTolerance);

/// v^pi with ||v - (r^pi + gamma P^pi v)||_inf <= tol.
Vector policy_evaluation(const FiniteMdp& mdp, const Policy& policy,
                         double tol = kDefaultTolerance);

/// Flat Q-values r + gamma P v for a state value vector v.
Vector q_from_values(const FiniteMdp& mdp, const Vector& values);

/// Q^pi, flat over state-action pairs.
Vector action_values(const FiniteMdp& mdp, const Policy& policy,
                     double tol = kDefaultTolerance);

/// Deterministic policy argmax_a f(k(s, a)); ties go to the lowest action.
Policy greedy_policy(const Vector& f, int n_states, int n_actions);

struct OptimalSolution {
  Policy policy;
  Vector values;
  Vector q_values;
};

/// Value iteration to Bellman-optimality residual `tol`, greedy extraction.
OptimalSolution optimal_policy(const FiniteMdp& mdp, double tol = kDefaultTolerance);

/// J(pi, d0) = d0 . v^pi.
double discounted_return(const FiniteMdp& mdp, const Policy& policy, const NormalizedSr& d0,
                         double tol = kDefaultTolerance);

/// (1 - gamma) sum_{t>=1} gamma^{t-1} Pr(s_t) with s_1 ~ d0, solved as the
/// fixed point of d = (1 - gamma) d0 + gamma (P^pi)^T d to L1 residual tol.
NormalizedSr normalized_sr(const FiniteMdp& mdp, const Policy& policy, const NormalizedSr& d0,
                           SrKind kind, double tol = kDefaultTolerance);

/// Normalized SR of an MRP (state kind).
NormalizedSr normalized_sr(const FiniteMrp& mrp, const NormalizedSr& d0,
                           double tol = kDefaultTolerance);

/// sum_i w(i) |v(i)|
double weighted_l1_norm(const Vector& weights, const Vector& v);
double weighted_l1_norm(const NormalizedSr& weights, const Vector& v);

/// sum_i w(i) ||M(i)||_1
double weighted_l1_norm(const Vector& weights, const Matrix& m);
double weighted_l1_norm(const Vector& weights, const SparseRows& m);
double weighted_l1_norm(const NormalizedSr& weights, const Matrix& m);
double weighted_l1_norm(const NormalizedSr& weights, const SparseRows& m);

/// nu(f, pi)(s) = sum_a pi(a|s) f(k(s, a)).
Vector policy_average(const Vector& f, const Policy& policy);

/// (B^pi f)(k(s,a)) = r(k(s,a)) + gamma P(k(s,a)) nu(f, pi).
Vector bellman_apply(const FiniteMdp& mdp, const Policy& policy, const Vector& f);

/// State-action SR expanded from a state SR: d(k(s,a)) = d_S(s) pi(a|s).
NormalizedSr expand_state_action(const NormalizedSr& state_sr, const Policy& policy);

/// Sum of state-action weights per state.
NormalizedSr marginal_states(const NormalizedSr& state_action_sr, int n_actions);

}  // namespace abx
