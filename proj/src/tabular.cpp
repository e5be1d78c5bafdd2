#include "abx/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace abx {
namespace {

[[noreturn]] void contract(const std::string& what) { throw ContractError(what); }

void require_size(long actual, long expected, const char* what) {
  if (actual != expected) {
    std::ostringstream os;
    os << what << ": expected dimension " << expected << ", got " << actual;
    contract(os.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// FiniteMdp

FiniteMdp::FiniteMdp(int n_states, int n_actions, SparseRows transitions, Vector rewards,
                     double discount, double r_max)
    : n_states_(n_states),
      n_actions_(n_actions),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      discount_(discount),
      r_max_(r_max) {
  if (n_states <= 0 || n_actions <= 0) contract("FiniteMdp: state and action counts must be positive");
  if (!(discount >= 0.0 && discount < 1.0)) contract("FiniteMdp: discount must lie in [0, 1)");
  if (!(r_max >= 0.0)) contract("FiniteMdp: r_max must be non-negative");
  require_size(transitions_.rows(), static_cast<long>(n_states) * n_actions, "FiniteMdp transition rows");
  require_size(transitions_.cols(), n_states, "FiniteMdp transition columns");
  require_size(rewards_.size(), static_cast<long>(n_states) * n_actions, "FiniteMdp rewards");

  transitions_.prune(0.0);
  transitions_.makeCompressed();
  for (int row = 0; row < transitions_.outerSize(); ++row) {
    double total = 0.0;
    for (SparseRows::InnerIterator it(transitions_, row); it; ++it) {
      if (it.value() < 0.0) {
        std::ostringstream os;
        os << "FiniteMdp: negative transition probability in row " << row;
        contract(os.str());
      }
      total += it.value();
    }
    if (std::abs(total - 1.0) > kRowTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "FiniteMdp: transition row " << row << " sums to " << total;
      contract(os.str());
    }
    for (SparseRows::InnerIterator it(transitions_, row); it; ++it) it.valueRef() /= total;
  }
  for (Eigen::Index i = 0; i < rewards_.size(); ++i) {
    double& r = rewards_(i);
    if (!(r >= -kRowTolerance && r <= r_max + kRowTolerance)) {
      std::ostringstream os;
      os << "FiniteMdp: reward " << r << " at flat index " << i << " outside [0, " << r_max << "]";
      contract(os.str());
    }
    r = std::clamp(r, 0.0, r_max);
  }
}

FiniteMdp FiniteMdp::from_dense(const std::vector<std::vector<std::vector<double>>>& transitions,
                                const std::vector<std::vector<double>>& rewards, double discount,
                                double r_max) {
  const int n = static_cast<int>(transitions.size());
  if (n == 0) contract("FiniteMdp::from_dense: empty transition tensor");
  const int m = static_cast<int>(transitions[0].size());
  require_size(static_cast<long>(rewards.size()), n, "FiniteMdp::from_dense rewards");
  std::vector<Eigen::Triplet<double>> triplets;
  Vector r(static_cast<Eigen::Index>(n) * m);
  for (int s = 0; s < n; ++s) {
    require_size(static_cast<long>(transitions[s].size()), m, "FiniteMdp::from_dense actions");
    require_size(static_cast<long>(rewards[s].size()), m, "FiniteMdp::from_dense reward actions");
    for (int a = 0; a < m; ++a) {
      require_size(static_cast<long>(transitions[s][a].size()), n, "FiniteMdp::from_dense row");
      r(s * m + a) = rewards[s][a];
      for (int t = 0; t < n; ++t)
        if (transitions[s][a][t] != 0.0) triplets.emplace_back(s * m + a, t, transitions[s][a][t]);
    }
  }
  SparseRows p(static_cast<Eigen::Index>(n) * m, n);
  p.setFromTriplets(triplets.begin(), triplets.end());
  return FiniteMdp(n, m, std::move(p), std::move(r), discount, r_max);
}

// ---------------------------------------------------------------------------
// Policy / NormalizedSr

Policy::Policy(Matrix probabilities) : probabilities_(std::move(probabilities)) {
  if (probabilities_.rows() == 0 || probabilities_.cols() == 0) contract("Policy: empty table");
  for (Eigen::Index s = 0; s < probabilities_.rows(); ++s) {
    if ((probabilities_.row(s).array() < 0.0).any()) contract("Policy: negative action probability");
    const double total = probabilities_.row(s).sum();
    if (std::abs(total - 1.0) > kRowTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "Policy: row " << s << " sums to " << total;
      contract(os.str());
    }
    probabilities_.row(s) /= total;
  }
}

Policy Policy::deterministic(const std::vector<int>& actions, int n_actions) {
  Matrix p = Matrix::Zero(static_cast<Eigen::Index>(actions.size()), n_actions);
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] < 0 || actions[s] >= n_actions) contract("Policy::deterministic: action out of range");
    p(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
  }
  return Policy(std::move(p));
}

Policy Policy::uniform(int n_states, int n_actions) {
  return Policy(Matrix::Constant(n_states, n_actions, 1.0 / n_actions));
}

NormalizedSr::NormalizedSr(Vector weights, SrKind kind, double tolerance)
    : weights_(std::move(weights)), kind_(kind) {
  if (weights_.size() == 0) contract("NormalizedSr: empty weight vector");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!(weights_(i) >= -tolerance)) contract("NormalizedSr: negative weight");
    weights_(i) = std::max(weights_(i), 0.0);
  }
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > tolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "NormalizedSr: weights sum to " << total;
    contract(os.str());
  }
  weights_ /= total;
}

NormalizedSr NormalizedSr::point(int size, int index, SrKind kind) {
  if (index < 0 || index >= size) contract("NormalizedSr::point: index out of range");
  Vector w = Vector::Zero(size);
  w(index) = 1.0;
  return NormalizedSr(std::move(w), kind);
}

NormalizedSr NormalizedSr::uniform(int size, SrKind kind) {
  return NormalizedSr(Vector::Constant(size, 1.0 / size), kind);
}

// ---------------------------------------------------------------------------
// Solvers

int iteration_cap(double tol, double discount, double scale) {
  if (discount <= 0.0 || scale <= 0.0) return 10;
  const double n = std::ceil(std::log(tol * (1.0 - discount) / scale) / std::log(discount));
  return 10 * std::max(1, static_cast<int>(n));
}

FiniteMrp induce_mrp(const FiniteMdp& mdp, const Policy& policy) {
  require_size(policy.n_states(), mdp.n_states(), "induce_mrp policy states");
  require_size(policy.n_actions(), mdp.n_actions(), "induce_mrp policy actions");
  const int n = mdp.n_states();
  const int m = mdp.n_actions();
  FiniteMrp mrp;
  mrp.rewards = Vector::Zero(n);
  mrp.discount = mdp.discount();
  mrp.r_max = mdp.r_max();
  std::vector<Eigen::Triplet<double>> triplets;
  const auto& p = mdp.transitions();
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < m; ++a) {
      const double w = policy(s, a);
      if (w == 0.0) continue;
      mrp.rewards(s) += w * mdp.reward(s, a);
      for (SparseRows::InnerIterator it(p, s * m + a); it; ++it)
        triplets.emplace_back(s, static_cast<int>(it.col()), w * it.value());
    }
  }
  mrp.transitions.resize(n, n);
  mrp.transitions.setFromTriplets(triplets.begin(), triplets.end());
  mrp.transitions.makeCompressed();
  return mrp;
}

Vector evaluate_mrp(const FiniteMrp& mrp, double tol) {
  if (!(tol > 0.0)) contract("evaluate_mrp: tolerance must be positive");
  const int cap = iteration_cap(tol, mrp.discount, mrp.v_max());
  Vector v = Vector::Zero(mrp.n_states());
  double residual = 0.0;
  for (int it = 0; it < cap; ++it) {
    Vector next = mrp.rewards + mrp.discount * (mrp.transitions * v);
    residual = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    if (residual <= tol) return v;
  }
  throw ConvergenceError("policy evaluation did not converge within the iteration cap", residual);
}

Vector policy_evaluation(const FiniteMdp& mdp, const Policy& policy, double tol) {
  return evaluate_mrp(induce_mrp(mdp, policy), tol);
}

Vector q_from_values(const FiniteMdp& mdp, const Vector& values) {
  require_size(values.size(), mdp.n_states(), "q_from_values");
  return mdp.rewards() + mdp.discount() * (mdp.transitions() * values);
}

Vector action_values(const FiniteMdp& mdp, const Policy& policy, double tol) {
  return q_from_values(mdp, policy_evaluation(mdp, policy, tol));
}

Policy greedy_policy(const Vector& f, int n_states, int n_actions) {
  require_size(f.size(), static_cast<long>(n_states) * n_actions, "greedy_policy");
  std::vector<int> actions(n_states, 0);
  for (int s = 0; s < n_states; ++s) {
    int best = 0;
    for (int a = 1; a < n_actions; ++a)
      if (f(s * n_actions + a) > f(s * n_actions + best)) best = a;
    actions[s] = best;
  }
  return Policy::deterministic(actions, n_actions);
}

namespace {

Vector max_over_actions(const Vector& q, int n_states, int n_actions) {
  Vector v(n_states);
  for (int s = 0; s < n_states; ++s) v(s) = q.segment(static_cast<Eigen::Index>(s) * n_actions, n_actions).maxCoeff();
  return v;
}

}  // namespace

OptimalSolution optimal_policy(const FiniteMdp& mdp, double tol) {
  if (!(tol > 0.0)) contract("optimal_policy: tolerance must be positive");
  const int n = mdp.n_states();
  const int m = mdp.n_actions();
  const int cap = iteration_cap(tol, mdp.discount(), mdp.v_max());
  Vector v = Vector::Zero(n);
  double residual = 0.0;
  for (int it = 0; it < cap; ++it) {
    Vector next = max_over_actions(q_from_values(mdp, v), n, m);
    residual = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    if (residual <= tol) {
      Vector q = q_from_values(mdp, v);
      Policy pi = greedy_policy(q, n, m);
      return {std::move(pi), std::move(v), std::move(q)};
    }
  }
  throw ConvergenceError("value iteration did not converge within the iteration cap", residual);
}

double discounted_return(const FiniteMdp& mdp, const Policy& policy, const NormalizedSr& d0, double tol) {
  require_size(d0.size(), mdp.n_states(), "discounted_return start distribution");
  return d0.weights().dot(policy_evaluation(mdp, policy, tol));
}

NormalizedSr normalized_sr(const FiniteMrp& mrp, const NormalizedSr& d0, double tol) {
  if (!(tol > 0.0)) contract("normalized_sr: tolerance must be positive");
  require_size(d0.size(), mrp.n_states(), "normalized_sr start distribution");
  const double g = mrp.discount;
  const int cap = iteration_cap(tol, g, 1.0);
  const Vector base = (1.0 - g) * d0.weights();
  Vector d = d0.weights();
  double residual = 0.0;
  for (int it = 0; it < cap; ++it) {
    Vector next = base + g * (mrp.transitions.transpose() * d);
    residual = (next - d).cwiseAbs().sum();
    d = std::move(next);
    if (residual <= tol) return NormalizedSr(std::move(d), SrKind::kState);
  }
  throw ConvergenceError("normalized SR did not converge within the iteration cap", residual);
}

NormalizedSr normalized_sr(const FiniteMdp& mdp, const Policy& policy, const NormalizedSr& d0, SrKind kind,
                           double tol) {
  NormalizedSr states = normalized_sr(induce_mrp(mdp, policy), d0, tol);
  if (kind == SrKind::kState) return states;
  return expand_state_action(states, policy);
}

NormalizedSr expand_state_action(const NormalizedSr& state_sr, const Policy& policy) {
  require_size(state_sr.size(), policy.n_states(), "expand_state_action");
  const int n = policy.n_states();
  const int m = policy.n_actions();
  Vector w(static_cast<Eigen::Index>(n) * m);
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < m; ++a) w(s * m + a) = state_sr(s) * policy(s, a);
  return NormalizedSr(std::move(w), SrKind::kStateAction);
}

NormalizedSr marginal_states(const NormalizedSr& state_action_sr, int n_actions) {
  if (state_action_sr.size() % n_actions != 0) contract("marginal_states: size not divisible by action count");
  const int n = state_action_sr.size() / n_actions;
  Vector w = Vector::Zero(n);
  for (int i = 0; i < state_action_sr.size(); ++i) w(i / n_actions) += state_action_sr(i);
  return NormalizedSr(std::move(w), SrKind::kState);
}

// ---------------------------------------------------------------------------
// Norms and operators

double weighted_l1_norm(const Vector& weights, const Vector& v) {
  require_size(v.size(), weights.size(), "weighted_l1_norm vector");
  return weights.dot(v.cwiseAbs());
}

double weighted_l1_norm(const NormalizedSr& weights, const Vector& v) {
  return weighted_l1_norm(weights.weights(), v);
}

double weighted_l1_norm(const Vector& weights, const Matrix& m) {
  require_size(m.rows(), weights.size(), "weighted_l1_norm matrix rows");
  return weights.dot(m.cwiseAbs().rowwise().sum());
}

double weighted_l1_norm(const Vector& weights, const SparseRows& m) {
  require_size(m.rows(), weights.size(), "weighted_l1_norm matrix rows");
  double total = 0.0;
  for (int row = 0; row < m.outerSize(); ++row) {
    if (weights(row) == 0.0) continue;
    double row_norm = 0.0;
    for (SparseRows::InnerIterator it(m, row); it; ++it) row_norm += std::abs(it.value());
    total += weights(row) * row_norm;
  }
  return total;
}

double weighted_l1_norm(const NormalizedSr& weights, const Matrix& m) {
  return weighted_l1_norm(weights.weights(), m);
}

double weighted_l1_norm(const NormalizedSr& weights, const SparseRows& m) {
  return weighted_l1_norm(weights.weights(), m);
}

Vector policy_average(const Vector& f, const Policy& policy) {
  const int n = policy.n_states();
  const int m = policy.n_actions();
  require_size(f.size(), static_cast<long>(n) * m, "policy_average");
  Vector nu(n);
  for (int s = 0; s < n; ++s) {
    double acc = 0.0;
    for (int a = 0; a < m; ++a) acc += policy(s, a) * f(s * m + a);
    nu(s) = acc;
  }
  return nu;
}

Vector bellman_apply(const FiniteMdp& mdp, const Policy& policy, const Vector& f) {
  require_size(policy.n_states(), mdp.n_states(), "bellman_apply policy states");
  require_size(policy.n_actions(), mdp.n_actions(), "bellman_apply policy actions");
  require_size(f.size(), mdp.indexer().size(), "bellman_apply vector");
  return mdp.rewards() + mdp.discount() * (mdp.transitions() * policy_average(f, policy));
}

}  // namespace abx
