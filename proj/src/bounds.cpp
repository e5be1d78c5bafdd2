#include "abx/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "abx/rng.hpp"

namespace abx {

BoundReport finalize(BoundReport report) {
  report.slack = report.bound - report.gap;
  report.holds = report.gap <= report.bound + kHoldsTolerance;
  return report;
}

double simulation_lemma_bound(double eps_r, double eps_p, double gamma, double v_max) {
  if (eps_r < 0.0 || eps_p < 0.0) throw ContractError("simulation_lemma_bound: errors must be non-negative");
  return (eps_r + 0.5 * gamma * v_max * eps_p) / (1.0 - gamma);
}

MrpLossReport mrp_value_loss(const FiniteMrp& propagating, const FiniteMrp& other, const NormalizedSr& d0) {
  if (propagating.n_states() != other.n_states()) throw ContractError("mrp_value_loss: state counts differ");
  const NormalizedSr d = normalized_sr(propagating, d0);
  MrpLossReport out;
  out.eps_r = weighted_l1_norm(d, Vector(propagating.rewards - other.rewards));
  out.eps_p = weighted_l1_norm(d, SparseRows(propagating.transitions - other.transitions));
  const double v_max = std::max(propagating.v_max(), other.v_max());
  out.report.approx_reward = out.eps_r / (1.0 - propagating.discount);
  out.report.approx_transition = 0.5 * propagating.discount * v_max * out.eps_p / (1.0 - propagating.discount);
  out.report.bound = simulation_lemma_bound(out.eps_r, out.eps_p, propagating.discount, v_max);
  out.report.gap = weighted_l1_norm(d0, Vector(evaluate_mrp(propagating) - evaluate_mrp(other)));
  out.report = finalize(out.report);
  return out;
}

double finite_learning_bound(const std::vector<char>& observed, double epsilon, const NormalizedSr& state_sr,
                             double gamma, double r_max) {
  if (static_cast<int>(observed.size()) != state_sr.size())
    throw ContractError("finite_learning_bound: observed set does not match SR dimension");
  double known = 0.0;
  double unknown = 0.0;
  for (int s = 0; s < state_sr.size(); ++s) (observed[s] ? known : unknown) += state_sr(s);
  const double v_max = r_max / (1.0 - gamma);
  return (known * epsilon * (r_max + 0.5 * gamma * v_max) + unknown * v_max) / (1.0 - gamma);
}

BoundReport finite_learning_report(const FiniteMdp& mdp, const LearningOutcome& outcome, const Policy& optimal,
                                   const NormalizedSr& d0, const NormalizedSr& state_sr) {
  double known = 0.0;
  double unknown = 0.0;
  for (int s = 0; s < state_sr.size(); ++s) (outcome.observed[s] ? known : unknown) += state_sr(s);
  const double g = mdp.discount();
  BoundReport r;
  r.known_mass = known * outcome.epsilon * (mdp.r_max() + 0.5 * g * mdp.v_max()) / (1.0 - g);
  r.unknown_mass = unknown * mdp.v_max() / (1.0 - g);
  r.bound = finite_learning_bound(outcome.observed, outcome.epsilon, state_sr, g, mdp.r_max());
  r.gap = discounted_return(mdp, optimal, d0) - discounted_return(mdp, outcome.policy, d0);
  return finalize(r);
}

BoundReport telescoping_gap_bound(const FiniteMdp& mdp, const Vector& f, const Policy& pi, const NormalizedSr& d0) {
  const Policy pi_f = greedy_policy(f, mdp.n_states(), mdp.n_actions());
  const Vector residual = f - bellman_apply(mdp, pi_f, f);
  const NormalizedSr d_pi = normalized_sr(mdp, pi, d0, SrKind::kStateAction);
  const NormalizedSr d_f = normalized_sr(mdp, pi_f, d0, SrKind::kStateAction);
  BoundReport r;
  r.approx_reward = weighted_l1_norm(d_pi, residual) / (1.0 - mdp.discount());
  r.approx_transition = weighted_l1_norm(d_f, residual) / (1.0 - mdp.discount());
  r.bound = r.approx_reward + r.approx_transition;
  r.gap = discounted_return(mdp, pi, d0) - discounted_return(mdp, pi_f, d0);
  return finalize(r);
}

namespace {

struct Terms {
  double reward = 0.0;
  double transition = 0.0;
};

Terms approximation_terms(const ApproximationErrors& e, const NormalizedSr& d, double gamma, double v_max) {
  return {weighted_l1_norm(d, e.reward) / (1.0 - gamma),
          0.5 * gamma * v_max * weighted_l1_norm(d, e.transition) / (1.0 - gamma)};
}

}  // namespace

ModelReductionReport model_reduction_bound(const FiniteMdp& ground, const AbstractMdp& abstract,
                                           const NormalizedSr& d0) {
  const double g = ground.discount();
  const double v_max = ground.v_max();
  const OptimalSolution star = optimal_policy(ground);
  const OptimalSolution abs_star = optimal_policy(abstract.mdp);
  const Vector f = down_project(abstract.phi, abs_star.q_values, ground.n_actions());
  Policy pi_phi = greedy_policy(f, ground.n_states(), ground.n_actions());

  const ApproximationErrors e = approximation_errors(ground, abstract.phi, abstract.mdp);
  BoundReport r;
  for (const Policy* pi : {&star.policy, static_cast<const Policy*>(&pi_phi)}) {
    const NormalizedSr d = normalized_sr(ground, *pi, d0, SrKind::kStateAction);
    const Terms t = approximation_terms(e, d, g, v_max);
    r.approx_reward += t.reward;
    r.approx_transition += t.transition;
  }
  r.bound = r.approx_reward + r.approx_transition;
  r.gap = discounted_return(ground, star.policy, d0) - discounted_return(ground, pi_phi, d0);
  const double max_norm = 2.0 * (e.reward.maxCoeff() + 0.5 * g * v_max * e.transition.maxCoeff()) / (1.0 - g);
  return {finalize(r), max_norm, std::move(pi_phi)};
}

OodReport ood_generalization_bound(const GenerativePomdp& pomdp, const LatentDistribution& d0_train,
                                   const LatentDistribution& d0_test, const HistoryKeyFn& key, int horizon,
                                   std::size_t cap) {
  const HistoryMdp train = enumerate_histories(pomdp, d0_train, horizon, cap);
  const HistoryMdp test = enumerate_histories(pomdp, d0_test, horizon, cap);
  Codebook book;
  const AbstractionFn phi_train_partial = abstraction_from_keys(train, key, "train", &book);
  const AbstractionFn phi_test = abstraction_from_keys(test, key, "test", &book);
  const AbstractionFn phi_train(phi_train_partial.map(), book.size(), "train");
  const int m = pomdp.n_actions();
  const double g = pomdp.discount;
  const double v_max = test.mdp.v_max();

  const OptimalSolution star_train = optimal_policy(train.mdp);
  const OptimalSolution star_test = optimal_policy(test.mdp);
  const AbstractMdp m_train =
      build_abstract_mdp(train.mdp, phi_train,
                         normalized_sr(train.mdp, star_train.policy, train.start, SrKind::kStateAction),
                         EmptyClassPolicy::kAbsorbing);
  const AbstractMdp m_test =
      build_abstract_mdp(test.mdp, phi_test,
                         normalized_sr(test.mdp, star_test.policy, test.start, SrKind::kStateAction),
                         EmptyClassPolicy::kAbsorbing);

  const OptimalSolution abs_star = optimal_policy(m_train.mdp);
  const Vector f = down_project(phi_test, abs_star.q_values, m);
  const Policy pi_phi = greedy_policy(f, test.size(), m);

  const ApproximationErrors e = approximation_errors(test.mdp, phi_test, m_test.mdp);
  BoundReport r;
  for (const Policy* pi : {&star_test.policy, &pi_phi}) {
    const NormalizedSr d = normalized_sr(test.mdp, *pi, test.start, SrKind::kStateAction);
    const Terms t = approximation_terms(e, d, g, v_max);
    r.approx_reward += t.reward;
    r.approx_transition += t.transition;
    const OodErrors ood = ood_errors(m_train.mdp, m_test.mdp, up_project_state_action(phi_test, d.weights(), m));
    r.ood_reward += ood.eps_r / (1.0 - g);
    r.ood_transition += 0.5 * g * v_max * ood.eps_p / (1.0 - g);
  }
  r.bound = r.approx_reward + r.approx_transition + r.ood_reward + r.ood_transition;
  r.gap = discounted_return(test.mdp, star_test.policy, test.start) - discounted_return(test.mdp, pi_phi, test.start);
  return {finalize(r), book.size(), train.n_histories(), test.n_histories()};
}

double corollary_expression(int s_phi, int n_actions, int T, double eps, double B) {
  if (s_phi < 2 || n_actions < 1 || T < 1) throw ContractError("corollary_expression: argument out of range");
  const double s = static_cast<double>(s_phi - 1) / static_cast<double>(T + s_phi - 1);
  return std::pow(static_cast<double>(s_phi), -static_cast<double>(n_actions)) + (1.0 - s) * eps + s + B;
}

double dirichlet_expected_unseen(int n, int T) {
  if (n < 1 || T < 0) throw ContractError("dirichlet_expected_unseen: argument out of range");
  if (T == 0) return n;
  return static_cast<double>(n) * (n - 1) / static_cast<double>(T + n - 1);
}

DirichletCheck dirichlet_unknown_mass_check(int n, int T, int samples, std::uint64_t seed) {
  if (n < 2 || T < 0 || samples < 2) throw ContractError("dirichlet_unknown_mass_check: argument out of range");
  Rng rng(seed);
  std::vector<double> p(static_cast<std::size_t>(n));
  std::vector<char> seen(static_cast<std::size_t>(n));
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    for (auto& x : p) x = rng.exponential();
    std::fill(seen.begin(), seen.end(), 0);
    for (int t = 0; t < T; ++t) seen[static_cast<std::size_t>(rng.categorical(p))] = 1;
    const double unseen = static_cast<double>(std::count(seen.begin(), seen.end(), 0));
    sum += unseen;
    sum_sq += unseen * unseen;
  }
  const double mean = sum / samples;
  const double var = (sum_sq - samples * mean * mean) / (samples - 1);
  return {mean, std::sqrt(std::max(var, 0.0) / samples), dirichlet_expected_unseen(n, T)};
}

std::vector<ScalingRow> approx_error_scaling_probe(const FiniteMdp& ground, const std::vector<AbstractionFn>& family,
                                                   const NormalizedSr& weights) {
  std::vector<ScalingRow> rows;
  for (const auto& phi : family) {
    const AbstractMdp a = build_abstract_mdp(ground, phi, weights);
    const ReductionErrors e = reduction_errors(ground, phi, a.mdp, weights);
    rows.push_back({phi.n_abstract(), e.eps_r, e.eps_p});
  }
  return rows;
}

}  // namespace abx
