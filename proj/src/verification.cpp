#include "abx/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include <json.hpp>

#include "abx/abstraction.hpp"
#include "abx/parallel.hpp"

namespace abx {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Random instances

Vector random_distribution(int n, Rng& rng, int support) {
  if (n < 1) throw ContractError("random_distribution: size must be positive");
  if (support <= 0 || support > n) support = n;
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < support; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
  Vector d = Vector::Zero(n);
  double total = 0.0;
  for (int i = 0; i < support; ++i) {
    const double e = rng.exponential() + 1e-300;
    d(idx[i]) = e;
    total += e;
  }
  return d / total;
}

namespace {

Vector random_row(int n, Rng& rng) {
  const int support = 1 + rng.index(std::min(n, 4));
  return random_distribution(n, rng, rng.uniform() < 0.2 ? n : support);
}

double random_reward(Rng& rng) { return rng.uniform() < 0.3 ? 0.0 : rng.uniform(); }

}  // namespace

FiniteMdp random_mdp(int n_states, int n_actions, double discount, Rng& rng) {
  std::vector<Eigen::Triplet<double>> triplets;
  Vector rewards(static_cast<Eigen::Index>(n_states) * n_actions);
  for (int row = 0; row < n_states * n_actions; ++row) {
    const Vector p = random_row(n_states, rng);
    for (int j = 0; j < n_states; ++j)
      if (p(j) > 0.0) triplets.emplace_back(row, j, p(j));
    rewards(row) = random_reward(rng);
  }
  SparseRows p(static_cast<Eigen::Index>(n_states) * n_actions, n_states);
  p.setFromTriplets(triplets.begin(), triplets.end());
  return FiniteMdp(n_states, n_actions, std::move(p), std::move(rewards), discount, 1.0);
}

FiniteMrp random_mrp(int n_states, double discount, Rng& rng) {
  FiniteMdp mdp = random_mdp(n_states, 1, discount, rng);
  return induce_mrp(mdp, Policy::uniform(n_states, 1));
}

Policy random_policy(int n_states, int n_actions, Rng& rng) {
  Matrix p(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    if (rng.uniform() < 0.5) {
      p.row(s).setZero();
      p(s, rng.index(n_actions)) = 1.0;
    } else {
      p.row(s) = random_distribution(n_actions, rng).transpose();
    }
  }
  return Policy(std::move(p));
}

std::vector<int> random_partition(int n_ground, int n_abstract, Rng& rng) {
  if (n_abstract < 1 || n_abstract > n_ground) throw ContractError("random_partition: invalid class count");
  std::vector<int> raw(static_cast<std::size_t>(n_ground));
  for (int i = 0; i < n_ground; ++i) raw[i] = i < n_abstract ? i : rng.index(n_abstract);
  for (int i = n_ground - 1; i > 0; --i) std::swap(raw[i], raw[rng.index(i + 1)]);
  std::vector<int> relabel(static_cast<std::size_t>(n_abstract), -1);
  int next = 0;
  for (int& c : raw) {
    if (relabel[c] < 0) relabel[c] = next++;
    c = relabel[c];
  }
  return raw;
}

GenerativePomdp random_pomdp(int n_latent, int n_actions, int n_observations, double discount, Rng& rng) {
  struct Tables {
    std::vector<LatentDistribution> transition;  // [s * m + a]
    std::vector<double> reward;
    std::vector<ObservationDistribution> observe;
    int terminal = -1;
    int m = 0;
  };
  auto t = std::make_shared<Tables>();
  t->m = n_actions;
  if (rng.uniform() < 0.5) t->terminal = n_latent - 1;
  for (int s = 0; s < n_latent; ++s)
    for (int a = 0; a < n_actions; ++a) {
      const Vector p = random_row(n_latent, rng);
      std::vector<std::pair<LatentState, double>> entries;
      for (int j = 0; j < n_latent; ++j)
        if (p(j) > 0.0) entries.emplace_back(LatentState{j, 0, 0}, p(j));
      t->transition.push_back(make_distribution(std::move(entries)));
      t->reward.push_back(random_reward(rng));
    }
  for (int s = 0; s < n_latent; ++s) {
    const Vector q = random_distribution(n_observations, rng, 1 + rng.index(n_observations));
    ObservationDistribution obs;
    for (int o = 0; o < n_observations; ++o)
      if (q(o) > 0.0) obs.emplace_back(o, q(o));
    t->observe.push_back(std::move(obs));
  }

  GenerativePomdp p;
  p.id = "random";
  for (int a = 0; a < n_actions; ++a) p.action_names.push_back("a" + std::to_string(a));
  for (int o = 0; o < n_observations; ++o) p.observation_names.push_back("o" + std::to_string(o));
  p.discount = discount;
  p.r_max = 1.0;
  p.transition = [t](const LatentState& s, int a) { return t->transition[static_cast<std::size_t>(s[0] * t->m + a)]; };
  p.reward = [t](const LatentState& s, int a) { return t->reward[static_cast<std::size_t>(s[0] * t->m + a)]; };
  p.observe = [t](const LatentState& s) { return t->observe[static_cast<std::size_t>(s[0])]; };
  p.terminal = [t](const LatentState& s) { return s[0] == t->terminal; };
  return p;
}

// ---------------------------------------------------------------------------
// Suite runner

namespace {

struct TrialOutcome {
  bool violated = false;
  double slack = std::numeric_limits<double>::quiet_NaN();
  double error = 0.0;
  bool per_action_failure = false;
  json detail;
};

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename Trial>
SuiteResult run_suite(const std::string& name, std::uint64_t seed, int trials, unsigned threads, Trial&& trial) {
  if (trials < 1) throw ContractError("suite: trials must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));
  parallel_for(outcomes.size(), threads, [&](std::size_t i) {
    Rng rng(stream_seed({seed, hash_name(name), i}));
    outcomes[i] = trial(rng);
  });

  SuiteResult r;
  r.name = name;
  r.trials = trials;
  r.seed = seed;
  r.min_slack = std::numeric_limits<double>::infinity();
  r.max_slack = -std::numeric_limits<double>::infinity();
  bool any_slack = false;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const TrialOutcome& o = outcomes[i];
    if (!std::isnan(o.slack)) {
      any_slack = true;
      r.min_slack = std::min(r.min_slack, o.slack);
      r.max_slack = std::max(r.max_slack, o.slack);
    }
    r.max_error = std::max(r.max_error, o.error);
    if (o.per_action_failure) ++r.per_action_form_failures;
    if (o.violated) {
      if (r.violations == 0) {
        json cx = o.detail;
        cx["trial"] = i;
        cx["seed"] = seed;
        r.counterexample = cx.dump();
      }
      ++r.violations;
    }
  }
  if (!any_slack) r.min_slack = r.max_slack = 0.0;
  r.seconds = elapsed_seconds(start);
  return r;
}

TrialOutcome from_report(const BoundReport& b, json detail) {
  TrialOutcome o;
  o.violated = !b.holds;
  o.slack = b.slack;
  detail["bound"] = b.bound;
  detail["gap"] = b.gap;
  o.detail = std::move(detail);
  return o;
}

NormalizedSr random_start(int n, Rng& rng) {
  return NormalizedSr(random_distribution(n, rng, 1 + rng.index(n)), SrKind::kState);
}

double random_discount(Rng& rng) { return rng.uniform(0.5, 0.95); }

FiniteMdp perturb(const FiniteMdp& base, Rng& rng) {
  const FiniteMdp other = random_mdp(base.n_states(), base.n_actions(), base.discount(), rng);
  const double lambda = rng.uniform() < 0.3 ? 1.0 : rng.uniform(0.0, 0.4);
  const double mu = rng.uniform() < 0.3 ? 1.0 : rng.uniform(0.0, 0.4);
  SparseRows p = (1.0 - lambda) * base.transitions() + lambda * other.transitions();
  Vector r = (1.0 - mu) * base.rewards() + mu * other.rewards();
  return FiniteMdp(base.n_states(), base.n_actions(), std::move(p), std::move(r), base.discount(), 1.0);
}

FiniteMrp perturb(const FiniteMrp& base, Rng& rng) {
  const FiniteMrp other = random_mrp(base.n_states(), base.discount, rng);
  const double lambda = rng.uniform() < 0.3 ? 1.0 : rng.uniform(0.0, 0.4);
  FiniteMrp out = base;
  out.transitions = (1.0 - lambda) * base.transitions + lambda * other.transitions;
  out.rewards = (1.0 - lambda) * base.rewards + lambda * other.rewards;
  return out;
}

/// Per-action column of a flat state-action table.
Vector action_slice(const Vector& flat, int n_states, int n_actions, int a) {
  Vector out(n_states);
  for (int s = 0; s < n_states; ++s) out(s) = flat(s * n_actions + a);
  return out;
}

double row_l1_difference(const SparseRows& a, const SparseRows& b, int row_a, int row_b, int n_cols) {
  Vector diff = Vector::Zero(n_cols);
  for (SparseRows::InnerIterator it(a, row_a); it; ++it) diff(it.col()) += it.value();
  for (SparseRows::InnerIterator it(b, row_b); it; ++it) diff(it.col()) -= it.value();
  return diff.cwiseAbs().sum();
}

Matrix random_stochastic(int rows, int cols, Rng& rng) {
  Matrix p(rows, cols);
  for (int i = 0; i < rows; ++i) p.row(i) = random_row(cols, rng).transpose();
  return p;
}

SparseRows to_sparse(const Matrix& m) {
  SparseRows s = m.sparseView();
  s.makeCompressed();
  return s;
}

Vector random_signed(int n, Rng& rng, double scale = 5.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(-scale, scale);
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bound suites

SuiteResult simulation_lemma_suite(std::uint64_t seed, int trials, unsigned threads) {
  return run_suite("simulation_lemma", seed, trials, threads, [](Rng& rng) {
    const int n = 2 + rng.index(11);
    const int m = 1 + rng.index(3);
    const double g = random_discount(rng);
    const FiniteMdp mdp = random_mdp(n, m, g, rng);
    const FiniteMdp model = perturb(mdp, rng);
    const Policy pi = random_policy(n, m, rng);
    const NormalizedSr d0 = random_start(n, rng);
    const MrpLossReport loss = mrp_value_loss(induce_mrp(model, pi), induce_mrp(mdp, pi), d0);
    TrialOutcome o = from_report(loss.report, {{"n", n}, {"m", m}, {"gamma", g}, {"eps_r", loss.eps_r},
                                               {"eps_p", loss.eps_p}});

    // Per-action hypothesis: max over a of the action-wise errors under the
    // same state SR.
    const NormalizedSr d = normalized_sr(model, pi, d0, SrKind::kState);
    double eps_r = 0.0;
    double eps_p = 0.0;
    for (int a = 0; a < m; ++a) {
      const Vector diff = action_slice(mdp.rewards() - model.rewards(), n, m, a);
      eps_r = std::max(eps_r, weighted_l1_norm(d, diff));
      double pa = 0.0;
      for (int s = 0; s < n; ++s)
        pa += d(s) * row_l1_difference(mdp.transitions(), model.transitions(), s * m + a, s * m + a, n);
      eps_p = std::max(eps_p, pa);
    }
    o.per_action_failure = loss.report.gap > simulation_lemma_bound(eps_r, eps_p, g, mdp.v_max()) + kHoldsTolerance;
    return o;
  });
}

SuiteResult mrp_value_loss_suite(std::uint64_t seed, int trials, unsigned threads) {
  return run_suite("mrp_value_loss", seed, trials, threads, [](Rng& rng) {
    const int n = 2 + rng.index(11);
    const double g = random_discount(rng);
    const FiniteMrp a = random_mrp(n, g, rng);
    const FiniteMrp b = perturb(a, rng);
    const NormalizedSr d0 = random_start(n, rng);
    const MrpLossReport loss = mrp_value_loss(a, b, d0);
    return from_report(loss.report, {{"n", n}, {"gamma", g}, {"eps_r", loss.eps_r}, {"eps_p", loss.eps_p}});
  });
}

SuiteResult telescoping_suite(std::uint64_t seed, int trials, unsigned threads) {
  return run_suite("telescoping", seed, trials, threads, [](Rng& rng) {
    const int n = 2 + rng.index(11);
    const int m = 1 + rng.index(3);
    const double g = random_discount(rng);
    const FiniteMdp mdp = random_mdp(n, m, g, rng);
    const OptimalSolution star = optimal_policy(mdp);
    const int f_kind = rng.index(4);
    Vector f(static_cast<Eigen::Index>(n) * m);
    for (int i = 0; i < f.size(); ++i) {
      switch (f_kind) {
        case 0: f(i) = rng.uniform(0.0, mdp.v_max()); break;
        case 1: f(i) = star.q_values(i) + rng.uniform(-0.5, 0.5); break;
        case 2: f(i) = 0.0; break;
        default: f(i) = rng.uniform(-mdp.v_max(), 2.0 * mdp.v_max()); break;
      }
    }
    const Policy pi = rng.uniform() < 0.5 ? star.policy : random_policy(n, m, rng);
    const NormalizedSr d0 = random_start(n, rng);
    return from_report(telescoping_gap_bound(mdp, f, pi, d0), {{"n", n}, {"m", m}, {"gamma", g}, {"f_kind", f_kind}});
  });
}

SuiteResult model_reduction_suite(std::uint64_t seed, int trials, unsigned threads) {
  return run_suite("model_reduction", seed, trials, threads, [](Rng& rng) {
    const int n = 2 + rng.index(11);
    const int m = 1 + rng.index(3);
    const double g = random_discount(rng);
    const FiniteMdp ground = random_mdp(n, m, g, rng);
    const int n_abs = 1 + rng.index(n);
    const AbstractionFn phi = AbstractionFn::from_table(random_partition(n, n_abs, rng), "random");
    const NormalizedSr d0 = random_start(n, rng);
    const int w_kind = rng.index(3);
    NormalizedSr weights = NormalizedSr::uniform(n * m, SrKind::kStateAction);
    if (w_kind == 0)
      weights = normalized_sr(ground, optimal_policy(ground).policy, d0, SrKind::kStateAction);
    else if (w_kind == 1)
      weights = NormalizedSr(random_distribution(n * m, rng, 1 + rng.index(n * m)), SrKind::kStateAction);
    const AbstractMdp abstract = build_abstract_mdp(ground, phi, weights);
    const ModelReductionReport rep = model_reduction_bound(ground, abstract, d0);
    TrialOutcome o = from_report(rep.report, {{"n", n}, {"m", m}, {"gamma", g}, {"n_abstract", n_abs},
                                              {"weights", w_kind}, {"max_norm_bound", rep.max_norm_bound}});
    if (rep.report.bound > rep.max_norm_bound + kHoldsTolerance) o.violated = true;
    return o;
  });
}

SuiteResult ood_generalization_suite(std::uint64_t seed, int trials, unsigned threads) {
  return run_suite("ood_generalization", seed, trials, threads, [](Rng& rng) {
    const int n = 2 + rng.index(5);
    const int m = 2;
    const int n_obs = 2 + rng.index(2);
    const double g = rng.uniform(0.5, 0.9);
    const GenerativePomdp pomdp = random_pomdp(n, m, n_obs, g, rng);
    auto latent = [&](const Vector& w) {
      std::vector<std::pair<LatentState, double>> e;
      for (int i = 0; i < n; ++i)
        if (w(i) > 0.0) e.emplace_back(LatentState{i, 0, 0}, w(i));
      return make_distribution(std::move(e));
    };
    const LatentDistribution train = latent(random_distribution(n, rng, 1 + rng.index(n)));
    const LatentDistribution test = latent(random_distribution(n, rng, 1 + rng.index(n)));
    const int horizon = 2 + rng.index(2);
    const int key_kind = rng.index(4);
    const int k = rng.index(horizon + 2);
    HistoryKeyFn key = [k](const History& h) { return suffix_key(h, k); };
    if (key_kind == 0) key = first_observation_key;
    const OodReport rep = ood_generalization_bound(pomdp, train, test, key, horizon);
    return from_report(rep.report, {{"latent", n}, {"observations", n_obs}, {"gamma", g}, {"horizon", horizon},
                                    {"key", key_kind == 0 ? std::string("first_obs") : "suffix_" + std::to_string(k)},
                                    {"n_abstract", rep.n_abstract}});
  });
}

SuiteResult finite_learning_suite(std::uint64_t seed, int trials, unsigned threads) {
  return run_suite("finite_learning", seed, trials, threads, [](Rng& rng) {
    const int n = 6;
    const int m = 2 + rng.index(2);
    const double g = random_discount(rng);
    const FiniteMdp mdp = random_mdp(n, m, g, rng);
    const OptimalSolution star = optimal_policy(mdp);
    const double hide = rng.uniform(0.0, 0.6);
    const double eps = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.0, 1.0);
    std::vector<char> observed(static_cast<std::size_t>(n));
    Matrix pi_hat(n, m);
    const Matrix uniform = Matrix::Constant(1, m, 1.0 / m);
    for (int s = 0; s < n; ++s) {
      observed[s] = rng.uniform() >= hide;
      if (observed[s]) {
        const Matrix u = rng.uniform() < 0.5 ? uniform : Matrix(random_distribution(m, rng).transpose());
        pi_hat.row(s) = (1.0 - 0.5 * eps) * star.policy.probabilities().row(s) + 0.5 * eps * u;
      } else {
        pi_hat.row(s) = random_policy(1, m, rng).probabilities();
      }
    }
    const LearningOutcome outcome{observed, eps, Policy(pi_hat)};
    const NormalizedSr d0 = random_start(n, rng);
    const BoundReport a =
        finite_learning_report(mdp, outcome, star.policy, d0, normalized_sr(mdp, star.policy, d0, SrKind::kState));
    const BoundReport b =
        finite_learning_report(mdp, outcome, star.policy, d0, normalized_sr(mdp, outcome.policy, d0, SrKind::kState));
    TrialOutcome o = from_report(a.slack <= b.slack ? a : b, {{"m", m}, {"gamma", g}, {"eps", eps},
                                                             {"bound_optimal_sr", a.bound},
                                                             {"bound_learned_sr", b.bound}});
    o.violated = !a.holds || !b.holds;
    return o;
  });
}

// ---------------------------------------------------------------------------
// Identity suites

namespace {

TrialOutcome identity_outcome(double error, json detail) {
  TrialOutcome o;
  o.error = error;
  o.violated = !(error <= kIdentityTolerance);
  detail["error"] = error;
  o.detail = std::move(detail);
  return o;
}

}  // namespace

SuiteResult norm_axioms_suite(std::uint64_t seed, int trials, unsigned threads) {
  return run_suite("norm_axioms", seed, trials, threads, [](Rng& rng) {
    const int n = 1 + rng.index(20);
    const int cols = 1 + rng.index(6);
    const Vector w = random_distribution(n, rng);
    const Vector u = random_signed(n, rng);
    const Vector v = random_signed(n, rng);
    const Matrix a = Matrix::NullaryExpr(n, cols, [&] { return rng.uniform(-5.0, 5.0); });
    const Matrix b = Matrix::NullaryExpr(n, cols, [&] { return rng.uniform(-5.0, 5.0); });
    const double alpha = rng.uniform(-3.0, 3.0);
    double err = 0.0;
    err = std::max(err, weighted_l1_norm(w, Vector(u + v)) - weighted_l1_norm(w, u) - weighted_l1_norm(w, v));
    err = std::max(err, std::abs(weighted_l1_norm(w, Vector(alpha * v)) - std::abs(alpha) * weighted_l1_norm(w, v)));
    err = std::max(err, -weighted_l1_norm(w, v));
    err = std::max(err, std::abs(weighted_l1_norm(w, Vector(Vector::Zero(n)))));
    err = std::max(err, weighted_l1_norm(w, Matrix(a + b)) - weighted_l1_norm(w, a) - weighted_l1_norm(w, b));
    err = std::max(err, std::abs(weighted_l1_norm(w, Matrix(alpha * a)) - std::abs(alpha) * weighted_l1_norm(w, a)));
    // Definiteness on the support of w.
    Vector e = Vector::Zero(n);
    int i = 0;
    while (w(i) <= 0.0) ++i;
    e(i) = 1.0;
    if (!(weighted_l1_norm(w, e) > 0.0)) err = std::max(err, 1.0);
    return identity_outcome(err, {{"n", n}});
  });
}

SuiteResult push_forward_suite(std::uint64_t seed, int trials, unsigned threads) {
  return run_suite("push_forward", seed, trials, threads, [](Rng& rng) {
    const int n = 1 + rng.index(15);
    const Vector p = random_distribution(n, rng, 1 + rng.index(n));
    const Matrix P = random_stochastic(n, n, rng);
    const Vector v = random_signed(n, rng);
    double lhs = 0.0;
    for (int i = 0; i < n; ++i) lhs += p(i) * weighted_l1_norm(Vector(P.row(i).transpose()), v);
    const double rhs = weighted_l1_norm(Vector(P.transpose() * p), v);
    return identity_outcome(std::abs(lhs - rhs), {{"n", n}});
  });
}

SuiteResult holder_suite(std::uint64_t seed, int trials, unsigned threads) {
  return run_suite("holder", seed, trials, threads, [](Rng& rng) {
    const int n = 1 + rng.index(20);
    const Vector v = random_signed(n, rng);
    const Vector w = random_signed(n, rng);
    const double excess = std::abs(v.dot(w)) - w.cwiseAbs().maxCoeff() * v.cwiseAbs().sum();
    return identity_outcome(std::max(excess, 0.0), {{"n", n}});
  });
}

namespace {

struct ProjectionInstance {
  int n_ground;
  int n_abstract;
  int m;
  AbstractionFn phi;
};

ProjectionInstance random_projection(Rng& rng) {
  const int n = 1 + rng.index(15);
  const int k = 1 + rng.index(n);
  const int m = 1 + rng.index(3);
  return {n, k, m, AbstractionFn::from_table(random_partition(n, k, rng), "random")};
}

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

SuiteResult projection_associativity_suite(std::uint64_t seed, int trials, unsigned threads) {
  return run_suite("projection_associativity", seed, trials, threads, [](Rng& rng) {
    const auto inst = random_projection(rng);
    const auto& phi = inst.phi;
    const int m = inst.m;
    const double alpha = rng.uniform(-3.0, 3.0);
    const Vector v = random_signed(inst.n_abstract * m, rng);
    const Vector v2 = random_signed(inst.n_abstract * m, rng);
    const Vector d = random_signed(inst.n_ground * m, rng);
    const Vector d2 = random_signed(inst.n_ground * m, rng);
    double err = 0.0;
    err = std::max(err, max_abs(alpha * down_project(phi, v, m) - down_project(phi, Vector(alpha * v), m)));
    err = std::max(err, max_abs(down_project(phi, v, m) + down_project(phi, v2, m) - down_project(phi, Vector(v + v2), m)));
    err = std::max(err, max_abs(alpha * up_project_state_action(phi, d, m) - up_project_state_action(phi, Vector(alpha * d), m)));
    err = std::max(err, max_abs(up_project_state_action(phi, d, m) + up_project_state_action(phi, d2, m) -
                                up_project_state_action(phi, Vector(d + d2), m)));
    const Matrix P = random_stochastic(inst.n_ground * m, inst.n_ground, rng);
    const Matrix P2 = random_stochastic(inst.n_ground * m, inst.n_ground, rng);
    const Matrix lhs = Matrix(up_project_matrix(phi, to_sparse(P))) + Matrix(up_project_matrix(phi, to_sparse(P2)));
    const Matrix rhs = Matrix(up_project_matrix(phi, to_sparse(Matrix(P + P2))));
    err = std::max(err, (lhs - rhs).cwiseAbs().maxCoeff());
    const Matrix scaled = Matrix(up_project_matrix(phi, to_sparse(Matrix(alpha * P))));
    err = std::max(err, (alpha * Matrix(up_project_matrix(phi, to_sparse(P))) - scaled).cwiseAbs().maxCoeff());
    return identity_outcome(err, {{"n_ground", inst.n_ground}, {"n_abstract", inst.n_abstract}, {"m", m}});
  });
}

SuiteResult norm_projection_suite(std::uint64_t seed, int trials, unsigned threads) {
  return run_suite("norm_projection", seed, trials, threads, [](Rng& rng) {
    const auto inst = random_projection(rng);
    const int m = inst.m;
    const Vector p = random_distribution(inst.n_ground * m, rng, 1 + rng.index(inst.n_ground * m));
    const Vector v = random_signed(inst.n_abstract * m, rng);
    const Vector v2 = random_signed(inst.n_abstract * m, rng);
    const double lhs = weighted_l1_norm(p, Vector(down_project(inst.phi, v, m) - down_project(inst.phi, v2, m)));
    const double rhs = weighted_l1_norm(up_project_state_action(inst.phi, p, m), Vector(v - v2));
    return identity_outcome(std::abs(lhs - rhs), {{"n_ground", inst.n_ground}, {"n_abstract", inst.n_abstract}});
  });
}

SuiteResult up_down_suite(std::uint64_t seed, int trials, unsigned threads) {
  return run_suite("up_down", seed, trials, threads, [](Rng& rng) {
    const auto inst = random_projection(rng);
    const Matrix P = random_stochastic(inst.n_ground, inst.n_ground, rng);
    const Vector x = random_signed(inst.n_abstract, rng);
    const Vector lhs = P * down_project(inst.phi, x, 1);
    const Vector rhs = Matrix(up_project_matrix(inst.phi, to_sparse(P))) * x;
    double err = max_abs(lhs - rhs);
    const Matrix up = Matrix(up_project_matrix(inst.phi, to_sparse(P)));
    for (int i = 0; i < up.rows(); ++i) err = std::max(err, std::abs(up.row(i).sum() - 1.0) > 1e-10 ? 1.0 : 0.0);
    return identity_outcome(err, {{"n_ground", inst.n_ground}, {"n_abstract", inst.n_abstract}});
  });
}

// ---------------------------------------------------------------------------

int VerificationReport::total_violations() const {
  int total = 0;
  for (const auto& s : bound_suites) total += s.violations;
  for (const auto& s : identity_suites) total += s.violations;
  return total;
}

bool VerificationReport::passed() const {
  if (total_violations() != 0) return false;
  return std::all_of(dirichlet.begin(), dirichlet.end(), [](const DirichletResult& d) { return d.within_3se; });
}

VerificationReport verify_bounds_suite(std::uint64_t seed, int trials, unsigned threads, int dirichlet_samples) {
  const auto start = std::chrono::steady_clock::now();
  VerificationReport report;
  report.seed = seed;
  report.trials = trials;
  report.bound_suites.push_back(simulation_lemma_suite(seed, trials, threads));
  report.bound_suites.push_back(mrp_value_loss_suite(seed, trials, threads));
  report.bound_suites.push_back(telescoping_suite(seed, trials, threads));
  report.bound_suites.push_back(model_reduction_suite(seed, trials, threads));
  report.bound_suites.push_back(ood_generalization_suite(seed, trials, threads));
  report.bound_suites.push_back(finite_learning_suite(seed, trials, threads));
  report.identity_suites.push_back(norm_axioms_suite(seed, trials, threads));
  report.identity_suites.push_back(push_forward_suite(seed, trials, threads));
  report.identity_suites.push_back(holder_suite(seed, trials, threads));
  report.identity_suites.push_back(projection_associativity_suite(seed, trials, threads));
  report.identity_suites.push_back(norm_projection_suite(seed, trials, threads));
  report.identity_suites.push_back(up_down_suite(seed, trials, threads));
  for (auto [n, T] : {std::pair{4, 10}, std::pair{8, 20}, std::pair{16, 50}}) {
    DirichletResult d;
    d.n = n;
    d.T = T;
    d.samples = dirichlet_samples;
    d.check = dirichlet_unknown_mass_check(n, T, dirichlet_samples,
                                           stream_seed({seed, hash_name("dirichlet"), static_cast<std::uint64_t>(n)}));
    d.within_3se = std::abs(d.check.monte_carlo_mean - d.check.formula) <= 3.0 * d.check.standard_error;
    report.dirichlet.push_back(d);
  }
  report.seconds = elapsed_seconds(start);
  return report;
}

}  // namespace abx
