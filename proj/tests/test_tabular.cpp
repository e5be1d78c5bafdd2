#include <gtest/gtest.h>

#include "abx/errors.hpp"
#include "abx/tabular.hpp"
#include "abx/verification.hpp"
#include "oracles.hpp"

using namespace abx;

namespace {

FiniteMdp single_state(double reward, double gamma) {
  return FiniteMdp::from_dense({{{1.0}}}, {{reward}}, gamma, 1.0);
}

FiniteMdp two_cycle(double gamma) {
  return FiniteMdp::from_dense({{{0.0, 1.0}}, {{1.0, 0.0}}}, {{0.0}, {0.0}}, gamma, 1.0);
}

}  // namespace

TEST(Indexer, RoundTrips) {
  const StateActionIndexer k{7, 3};
  for (int s = 0; s < 7; ++s)
    for (int a = 0; a < 3; ++a) {
      const int f = k.flat(s, a);
      EXPECT_EQ(f, s * 3 + a);
      EXPECT_EQ(k.state(f), s);
      EXPECT_EQ(k.action(f), a);
    }
}

TEST(FiniteMdp, RejectsInvalidInput) {
  EXPECT_THROW(FiniteMdp::from_dense({{{0.5, 0.4}}, {{0.0, 1.0}}}, {{0.0}, {0.0}}, 0.9, 1.0), ContractError);
  EXPECT_THROW(FiniteMdp::from_dense({{{1.0}}}, {{2.0}}, 0.9, 1.0), ContractError);
  EXPECT_THROW(FiniteMdp::from_dense({{{1.0}}}, {{0.0}}, 1.0, 1.0), ContractError);
  EXPECT_THROW(FiniteMdp::from_dense({{{1.5, -0.5}}, {{0.0, 1.0}}}, {{0.0}, {0.0}}, 0.9, 1.0), ContractError);
}

TEST(PolicyEvaluation, ZeroReward) {
  EXPECT_NEAR(policy_evaluation(single_state(0.0, 0.9), Policy::uniform(1, 1))(0), 0.0, 1e-12);
}

TEST(PolicyEvaluation, GeometricSeries) {
  EXPECT_NEAR(policy_evaluation(single_state(1.0, 0.5), Policy::uniform(1, 1))(0), 2.0, 1e-9);
}

TEST(PolicyEvaluation, DimensionMismatch) {
  EXPECT_THROW(policy_evaluation(single_state(1.0, 0.5), Policy::uniform(2, 1)), ContractError);
}

TEST(PolicyEvaluation, MatchesMonteCarloSeed7) {
  Rng rng(7);
  const FiniteMdp mdp = random_mdp(5, 2, 0.9, rng);
  const Policy pi = random_policy(5, 2, rng);
  const Vector v = policy_evaluation(mdp, pi);
  for (int s = 0; s < 5; ++s) {
    const auto mc = oracle::monte_carlo_return(mdp, pi, NormalizedSr::point(5, s).weights(), 20000, 200, 100 + s);
    EXPECT_NEAR(v(s), mc.mean, 3.0 * mc.se + 1e-9) << "state " << s;
  }
}

TEST(PolicyEvaluation, ResidualAndRange) {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    const FiniteMdp mdp = random_mdp(2 + rng.index(8), 1 + rng.index(3), rng.uniform(0.1, 0.95), rng);
    const Policy pi = random_policy(mdp.n_states(), mdp.n_actions(), rng);
    const Vector v = policy_evaluation(mdp, pi);
    const FiniteMrp mrp = induce_mrp(mdp, pi);
    const Vector residual = v - (mrp.rewards + mdp.discount() * (mrp.transitions * v));
    EXPECT_LE(residual.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GE(v.minCoeff(), -1e-12);
    EXPECT_LE(v.maxCoeff(), mdp.v_max() + 1e-9);
    EXPECT_LE((v - oracle::solve_values(mdp, pi)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(OptimalPolicy, PrefersRewardingAction) {
  // state 0 is the absorbing goal; from state 1, action 0 (left) earns 1 on entry.
  const FiniteMdp mdp =
      FiniteMdp::from_dense({{{1.0, 0.0}, {1.0, 0.0}}, {{1.0, 0.0}, {0.0, 1.0}}}, {{0.0, 0.0}, {1.0, 0.0}}, 0.9, 1.0);
  EXPECT_EQ(optimal_policy(mdp).policy(1, 0), 1.0);
}

TEST(OptimalPolicy, TieBreaksToLowestAction) {
  const FiniteMdp mdp = FiniteMdp::from_dense({{{1.0}, {1.0}}}, {{0.5, 0.5}}, 0.9, 1.0);
  const auto sol = optimal_policy(mdp);
  EXPECT_EQ(sol.policy(0, 0), 1.0);
  EXPECT_EQ(sol.policy(0, 1), 0.0);
}

TEST(OptimalPolicy, DominatesEveryDeterministicPolicy) {
  Rng rng(3);
  for (int t = 0; t < 40; ++t) {
    const int n = 1 + rng.index(4);
    const int m = 1 + rng.index(2);
    const FiniteMdp mdp = random_mdp(n, m, rng.uniform(0.3, 0.95), rng);
    const auto sol = optimal_policy(mdp);
    for (const auto& pi : oracle::all_deterministic(n, m)) {
      const Vector v = oracle::solve_values(mdp, pi);
      for (int s = 0; s < n; ++s) EXPECT_GE(sol.values(s), v(s) - 1e-8);
    }
    const Vector q = q_from_values(mdp, sol.values);
    for (int s = 0; s < n; ++s) {
      const double best = q.segment(s * m, m).maxCoeff();
      EXPECT_NEAR(sol.values(s), best, 1e-9);
    }
  }
}

TEST(DiscountedReturn, ClosedForms) {
  EXPECT_NEAR(discounted_return(single_state(1.0, 0.9), Policy::uniform(1, 1), NormalizedSr::point(1, 0)), 10.0,
              1e-8);
  EXPECT_NEAR(discounted_return(single_state(0.0, 0.9), Policy::uniform(1, 1), NormalizedSr::point(1, 0)), 0.0, 1e-12);
}

TEST(DiscountedReturn, MatchesMonteCarloUniformStart) {
  Rng rng(7);
  const FiniteMdp mdp = random_mdp(5, 2, 0.9, rng);
  const Policy pi = random_policy(5, 2, rng);
  const NormalizedSr d0 = NormalizedSr::uniform(5);
  const auto mc = oracle::monte_carlo_return(mdp, pi, d0.weights(), 100000, 200, 99);
  EXPECT_NEAR(discounted_return(mdp, pi, d0), mc.mean, 3.0 * mc.se);
}

TEST(DiscountedReturn, EqualsOccupancyWeightedReward) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const FiniteMdp mdp = random_mdp(2 + rng.index(10), 1 + rng.index(3), rng.uniform(0.0, 0.95), rng);
    const Policy pi = random_policy(mdp.n_states(), mdp.n_actions(), rng);
    const NormalizedSr d0(random_distribution(mdp.n_states(), rng), SrKind::kState);
    const NormalizedSr d = normalized_sr(mdp, pi, d0, SrKind::kStateAction);
    const double via_sr = d.weights().dot(mdp.rewards()) / (1.0 - mdp.discount());
    EXPECT_NEAR(discounted_return(mdp, pi, d0), via_sr, 1e-8);
  }
}

TEST(NormalizedSr, SingleAbsorbingState) {
  const NormalizedSr d = normalized_sr(single_state(0.0, 0.9), Policy::uniform(1, 1), NormalizedSr::point(1, 0),
                                       SrKind::kState);
  EXPECT_NEAR(d(0), 1.0, 1e-12);
}

TEST(NormalizedSr, DeterministicTwoCycle) {
  const NormalizedSr d =
      normalized_sr(two_cycle(0.5), Policy::uniform(2, 1), NormalizedSr::point(2, 0), SrKind::kState);
  EXPECT_NEAR(d(0), 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(d(1), 1.0 / 3.0, 1e-9);
}

TEST(NormalizedSr, MatchesLinearSolveAndFactorizes) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const FiniteMdp mdp = random_mdp(2 + rng.index(10), 1 + rng.index(3), rng.uniform(0.0, 0.95), rng);
    const Policy pi = random_policy(mdp.n_states(), mdp.n_actions(), rng);
    const NormalizedSr d0(random_distribution(mdp.n_states(), rng), SrKind::kState);
    const NormalizedSr ds = normalized_sr(mdp, pi, d0, SrKind::kState);
    const NormalizedSr dsa = normalized_sr(mdp, pi, d0, SrKind::kStateAction);
    EXPECT_NEAR(ds.weights().sum(), 1.0, 1e-9);
    EXPECT_NEAR(dsa.weights().sum(), 1.0, 1e-9);
    EXPECT_LE((ds.weights() - oracle::solve_state_sr(mdp, pi, d0.weights())).cwiseAbs().maxCoeff(), 1e-8);
    for (int s = 0; s < mdp.n_states(); ++s)
      for (int a = 0; a < mdp.n_actions(); ++a)
        EXPECT_NEAR(dsa(s * mdp.n_actions() + a), ds(s) * pi(s, a), 1e-10);
  }
}

TEST(NormalizedSr, RejectsUnnormalized) {
  EXPECT_THROW(NormalizedSr(Vector::Constant(2, 0.6), SrKind::kState), ContractError);
  Vector v(2);
  v << 1.5, -0.5;
  EXPECT_THROW(NormalizedSr(v, SrKind::kState), ContractError);
}

TEST(WeightedNorm, VectorExamples) {
  Vector w(2), v(2);
  w << 0.5, 0.5;
  v << 1.0, -3.0;
  EXPECT_DOUBLE_EQ(weighted_l1_norm(w, v), 2.0);
  EXPECT_DOUBLE_EQ(weighted_l1_norm(w, Vector(Vector::Zero(2))), 0.0);
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + rng.index(10);
    const Vector p = random_distribution(n, rng);
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.uniform(-4.0, 4.0);
    EXPECT_LE(weighted_l1_norm(p, x), 4.0 + 1e-12);
  }
  EXPECT_THROW(weighted_l1_norm(w, Vector(Vector::Zero(3))), ContractError);
}

TEST(WeightedNorm, MatrixExamples) {
  Vector w(2);
  w << 1.0, 0.0;
  Matrix m(2, 2);
  m << 0.2, -0.2, 9.0, 0.9;
  EXPECT_DOUBLE_EQ(weighted_l1_norm(w, m), 0.4);
  EXPECT_DOUBLE_EQ(weighted_l1_norm(w, Matrix(Matrix::Zero(2, 3))), 0.0);
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + rng.index(8);
    Matrix a(n, n), b(n, n);
    for (int i = 0; i < n; ++i) {
      a.row(i) = random_distribution(n, rng).transpose();
      b.row(i) = random_distribution(n, rng).transpose();
    }
    EXPECT_LE(weighted_l1_norm(random_distribution(n, rng), Matrix(a - b)), 2.0 + 1e-12);
  }
}

TEST(BellmanApply, ZeroContinuationAndFixedPoint) {
  Rng rng(12);
  const FiniteMdp mdp = random_mdp(4, 3, 0.8, rng);
  const Policy pi = random_policy(4, 3, rng);
  EXPECT_LE((bellman_apply(mdp, pi, Vector::Zero(12)) - mdp.rewards()).cwiseAbs().maxCoeff(), 1e-15);
  const Vector q = action_values(mdp, pi);
  EXPECT_LE((bellman_apply(mdp, pi, q) - q).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(BellmanApply, MatchesDirectSummationSeed11) {
  Rng rng(11);
  const FiniteMdp mdp = random_mdp(3, 2, 0.7, rng);
  const Policy pi = random_policy(3, 2, rng);
  Vector f(6);
  for (int i = 0; i < 6; ++i) f(i) = rng.uniform(-2.0, 2.0);
  const Matrix p = oracle::dense(mdp.transitions());
  const Vector got = bellman_apply(mdp, pi, f);
  for (int s = 0; s < 3; ++s)
    for (int a = 0; a < 2; ++a) {
      double expect = mdp.reward(s, a);
      for (int s2 = 0; s2 < 3; ++s2)
        for (int a2 = 0; a2 < 2; ++a2) expect += 0.7 * p(s * 2 + a, s2) * pi(s2, a2) * f(s2 * 2 + a2);
      EXPECT_NEAR(got(s * 2 + a), expect, 1e-14);
    }
}

TEST(BellmanApply, ResidualOfExactQIsSmallUnderAnyWeights) {
  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    const FiniteMdp mdp = random_mdp(2 + rng.index(8), 1 + rng.index(3), rng.uniform(0.1, 0.95), rng);
    const Policy pi = random_policy(mdp.n_states(), mdp.n_actions(), rng);
    const Vector q = action_values(mdp, pi);
    const Vector w = random_distribution(static_cast<int>(q.size()), rng);
    EXPECT_LE(weighted_l1_norm(w, Vector(bellman_apply(mdp, pi, q) - q)), 10.0 * kDefaultTolerance);
  }
}

TEST(IterationCap, DegenerateInputs) {
  EXPECT_EQ(iteration_cap(1e-10, 0.0, 1.0), 10);
  EXPECT_EQ(iteration_cap(1e-10, 0.9, 0.0), 10);
  EXPECT_GT(iteration_cap(1e-10, 0.99, 100.0), 1000);
}
