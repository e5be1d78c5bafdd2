#include "abx/pomdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace abx {

LatentDistribution make_distribution(std::vector<std::pair<LatentState, double>> entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  LatentDistribution out;
  double total = 0.0;
  for (auto& [state, mass] : entries) {
    if (mass < 0.0) throw ContractError("make_distribution: negative mass");
    if (mass == 0.0) continue;
    total += mass;
    if (!out.empty() && out.back().first == state)
      out.back().second += mass;
    else
      out.emplace_back(state, mass);
  }
  if (std::abs(total - 1.0) > kRowTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "make_distribution: masses sum to " << total;
    throw ContractError(os.str());
  }
  for (auto& entry : out) entry.second /= total;
  return out;
}

LatentState sample_latent(const LatentDistribution& dist, Rng& rng) {
  if (dist.size() == 1) return dist.front().first;
  std::vector<double> w(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) w[i] = dist[i].second;
  return dist[static_cast<std::size_t>(rng.categorical(w))].first;
}

int sample_observation(const ObservationDistribution& dist, Rng& rng) {
  if (dist.size() == 1) return dist.front().first;
  std::vector<double> w(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) w[i] = dist[i].second;
  return dist[static_cast<std::size_t>(rng.categorical(w))].first;
}

BeliefUpdate belief_update(const GenerativePomdp& pomdp, const LatentDistribution& belief, int action,
                           int observation) {
  if (action < 0 || action >= pomdp.n_actions()) throw ContractError("belief_update: action out of range");
  std::vector<std::pair<LatentState, double>> joint;
  double marginal = 0.0;
  for (const auto& [state, mass] : belief) {
    if (pomdp.terminal(state)) {
      for (const auto& [o, q] : pomdp.observe(state))
        if (o == observation) {
          joint.emplace_back(state, mass * q);
          marginal += mass * q;
        }
      continue;
    }
    for (const auto& [next, p] : pomdp.transition(state, action))
      for (const auto& [o, q] : pomdp.observe(next))
        if (o == observation && p * q > 0.0) {
          joint.emplace_back(next, mass * p * q);
          marginal += mass * p * q;
        }
  }
  if (!(marginal > 0.0)) throw ImpossibleObservationError("belief_update: observation has zero probability");
  for (auto& entry : joint) entry.second /= marginal;
  return {make_distribution(std::move(joint)), marginal};
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

BisimulationResult check_bisimilar(const FiniteMdp& m1, const FiniteMdp& m2,
                                   const std::vector<std::pair<int, int>>& relation, double tol) {
  BisimulationResult result;
  if (m1.n_actions() != m2.n_actions()) {
    result.bisimilar = false;
    result.reason = "action counts differ";
    return result;
  }
  const int n1 = m1.n_states();
  const int n2 = m2.n_states();
  const int m = m1.n_actions();
  UnionFind uf(n1 + n2);
  for (const auto& [i, j] : relation) {
    if (i < 0 || i >= n1 || j < 0 || j >= n2) throw ContractError("check_bisimilar: relation index out of range");
    uf.unite(i, n1 + j);
  }
  std::vector<int> cls(static_cast<std::size_t>(n1 + n2));
  for (int i = 0; i < n1 + n2; ++i) cls[i] = uf.find(i);

  std::vector<double> mass(static_cast<std::size_t>(n1 + n2), 0.0);
  std::vector<int> touched;
  for (const auto& [i, j] : relation) {
    for (int a = 0; a < m; ++a) {
      auto fail = [&](const char* why) {
        result.bisimilar = false;
        result.counterexample = std::make_pair(i, j);
        result.action = a;
        result.reason = why;
      };
      if (std::abs(m1.reward(i, a) - m2.reward(j, a)) > tol) {
        fail("rewards differ");
        return result;
      }
      touched.clear();
      for (SparseRows::InnerIterator it(m1.transitions(), i * m + a); it; ++it) {
        const int c = cls[it.col()];
        if (mass[c] == 0.0) touched.push_back(c);
        mass[c] += it.value();
      }
      for (SparseRows::InnerIterator it(m2.transitions(), j * m + a); it; ++it) {
        const int c = cls[n1 + it.col()];
        if (mass[c] == 0.0) touched.push_back(c);
        mass[c] -= it.value();
      }
      bool ok = true;
      for (int c : touched) {
        if (std::abs(mass[c]) > tol) ok = false;
        mass[c] = 0.0;
      }
      if (!ok) {
        fail("class transition masses differ");
        return result;
      }
    }
  }
  return result;
}

FiniteMdp permute_states(const FiniteMdp& mdp, const std::vector<int>& permutation) {
  const int n = mdp.n_states();
  const int m = mdp.n_actions();
  if (static_cast<int>(permutation.size()) != n) throw ContractError("permute_states: permutation size mismatch");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int p : permutation) {
    if (p < 0 || p >= n || seen[p]) throw ContractError("permute_states: not a permutation");
    seen[p] = 1;
  }
  std::vector<Eigen::Triplet<double>> triplets;
  Vector rewards(static_cast<Eigen::Index>(n) * m);
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < m; ++a) {
      const int row = permutation[s] * m + a;
      rewards(row) = mdp.reward(s, a);
      for (SparseRows::InnerIterator it(mdp.transitions(), s * m + a); it; ++it)
        triplets.emplace_back(row, permutation[it.col()], it.value());
    }
  SparseRows p(static_cast<Eigen::Index>(n) * m, n);
  p.setFromTriplets(triplets.begin(), triplets.end());
  return FiniteMdp(n, m, std::move(p), std::move(rewards), mdp.discount(), mdp.r_max());
}

}  // namespace abx
