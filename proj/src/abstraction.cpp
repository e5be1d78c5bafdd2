#include "abx/abstraction.hpp"

#include <algorithm>
#include <sstream>

namespace abx {

AbstractionFn::AbstractionFn(std::vector<int> map, int n_abstract, std::string id)
    : map_(std::move(map)), n_abstract_(n_abstract), id_(std::move(id)) {
  if (map_.empty()) throw ContractError("AbstractionFn: empty map");
  if (n_abstract_ <= 0) throw ContractError("AbstractionFn: abstract state count must be positive");
  for (int c : map_)
    if (c < 0 || c >= n_abstract_) throw ContractError("AbstractionFn: abstract id out of range");
}

AbstractionFn AbstractionFn::from_table(std::vector<int> map, std::string id) {
  if (map.empty()) throw ContractError("AbstractionFn::from_table: empty map");
  const int n = *std::max_element(map.begin(), map.end()) + 1;
  std::vector<char> used(static_cast<std::size_t>(std::max(n, 0)), 0);
  for (int c : map) {
    if (c < 0) throw ContractError("AbstractionFn::from_table: negative id");
    used[c] = 1;
  }
  if (std::find(used.begin(), used.end(), 0) != used.end())
    throw ContractError("AbstractionFn::from_table: ids are not contiguous");
  return AbstractionFn(std::move(map), n, std::move(id));
}

AbstractionFn AbstractionFn::identity(int n_ground) {
  std::vector<int> map(static_cast<std::size_t>(n_ground));
  for (int i = 0; i < n_ground; ++i) map[i] = i;
  return AbstractionFn(std::move(map), n_ground, "identity");
}

AbstractionFn AbstractionFn::all_to_one(int n_ground) {
  return AbstractionFn(std::vector<int>(static_cast<std::size_t>(n_ground), 0), 1, "all_to_one");
}

std::vector<int> AbstractionFn::class_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(n_abstract_), 0);
  for (int c : map_) ++sizes[c];
  return sizes;
}

// ---------------------------------------------------------------------------
// Keys

HistoryKey suffix_key(const History& h, int k) {
  if (k < 0) throw ContractError("suffix_key: k must be non-negative");
  HistoryKey key;
  const std::size_t len = h.length();
  std::size_t begin = 0;
  if (len < static_cast<std::size_t>(k)) {
    key.push_back(h.first_observation);
  } else {
    begin = len - static_cast<std::size_t>(k);
  }
  for (std::size_t t = begin; t < len; ++t) {
    key.push_back(h.steps[t].first);
    key.push_back(h.steps[t].second);
  }
  return key;
}

HistoryKey first_observation_key(const History& h) { return {h.first_observation}; }

HistoryKey full_history_key(const History& h) { return suffix_key(h, static_cast<int>(h.length()) + 1); }

int Codebook::intern(const HistoryKey& key) {
  auto [it, inserted] = ids_.try_emplace(key, static_cast<int>(ids_.size()));
  return it->second;
}

int Codebook::find(const HistoryKey& key) const {
  auto it = ids_.find(key);
  return it == ids_.end() ? -1 : it->second;
}

AbstractionFn abstraction_from_keys(const HistoryMdp& hmdp, const HistoryKeyFn& key, std::string id,
                                    Codebook* shared) {
  Codebook local;
  Codebook& book = shared != nullptr ? *shared : local;
  std::vector<int> map(static_cast<std::size_t>(hmdp.size()));
  map[0] = book.intern(kSinkKey);
  for (int i = 1; i < hmdp.size(); ++i) map[i] = book.intern(key(hmdp.histories[i]));
  return AbstractionFn(std::move(map), book.size(), std::move(id));
}

AbstractionFn suffix_abstraction(const HistoryMdp& hmdp, int k, Codebook* shared) {
  return abstraction_from_keys(
      hmdp, [k](const History& h) { return suffix_key(h, k); }, "suffix_" + std::to_string(k), shared);
}

AbstractionFn first_observation_abstraction(const HistoryMdp& hmdp, Codebook* shared) {
  return abstraction_from_keys(hmdp, first_observation_key, "first_obs", shared);
}

// ---------------------------------------------------------------------------
// Projections

Vector down_project(const AbstractionFn& phi, const Vector& v_abstract, int n_actions) {
  if (v_abstract.size() != static_cast<Eigen::Index>(phi.n_abstract()) * n_actions)
    throw ContractError("down_project: abstract vector has wrong dimension");
  Vector out(static_cast<Eigen::Index>(phi.n_ground()) * n_actions);
  for (int i = 0; i < phi.n_ground(); ++i)
    for (int a = 0; a < n_actions; ++a) out(i * n_actions + a) = v_abstract(phi(i) * n_actions + a);
  return out;
}

SparseRows down_project_rows(const AbstractionFn& phi, const SparseRows& rows_abstract, int n_actions) {
  if (rows_abstract.rows() != static_cast<Eigen::Index>(phi.n_abstract()) * n_actions)
    throw ContractError("down_project_rows: abstract row count mismatch");
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < phi.n_ground(); ++i)
    for (int a = 0; a < n_actions; ++a)
      for (SparseRows::InnerIterator it(rows_abstract, phi(i) * n_actions + a); it; ++it)
        triplets.emplace_back(i * n_actions + a, static_cast<int>(it.col()), it.value());
  SparseRows out(static_cast<Eigen::Index>(phi.n_ground()) * n_actions, rows_abstract.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

Vector up_project_distribution(const AbstractionFn& phi, const Vector& d) {
  if (d.size() != phi.n_ground()) throw ContractError("up_project_distribution: dimension mismatch");
  Vector out = Vector::Zero(phi.n_abstract());
  for (int i = 0; i < phi.n_ground(); ++i) out(phi(i)) += d(i);
  return out;
}

Vector up_project_state_action(const AbstractionFn& phi, const Vector& d, int n_actions) {
  if (d.size() != static_cast<Eigen::Index>(phi.n_ground()) * n_actions)
    throw ContractError("up_project_state_action: dimension mismatch");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(phi.n_abstract()) * n_actions);
  for (int i = 0; i < phi.n_ground(); ++i)
    for (int a = 0; a < n_actions; ++a) out(phi(i) * n_actions + a) += d(i * n_actions + a);
  return out;
}

SparseRows up_project_matrix(const AbstractionFn& phi, const SparseRows& p) {
  if (p.cols() != phi.n_ground()) throw ContractError("up_project_matrix: column count mismatch");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(p.nonZeros()));
  for (int row = 0; row < p.outerSize(); ++row)
    for (SparseRows::InnerIterator it(p, row); it; ++it)
      triplets.emplace_back(row, phi(static_cast<int>(it.col())), it.value());
  SparseRows out(p.rows(), phi.n_abstract());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

// ---------------------------------------------------------------------------
// Abstract model

AbstractMdp build_abstract_mdp(const FiniteMdp& ground, const AbstractionFn& phi, const NormalizedSr& weights,
                               EmptyClassPolicy empty) {
  const int n = ground.n_states();
  const int m = ground.n_actions();
  const int na = phi.n_abstract();
  if (phi.n_ground() != n) throw ContractError("build_abstract_mdp: abstraction does not cover the ground MDP");
  if (weights.size() != n * m) throw ContractError("build_abstract_mdp: weights must be over state-action pairs");

  const std::vector<int> sizes = phi.class_sizes();
  for (int c = 0; c < na; ++c)
    if (sizes[c] == 0 && empty == EmptyClassPolicy::kError) {
      std::ostringstream os;
      os << "build_abstract_mdp: abstract state " << c << " has no ground members";
      throw ContractError(os.str());
    }

  Vector class_weight = up_project_state_action(phi, weights.weights(), m);
  auto effective = [&](int i, int a) {
    const int row = phi(i) * m + a;
    if (class_weight(row) > 0.0) return weights(i * m + a) / class_weight(row);
    return 1.0 / sizes[phi(i)];
  };

  Vector rewards = Vector::Zero(static_cast<Eigen::Index>(na) * m);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) {
      const double w = effective(i, a);
      if (w == 0.0) continue;
      const int row = phi(i) * m + a;
      rewards(row) += w * ground.reward(i, a);
      for (SparseRows::InnerIterator it(ground.transitions(), i * m + a); it; ++it)
        triplets.emplace_back(row, phi(static_cast<int>(it.col())), w * it.value());
    }
  for (int c = 0; c < na; ++c)
    if (sizes[c] == 0)
      for (int a = 0; a < m; ++a) triplets.emplace_back(c * m + a, c, 1.0);

  SparseRows p(static_cast<Eigen::Index>(na) * m, na);
  p.setFromTriplets(triplets.begin(), triplets.end());
  FiniteMdp mdp(na, m, std::move(p), std::move(rewards), ground.discount(), ground.r_max());
  return AbstractMdp{std::move(mdp), phi, weights.weights()};
}

ApproximationErrors approximation_errors(const FiniteMdp& ground, const AbstractionFn& phi,
                                         const FiniteMdp& abstract) {
  const int m = ground.n_actions();
  if (abstract.n_actions() != m || abstract.n_states() != phi.n_abstract() || phi.n_ground() != ground.n_states())
    throw ContractError("approximation_errors: dimension mismatch");
  ApproximationErrors out;
  out.reward = (ground.rewards() - down_project(phi, abstract.rewards(), m)).cwiseAbs();
  SparseRows diff = up_project_matrix(phi, ground.transitions()) - down_project_rows(phi, abstract.transitions(), m);
  out.transition = Vector::Zero(diff.rows());
  for (int row = 0; row < diff.outerSize(); ++row)
    for (SparseRows::InnerIterator it(diff, row); it; ++it) out.transition(row) += std::abs(it.value());
  return out;
}

ReductionErrors reduction_errors(const FiniteMdp& ground, const AbstractionFn& phi, const FiniteMdp& abstract,
                                 const NormalizedSr& weights) {
  const ApproximationErrors e = approximation_errors(ground, phi, abstract);
  return {weighted_l1_norm(weights, e.reward), weighted_l1_norm(weights, e.transition)};
}

ReductionErrors max_norm_reduction_errors(const FiniteMdp& ground, const AbstractionFn& phi,
                                          const FiniteMdp& abstract) {
  const ApproximationErrors e = approximation_errors(ground, phi, abstract);
  return {e.reward.maxCoeff(), e.transition.maxCoeff()};
}

OodErrors ood_errors(const FiniteMdp& train, const FiniteMdp& test, const Vector& weights_abstract) {
  if (train.n_states() != test.n_states() || train.n_actions() != test.n_actions())
    throw ContractError("ood_errors: abstract state spaces differ");
  const SparseRows diff = train.transitions() - test.transitions();
  return {weighted_l1_norm(weights_abstract, Vector(train.rewards() - test.rewards())),
          weighted_l1_norm(weights_abstract, diff)};
}

}  // namespace abx
