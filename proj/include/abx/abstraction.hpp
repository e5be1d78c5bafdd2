#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "abx/history.hpp"
#include "abx/tabular.hpp"

namespace abx {

/// Total map from ground state indices to abstract ids {0, ..., n_abstract-1}.
class AbstractionFn {
 public:
  AbstractionFn(std::vector<int> map, int n_abstract, std::string id);

  /// Ids must already form a contiguous range starting at 0.
  static AbstractionFn from_table(std::vector<int> map, std::string id = "table");
  static AbstractionFn identity(int n_ground);
  static AbstractionFn all_to_one(int n_ground);

  int operator()(int ground) const { return map_[static_cast<std::size_t>(ground)]; }
  int n_ground() const { return static_cast<int>(map_.size()); }
  int n_abstract() const { return n_abstract_; }
  const std::vector<int>& map() const { return map_; }
  const std::string& id() const { return id_; }
  /// Number of ground states per abstract id.
  std::vector<int> class_sizes() const;

 private:
  std::vector<int> map_;
  int n_abstract_;
  std::string id_;
};

/// Integer encoding of an abstraction key computed from a history.
using HistoryKey = std::vector<int>;
using HistoryKeyFn = std::function<HistoryKey(const History&)>;

/// Trailing k (action, observation) pairs; shorter histories keep o_0 and all
/// pairs. Full histories have odd key length and suffixes even length, so the
/// two can never collide.
HistoryKey suffix_key(const History& h, int k);
HistoryKey first_observation_key(const History& h);
HistoryKey full_history_key(const History& h);

/// Key reserved for the history MDP sink.
inline const HistoryKey kSinkKey{-1};

/// Shared assignment of abstract ids to keys, in first-occurrence order.
class Codebook {
 public:
  int intern(const HistoryKey& key);
  /// -1 when absent.
  int find(const HistoryKey& key) const;
  int size() const { return static_cast<int>(ids_.size()); }

 private:
  std::map<HistoryKey, int> ids_;
};

/// Abstraction over a history MDP by key; ids follow first occurrence in index
/// order. With a shared codebook, ids are interned there and n_abstract is
/// the codebook size after interning.
AbstractionFn abstraction_from_keys(const HistoryMdp& hmdp, const HistoryKeyFn& key, std::string id,
                                    Codebook* shared = nullptr);
AbstractionFn suffix_abstraction(const HistoryMdp& hmdp, int k, Codebook* shared = nullptr);
AbstractionFn first_observation_abstraction(const HistoryMdp& hmdp, Codebook* shared = nullptr);

/// (down v)(k(i, a)) = v(k(phi(i), a)).
Vector down_project(const AbstractionFn& phi, const Vector& v_abstract, int n_actions);
/// Abstract rows pulled down to ground state-action rows.
SparseRows down_project_rows(const AbstractionFn& phi, const SparseRows& rows_abstract, int n_actions);
/// (up d)(c) = sum_{phi(i) = c} d(i) over ground states.
Vector up_project_distribution(const AbstractionFn& phi, const Vector& d);
/// (up d)(k(c, a)) = sum_{phi(i) = c} d(k(i, a)).
Vector up_project_state_action(const AbstractionFn& phi, const Vector& d, int n_actions);
/// Columns aggregated by class: (up P)(row, c) = sum_{phi(j) = c} P(row, j).
SparseRows up_project_matrix(const AbstractionFn& phi, const SparseRows& p);

enum class EmptyClassPolicy {
  kError,
  /// Abstract ids without ground members become zero-reward self-loops.
  kAbsorbing,
};

struct AbstractMdp {
  FiniteMdp mdp;
  AbstractionFn phi;
  Vector weights;  // ground state-action weighting used for aggregation
};

/// Weighted-mean aggregation of rewards and up-projected transition rows per
/// (class, action). Pairs with zero class weight use the unweighted mean.
AbstractMdp build_abstract_mdp(const FiniteMdp& ground, const AbstractionFn& phi, const NormalizedSr& weights,
                               EmptyClassPolicy empty = EmptyClassPolicy::kError);

struct ApproximationErrors {
  Vector reward;      // |r - down r_phi| per ground state-action
  Vector transition;  // ||up P - down P_phi||_1 per ground state-action
};

ApproximationErrors approximation_errors(const FiniteMdp& ground, const AbstractionFn& phi,
                                         const FiniteMdp& abstract);

struct ReductionErrors {
  double eps_r = 0.0;
  double eps_p = 0.0;
};

ReductionErrors reduction_errors(const FiniteMdp& ground, const AbstractionFn& phi, const FiniteMdp& abstract,
                                 const NormalizedSr& weights);
ReductionErrors max_norm_reduction_errors(const FiniteMdp& ground, const AbstractionFn& phi,
                                          const FiniteMdp& abstract);

struct OodErrors {
  double eps_r = 0.0;
  double eps_p = 0.0;
};

/// Weighted L1 norms of r_train - r_test and P_train - P_test under abstract
/// state-action weights.
OodErrors ood_errors(const FiniteMdp& train, const FiniteMdp& test, const Vector& weights_abstract);

}  // namespace abx
