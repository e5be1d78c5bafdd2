#include "abx/history.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace abx {

bool history_less(const History& a, const History& b) {
  if (a.length() != b.length()) return a.length() < b.length();
  if (a.first_observation != b.first_observation) return a.first_observation < b.first_observation;
  for (std::size_t i = 0; i < a.length(); ++i)
    if (a.steps[i].second != b.steps[i].second) return a.steps[i].second < b.steps[i].second;
  for (std::size_t i = 0; i < a.length(); ++i)
    if (a.steps[i].first != b.steps[i].first) return a.steps[i].first < b.steps[i].first;
  return false;
}

int HistoryMdp::index_of(const History& h) const {
  auto begin = histories.begin() + 1;
  auto it = std::lower_bound(begin, histories.end(), h, history_less);
  if (it == histories.end() || !(*it == h)) return -1;
  return static_cast<int>(it - histories.begin());
}

namespace {

struct Node {
  History history;
  LatentDistribution belief;
};

struct Edge {
  int parent;  // global index
  int action;
  double mass;
};

using Accumulator = std::map<int, std::vector<std::pair<LatentState, double>>>;

// Groups weighted successor states by emitted observation.
void emit(const GenerativePomdp& pomdp, const LatentState& state, double mass, Accumulator& out) {
  for (const auto& [o, q] : pomdp.observe(state))
    if (q > 0.0) out[o].emplace_back(state, mass * q);
}

LatentDistribution normalized(std::vector<std::pair<LatentState, double>> entries, double& total) {
  total = 0.0;
  for (const auto& e : entries) total += e.second;
  for (auto& e : entries) e.second /= total;
  return make_distribution(std::move(entries));
}

}  // namespace

HistoryMdp enumerate_histories(const GenerativePomdp& pomdp, const LatentDistribution& d0, int horizon,
                               std::size_t cap) {
  if (horizon < 1) throw ContractError("enumerate_histories: horizon must be at least 1");
  const int m = pomdp.n_actions();

  std::vector<History> histories(1);
  std::vector<LatentDistribution> beliefs(1);
  std::vector<double> start_mass(1, 0.0);

  std::vector<Node> level;
  {
    Accumulator roots;
    for (const auto& [s, p] : d0) emit(pomdp, s, p, roots);
    for (auto& [o, entries] : roots) {
      double total = 0.0;
      LatentDistribution b = normalized(std::move(entries), total);
      level.push_back({History{o, {}}, std::move(b)});
      start_mass.push_back(total);
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> rewards;
  triplets.emplace_back(0, 0, 1.0);
  rewards.assign(static_cast<std::size_t>(m), 0.0);
  for (int a = 1; a < m; ++a) triplets.emplace_back(a, 0, 1.0);

  for (int depth = 0; depth <= horizon; ++depth) {
    const int offset = static_cast<int>(histories.size());
    if (histories.size() + level.size() - 1 > cap) {
      std::ostringstream os;
      os << "history enumeration exceeded cap " << cap << " at depth " << depth;
      throw CapacityError(os.str(), depth);
    }
    for (auto& node : level) {
      histories.push_back(node.history);
      beliefs.push_back(node.belief);
    }
    rewards.resize(histories.size() * static_cast<std::size_t>(m), 0.0);

    std::vector<Node> next;
    std::vector<Edge> edges;
    for (std::size_t li = 0; li < level.size(); ++li) {
      const int global = offset + static_cast<int>(li);
      const Node& node = level[li];
      for (int a = 0; a < m; ++a) {
        const int row = global * m + a;
        double reward = 0.0;
        double sink = 0.0;
        Accumulator children;
        for (const auto& [s, b] : node.belief) {
          if (pomdp.terminal(s)) {
            sink += b;
            continue;
          }
          reward += b * pomdp.reward(s, a);
          if (depth == horizon) {
            sink += b;
            continue;
          }
          for (const auto& [s2, p] : pomdp.transition(s, a))
            if (p > 0.0) emit(pomdp, s2, b * p, children);
        }
        rewards[static_cast<std::size_t>(row)] = reward;
        if (sink > 0.0) triplets.emplace_back(row, 0, sink);
        for (auto& [o, entries] : children) {
          double total = 0.0;
          LatentDistribution cb = normalized(std::move(entries), total);
          History h = node.history;
          h.steps.emplace_back(a, o);
          next.push_back({std::move(h), std::move(cb)});
          edges.push_back({global, a, total});
        }
      }
    }
    if (next.empty()) {
      level.clear();
      break;
    }

    std::vector<int> order(next.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return history_less(next[x].history, next[y].history); });
    std::vector<int> position(next.size());
    for (std::size_t r = 0; r < order.size(); ++r) position[order[r]] = static_cast<int>(r);
    const int next_offset = offset + static_cast<int>(level.size());
    for (std::size_t c = 0; c < next.size(); ++c)
      triplets.emplace_back(edges[c].parent * m + edges[c].action, next_offset + position[c], edges[c].mass);

    std::vector<Node> sorted;
    sorted.reserve(next.size());
    for (int idx : order) sorted.push_back(std::move(next[idx]));
    level = std::move(sorted);
    if (depth == horizon) break;
  }

  const int n = static_cast<int>(histories.size());
  SparseRows p(static_cast<Eigen::Index>(n) * m, n);
  p.setFromTriplets(triplets.begin(), triplets.end());
  Vector r = Eigen::Map<const Vector>(rewards.data(), static_cast<Eigen::Index>(rewards.size()));
  Vector start = Vector::Zero(n);
  for (std::size_t i = 1; i < start_mass.size(); ++i) start(static_cast<Eigen::Index>(i)) = start_mass[i];

  FiniteMdp mdp(n, m, std::move(p), std::move(r), pomdp.discount, pomdp.r_max);
  return HistoryMdp{std::move(mdp), std::move(histories), std::move(beliefs), horizon,
                    NormalizedSr(std::move(start), SrKind::kState)};
}

}  // namespace abx
