#include "abx/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "abx/bounds.hpp"
#include "abx/errors.hpp"
#include "abx/parallel.hpp"
#include "abx/rng.hpp"

namespace abx {

// ---------------------------------------------------------------------------
// PolicyDictionary

// Each entry e = v + 1 becomes one nibble when e < 15, otherwise an escape
// nibble followed by eight nibbles of the 32-bit value. An odd nibble count is
// padded with a trailing escape.
std::string PolicyDictionary::encode(const HistoryKey& key) {
  std::string out;
  out.reserve(key.size() / 2 + 1);
  int pending = -1;
  auto put = [&](unsigned nibble) {
    if (pending < 0) {
      pending = static_cast<int>(nibble);
    } else {
      out.push_back(static_cast<char>((pending << 4) | static_cast<int>(nibble)));
      pending = -1;
    }
  };
  for (int v : key) {
    const auto e = static_cast<std::uint32_t>(v + 1);
    if (e < 15) {
      put(e);
    } else {
      put(15);
      for (int shift = 28; shift >= 0; shift -= 4) put((e >> shift) & 0xF);
    }
  }
  if (pending >= 0) put(15);
  return out;
}

namespace {

HistoryKey decode(const std::string& packed) {
  std::vector<unsigned> nibbles;
  for (char c : packed) {
    const auto b = static_cast<unsigned char>(c);
    nibbles.push_back(b >> 4);
    nibbles.push_back(b & 0xF);
  }
  HistoryKey key;
  for (std::size_t i = 0; i < nibbles.size();) {
    if (nibbles[i] < 15) {
      key.push_back(static_cast<int>(nibbles[i]) - 1);
      ++i;
    } else if (i + 8 < nibbles.size()) {
      std::uint32_t e = 0;
      for (std::size_t j = 1; j <= 8; ++j) e = (e << 4) | nibbles[i + j];
      key.push_back(static_cast<int>(e) - 1);
      i += 9;
    } else {
      break;
    }
  }
  return key;
}

}  // namespace

void PolicyDictionary::add(const HistoryKey& key, const std::vector<int>& actions) {
  if (actions.empty()) return;
  auto [it, inserted] = index_.try_emplace(encode(key), static_cast<std::uint32_t>(counts_.size()));
  if (inserted) {
    if (counts_.size() + n_actions_ > std::numeric_limits<std::uint32_t>::max())
      throw CapacityError("policy dictionary: arena exhausted", 0);
    counts_.resize(counts_.size() + n_actions_, 0);
  }
  for (int a : actions) {
    if (a < 0 || a >= n_actions_) throw ContractError("policy dictionary: action out of range");
    std::uint32_t& c = counts_[it->second + a];
    if (c == std::numeric_limits<std::uint32_t>::max()) throw CapacityError("policy dictionary: count overflow", 0);
    ++c;
  }
}

const std::uint32_t* PolicyDictionary::find(const HistoryKey& key) const {
  const auto it = index_.find(encode(key));
  return it == index_.end() ? nullptr : counts_.data() + it->second;
}

std::vector<HistoryKey> PolicyDictionary::keys() const {
  std::vector<HistoryKey> out;
  out.reserve(index_.size());
  for (const auto& [packed, offset] : index_) out.push_back(decode(packed));
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct DictionaryBuilder {
  const GenerativePomdp& pomdp;
  int horizon;
  const HistoryKeyFn& key;
  const OptimalActionsFn& optimal;
  std::size_t cap;
  PolicyDictionary dict;
  std::size_t nodes = 0;

  void expand(History& h, const std::vector<LatentState>& group) {
    if (++nodes > cap) throw CapacityError("build_policy_dictionary: node cap exceeded", static_cast<int>(h.length()));
    std::vector<const LatentState*> live;
    for (const auto& s : group)
      if (!pomdp.terminal(s)) live.push_back(&s);
    if (live.empty()) return;
    const HistoryKey k = key(h);
    for (const LatentState* s : live) dict.add(k, optimal(*s));
    if (static_cast<int>(h.length()) >= horizon) return;
    for (int a = 0; a < pomdp.n_actions(); ++a) {
      std::map<int, std::vector<LatentState>> next;
      for (const LatentState* s : live)
        for (const auto& [s2, p] : pomdp.transition(*s, a)) {
          if (!(p > 0.0)) continue;
          for (const auto& [o, q] : pomdp.observe(s2))
            if (q > 0.0) next[o].push_back(s2);
        }
      for (const auto& [o, g] : next) {
        h.steps.emplace_back(a, o);
        expand(h, g);
        h.steps.pop_back();
      }
    }
  }
};

}  // namespace

PolicyDictionary build_policy_dictionary(const GenerativePomdp& pomdp, const std::vector<LatentState>& starts,
                                         int horizon, const HistoryKeyFn& key, const OptimalActionsFn& optimal,
                                         std::size_t cap) {
  if (horizon < 0) throw ContractError("build_policy_dictionary: horizon must be non-negative");
  DictionaryBuilder b{pomdp, horizon, key, optimal, cap, PolicyDictionary(pomdp.n_actions())};
  std::map<int, std::vector<LatentState>> roots;
  for (const auto& s : starts)
    for (const auto& [o, q] : pomdp.observe(s))
      if (q > 0.0) roots[o].push_back(s);
  for (const auto& [o, g] : roots) {
    History h{o, {}};
    b.expand(h, g);
  }
  return std::move(b.dict);
}

std::vector<RolloutRecord> run_rollouts(const GenerativePomdp& pomdp, const PolicyDictionary& dict,
                                        const HistoryKeyFn& key, const std::string& abstraction_id,
                                        const OptimalActionsFn& optimal, const std::vector<LatentState>& test_starts,
                                        const RolloutSpec& spec) {
  if (spec.walks_per_start < 1) throw ContractError("run_rollouts: walks_per_start must be at least 1");
  if (spec.max_steps < 0) throw ContractError("run_rollouts: max_steps must be non-negative");
  const int m = pomdp.n_actions();
  const std::size_t walks = static_cast<std::size_t>(spec.walks_per_start);
  std::vector<RolloutRecord> records(test_starts.size() * walks);

  parallel_for(records.size(), spec.threads, [&](std::size_t cell) {
    const int start_index = static_cast<int>(cell / walks);
    const int repeat = static_cast<int>(cell % walks);
    const LatentState& start = test_starts[static_cast<std::size_t>(start_index)];
    RolloutRecord r;
    r.environment = pomdp.id;
    r.abstraction = abstraction_id;
    r.start = start;
    r.start_index = start_index;
    r.repeat = repeat;
    r.seed = stream_seed({spec.seed, hash_name(pomdp.id), hash_name(abstraction_id),
                          static_cast<std::uint64_t>(start[0]), static_cast<std::uint64_t>(start[1]),
                          static_cast<std::uint64_t>(start[2]), static_cast<std::uint64_t>(repeat)});
    Rng rng(r.seed);
    std::vector<double> weights(static_cast<std::size_t>(m));

    LatentState s = start;
    History h{sample_observation(pomdp.observe(s), rng), {}};
    while (!pomdp.terminal(s) && r.steps < spec.max_steps) {
      const std::uint32_t* row = dict.find(key(h));
      int a = 0;
      if (row != nullptr) {
        for (int i = 0; i < m; ++i) weights[i] = static_cast<double>(row[i]);
        a = rng.categorical(weights);
      } else {
        a = rng.index(m);
      }
      const std::vector<int> best = optimal(s);
      if (std::find(best.begin(), best.end(), a) == best.end()) {
        ++r.mistakes_total;
        ++(row != nullptr ? r.mistakes_known_key : r.mistakes_missing_key);
      }
      s = sample_latent(pomdp.transition(s, a), rng);
      h.steps.emplace_back(a, sample_observation(pomdp.observe(s), rng));
      ++r.steps;
    }
    r.reached_goal = pomdp.terminal(s);
    records[cell] = std::move(r);
  });
  return records;
}

// ---------------------------------------------------------------------------
// Drivers

std::vector<WarmColdRow> warm_cold_experiment(const WarmColdExperimentConfig& config) {
  if (config.k_list.empty() || config.distances.empty()) throw ContractError("warm_cold_experiment: empty sweep");
  for (int k : config.k_list)
    if (k < 0) throw ContractError("warm_cold_experiment: k must be non-negative");
  for (int d : config.distances)
    if (d < 1) throw ContractError("warm_cold_experiment: distances must be positive");
  const GenerativePomdp pomdp = warm_cold(config.env);
  const std::vector<LatentState> train = warm_cold_ball(config.env.train_radius);
  std::vector<WarmColdRow> rows;
  for (int k : config.k_list) {
    const HistoryKeyFn key = [k](const History& h) { return suffix_key(h, k); };
    const PolicyDictionary dict = build_policy_dictionary(pomdp, train, config.horizon > 0 ? config.horizon : k, key,
                                                          warm_cold_optimal_actions);
    for (int d : config.distances) {
      const RolloutSpec spec{config.walks, config.max_steps, config.seed, config.threads};
      for (auto& rec : run_rollouts(pomdp, dict, key, "suffix_" + std::to_string(k), warm_cold_optimal_actions,
                                    warm_cold_ring(d), spec))
        rows.push_back({d, k, std::move(rec)});
    }
  }
  return rows;
}

std::vector<SignChainRow> sign_chain_experiment(const SignChainExperimentConfig& config) {
  if (config.distances.empty()) throw ContractError("sign_chain_experiment: empty distance list");
  if (config.repeats < 1) throw ContractError("sign_chain_experiment: repeats must be at least 1");
  const GenerativePomdp train_env = sign_chain(config.env);
  const auto train_starts = sign_chain_starts(config.env, true);

  struct Variant {
    std::string id;
    HistoryKeyFn key;
    PolicyDictionary dict;
  };
  std::vector<Variant> variants;
  variants.push_back({"first_obs", first_observation_key,
                      build_policy_dictionary(train_env, train_starts, config.horizon, first_observation_key,
                                              sign_chain_optimal_actions)});
  variants.push_back({"full_history", full_history_key,
                      build_policy_dictionary(train_env, train_starts, config.horizon, full_history_key,
                                              sign_chain_optimal_actions)});
  variants.push_back({"random", first_observation_key, PolicyDictionary(train_env.n_actions())});

  std::vector<SignChainRow> rows;
  for (const auto& v : variants) {
    for (int d : config.distances) {
      SignChainConfig env = config.env;
      env.test_left = d;
      env.test_right = d;
      const GenerativePomdp pomdp = sign_chain(env);
      const auto starts = sign_chain_starts(env, false);
      const RolloutSpec spec{config.repeats, config.max_steps, config.seed, config.threads};
      const auto recs = run_rollouts(pomdp, v.dict, v.key, v.id, sign_chain_optimal_actions, starts, spec);
      for (int rep = 0; rep < config.repeats; ++rep) {
        SignChainRow row;
        row.abstraction = v.id;
        row.distance = d;
        row.repeat = rep;
        for (std::size_t s = 0; s < starts.size(); ++s) {
          row.optimal_steps += sign_chain_distance(starts[s]);
          row.actual_steps += recs[s * static_cast<std::size_t>(config.repeats) + static_cast<std::size_t>(rep)].steps;
        }
        row.ratio = row.actual_steps > 0 ? static_cast<double>(row.optimal_steps) / row.actual_steps : 1.0;
        row.seed = config.seed;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<ChainErrorRow> chain_error_experiment(const std::vector<int>& n_list, double p, double discount) {
  std::vector<ChainErrorRow> rows;
  for (int n : n_list) {
    const ChainConfig cfg{n, p, discount};
    const FiniteMdp mdp = chain(cfg);
    const AbstractionFn phi = chain_abstraction(cfg);
    const NormalizedSr w = normalized_sr(mdp, chain_always_left(cfg), chain_start(cfg), SrKind::kStateAction);
    const AbstractMdp abs = build_abstract_mdp(mdp, phi, w);
    rows.push_back({n, reduction_errors(mdp, phi, abs.mdp, w).eps_p, max_norm_reduction_errors(mdp, phi, abs.mdp).eps_p});
  }
  return rows;
}

std::vector<CorollaryRow> corollary_experiment(const std::vector<int>& t_list, double eps, double B, int n_actions,
                                               const std::vector<int>& s_phi_list) {
  std::vector<CorollaryRow> rows;
  for (int t : t_list)
    for (int s : s_phi_list) rows.push_back({s, t, eps, B, corollary_expression(s, n_actions, t, eps, B)});
  return rows;
}

CellStats summarize(const std::vector<double>& values) {
  CellStats c;
  c.count = static_cast<int>(values.size());
  if (values.empty()) return c;
  double sum = 0.0;
  for (double v : values) sum += v;
  c.mean = sum / c.count;
  if (c.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - c.mean) * (v - c.mean);
    c.sem = std::sqrt(ss / (c.count - 1) / c.count);
  }
  return c;
}

}  // namespace abx
