#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "abx/experiments.hpp"
#include "abx/io.hpp"

using namespace abx;
namespace fs = std::filesystem;

TEST(PolicyDictionary, EncodingRoundTripsLargeValues) {
  PolicyDictionary d(3);
  const std::vector<HistoryKey> keys{{}, {0}, {-1}, {13}, {14}, {1000000}, {2, 3, 4}, {2, 3, 4, 0}};
  for (const auto& k : keys) d.add(k, {1});
  EXPECT_EQ(d.size(), keys.size());
  auto sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(d.keys(), sorted);
  for (const auto& k : keys) {
    const auto* row = d.find(k);
    ASSERT_NE(row, nullptr);
    EXPECT_EQ(row[0], 0u);
    EXPECT_EQ(row[1], 1u);
  }
  EXPECT_EQ(d.find({5, 5}), nullptr);
  EXPECT_THROW(d.add({1}, {3}), ContractError);
}

TEST(PolicyDictionary, CountsAccumulate) {
  PolicyDictionary d(2);
  d.add({1, 2}, {0});
  d.add({1, 2}, {0, 1});
  d.add({1, 2}, {});
  const auto* row = d.find({1, 2});
  ASSERT_NE(row, nullptr);
  EXPECT_EQ(row[0], 2u);
  EXPECT_EQ(row[1], 1u);
}

TEST(BuildDictionary, SignChainFirstObservation) {
  const SignChainConfig cfg;
  const auto p = sign_chain(cfg);
  const auto d = build_policy_dictionary(p, sign_chain_starts(cfg, true), 10, first_observation_key,
                                         sign_chain_optimal_actions);
  ASSERT_EQ(d.size(), 2u);
  const auto* right = d.find({sign_chain_ids::kRightSign});
  const auto* left = d.find({sign_chain_ids::kLeftSign});
  ASSERT_NE(right, nullptr);
  ASSERT_NE(left, nullptr);
  EXPECT_EQ(right[sign_chain_ids::kLeft], 0u);
  EXPECT_GT(right[sign_chain_ids::kRight], 0u);
  EXPECT_EQ(left[sign_chain_ids::kRight], 0u);
  EXPECT_GT(left[sign_chain_ids::kLeft], 0u);
}

TEST(BuildDictionary, WarmColdSuffixOneKeys) {
  const auto p = warm_cold(WarmColdConfig{});
  const auto d = build_policy_dictionary(p, warm_cold_ball(3), 1,
                                         [](const History& h) { return suffix_key(h, 1); }, warm_cold_optimal_actions);
  std::set<HistoryKey> expected{{warm_cold_ids::kStart}};
  for (int a = 0; a < 4; ++a)
    for (int o : {warm_cold_ids::kWarm, warm_cold_ids::kCold}) expected.insert({a, o});
  const auto keys = d.keys();
  EXPECT_EQ(std::set<HistoryKey>(keys.begin(), keys.end()), expected);
}

TEST(BuildDictionary, EmptyStartsAndCap) {
  const auto p = warm_cold(WarmColdConfig{});
  const HistoryKeyFn key = [](const History& h) { return suffix_key(h, 2); };
  EXPECT_TRUE(build_policy_dictionary(p, {}, 4, key, warm_cold_optimal_actions).empty());
  EXPECT_THROW(build_policy_dictionary(p, warm_cold_ball(3), 6, key, warm_cold_optimal_actions, 100), CapacityError);
}

TEST(Rollouts, AccountingInvariants) {
  const auto p = warm_cold(WarmColdConfig{});
  const HistoryKeyFn key = [](const History& h) { return suffix_key(h, 3); };
  const auto d = build_policy_dictionary(p, warm_cold_ball(3), 3, key, warm_cold_optimal_actions);
  const RolloutSpec spec{3, 60, 11, 1};
  const auto recs = run_rollouts(p, d, key, "suffix_3", warm_cold_optimal_actions, warm_cold_ring(10), spec);
  ASSERT_EQ(recs.size(), 40u * 3u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    EXPECT_EQ(r.start_index, static_cast<int>(i / 3));
    EXPECT_EQ(r.repeat, static_cast<int>(i % 3));
    EXPECT_EQ(r.mistakes_total, r.mistakes_known_key + r.mistakes_missing_key);
    EXPECT_LE(r.mistakes_total, r.steps);
    EXPECT_LE(r.steps, 60);
    // each non-mistake reduces the distance by one and each mistake raises it
    if (r.reached_goal) EXPECT_EQ(r.steps - 2 * r.mistakes_total, 10);
    else EXPECT_EQ(r.steps, 60);
  }
}

TEST(Rollouts, EmptyDictionaryMatchesUniformWalk) {
  const SignChainConfig cfg;
  const auto p = sign_chain(cfg);
  const auto starts = sign_chain_starts(cfg, false);
  const RolloutSpec spec{4, 200, 5, 1};
  const auto recs = run_rollouts(p, PolicyDictionary(2), first_observation_key, "random", sign_chain_optimal_actions,
                                 starts, spec);
  // Replays the same seeded stream with an independent uniform walker.
  for (const auto& r : recs) {
    EXPECT_EQ(r.mistakes_known_key, 0);
    Rng rng(r.seed);
    LatentState s = r.start;
    sample_observation(p.observe(s), rng);
    int steps = 0;
    while (!p.terminal(s) && steps < 200) {
      const int a = rng.index(2);
      s = sample_latent(p.transition(s, a), rng);
      sample_observation(p.observe(s), rng);
      ++steps;
    }
    EXPECT_EQ(steps, r.steps);
  }
}

TEST(Rollouts, OptimalDictionaryMakesNoMistakes) {
  const SignChainConfig cfg;
  const auto p = sign_chain(cfg);
  const auto d = build_policy_dictionary(p, sign_chain_starts(cfg, true), 10, first_observation_key,
                                         sign_chain_optimal_actions);
  const auto recs = run_rollouts(p, d, first_observation_key, "first_obs", sign_chain_optimal_actions,
                                 sign_chain_starts(cfg, false), RolloutSpec{3, 500, 1, 1});
  for (const auto& r : recs) {
    EXPECT_EQ(r.mistakes_total, 0);
    EXPECT_EQ(r.steps, sign_chain_distance(r.start));
  }
}

TEST(Rollouts, RotatedStartsHaveMatchingMistakeMeans) {
  const auto p = warm_cold(WarmColdConfig{});
  const HistoryKeyFn key = [](const History& h) { return suffix_key(h, 2); };
  const auto d = build_policy_dictionary(p, warm_cold_ball(3), 2, key, warm_cold_optimal_actions);
  // the four axis starts at distance 6 are images of one another under rotation
  const std::vector<LatentState> starts{{6, 0, -1}, {0, 6, -1}, {-6, 0, -1}, {0, -6, -1}};
  const int walks = 400;
  const auto recs =
      run_rollouts(p, d, key, "suffix_2", warm_cold_optimal_actions, starts, RolloutSpec{walks, 500, 21, 0});
  std::vector<CellStats> cells;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    std::vector<double> v;
    for (int r = 0; r < walks; ++r) v.push_back(recs[s * walks + r].mistakes_total);
    cells.push_back(summarize(v));
  }
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const double se = std::sqrt(cells[0].sem * cells[0].sem + cells[i].sem * cells[i].sem);
    EXPECT_LE(std::abs(cells[0].mean - cells[i].mean), 4.0 * se) << "start " << i;
  }
}

TEST(Experiments, CsvBytesIndependentOfThreadCount) {
  WarmColdExperimentConfig wc;
  wc.k_list = {1, 3};
  wc.distances = {3, 10};
  wc.walks = 2;
  wc.max_steps = 80;
  wc.seed = 3;
  wc.threads = 1;
  const std::string a = warm_cold_csv(warm_cold_experiment(wc));
  wc.threads = 4;
  EXPECT_EQ(a, warm_cold_csv(warm_cold_experiment(wc)));

  SignChainExperimentConfig sc;
  sc.distances = {6, 10};
  sc.repeats = 3;
  sc.seed = 3;
  sc.threads = 1;
  const std::string b = sign_chain_csv(sign_chain_experiment(sc));
  sc.threads = 3;
  EXPECT_EQ(b, sign_chain_csv(sign_chain_experiment(sc)));
}

TEST(Experiments, SignChainRatioDefinition) {
  SignChainExperimentConfig sc;
  sc.distances = {8};
  sc.repeats = 2;
  sc.seed = 1;
  for (const auto& r : sign_chain_experiment(sc)) {
    EXPECT_EQ(r.optimal_steps, 16);
    EXPECT_DOUBLE_EQ(r.ratio, 16.0 / r.actual_steps);
    if (r.abstraction == "first_obs") EXPECT_EQ(r.ratio, 1.0);
  }
}

TEST(Experiments, ChainErrorSmallCases) {
  const auto rows = chain_error_experiment({2, 3});
  EXPECT_EQ(rows[0].weighted_eps_p, 0.0);
  EXPECT_EQ(rows[0].max_eps_p, 0.0);
  EXPECT_LE(rows[1].weighted_eps_p, rows[1].max_eps_p);
  EXPECT_GT(rows[1].max_eps_p, 1.0);
}

TEST(Summaries, MeanAndStandardError) {
  const auto c = summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(c.count, 4);
  EXPECT_DOUBLE_EQ(c.mean, 2.5);
  EXPECT_NEAR(c.sem, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(summarize({}).count, 0);
  EXPECT_EQ(summarize({7.0}).sem, 0.0);
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double x : {0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 12345.678, -2.5}) EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(0.35), "0.35");
}

TEST(Io, CsvHeaders) {
  auto header = [](const std::string& csv) { return csv.substr(0, csv.find('\n')); };
  EXPECT_EQ(header(warm_cold_csv({})),
            "goal_distance,suffix_k,start_x,start_y,repeat,steps,reached_goal,mistakes_total,mistakes_known_key,"
            "mistakes_missing_key,seed");
  EXPECT_EQ(header(sign_chain_csv({})), "abstraction,distance,repeat,optimal_steps,actual_steps,ratio,seed");
  EXPECT_EQ(header(chain_error_csv({})), "N,weighted_eps_p,max_eps_p");
  EXPECT_EQ(header(corollary_csv({})), "s_phi,T,eps,B,bound");
}

TEST(Io, KeyValueAndLists) {
  const auto kv = parse_key_value("# comment\n\nmax_steps = 40\n seed=9 \n");
  EXPECT_EQ(kv.at("max-steps"), "40");
  EXPECT_EQ(kv.at("seed"), "9");
  EXPECT_THROW(parse_key_value("novalue\n"), ContractError);
  EXPECT_EQ(parse_int_list("1:3,8"), (std::vector<int>{1, 2, 3, 8}));
  EXPECT_EQ(parse_double_list("0.5,2"), (std::vector<double>{0.5, 2.0}));
  EXPECT_THROW(parse_int_list("3:1"), ContractError);
  EXPECT_THROW(parse_int_list("x"), ContractError);
}

TEST(Io, WriteAndReadText) {
  const fs::path dir = fs::temp_directory_path() / "abx_io_test" / "nested";
  fs::remove_all(dir.parent_path());
  write_text(dir / "a.txt", "hello\n");
  EXPECT_EQ(read_text(dir / "a.txt"), "hello\n");
  EXPECT_THROW(read_text(dir / "missing.txt"), IoError);
  fs::remove_all(dir.parent_path());
}

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(ABX_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Cli, ExitCodesAndOutputs) {
  const fs::path out = fs::temp_directory_path() / "abx_cli_test";
  fs::remove_all(out);
  EXPECT_EQ(run("corollary --T 10 --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "corollary.csv"));
  EXPECT_TRUE(fs::exists(out / "run.json"));
  EXPECT_EQ(run("chain-error --N 2:5 --out " + out.string()), 0);
  EXPECT_EQ(run("chain-error --N 1 --out " + out.string()), 1);
  EXPECT_EQ(run("warm-cold --bogus"), 1);
  EXPECT_EQ(run("nosuchcommand"), 1);

  const fs::path cfg = out / "cfg.txt";
  std::ofstream(cfg) << "k = 1\ndistances = 3\nwalks = 1\nmax_steps = 30\n";
  EXPECT_EQ(run("warm-cold --config " + cfg.string() + " --out " + out.string()), 0);
  const std::string csv = read_text(out / "warm_cold.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 12);

  std::ofstream(out / "blocker") << "x";
  EXPECT_EQ(run("corollary --out " + (out / "blocker").string()), 3);
  fs::remove_all(out);
}
