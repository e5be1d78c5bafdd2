#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "abx/errors.hpp"
#include "abx/experiments.hpp"
#include "abx/io.hpp"
#include "abx/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kViolation = 2, kIo = 3 };

/// Expands `--config FILE` into `--key value` tokens placed right after the
/// subcommand name, so that explicit flags (which come later) take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  for (std::size_t i = 1; i + 1 < args.size(); ++i) {
    if (args[i] != "--config") continue;
    const auto kv = abx::read_key_value_file(args[i + 1]);
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    std::vector<std::string> injected;
    for (const auto& [k, v] : kv) {
      injected.push_back("--" + k);
      injected.push_back(v);
    }
    const std::size_t at = args.size() > 1 ? 2 : 1;
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(std::min(at, args.size())), injected.begin(),
                injected.end());
    break;
  }
  return args;
}

fs::path output_dir(const std::string& flag, const std::string& fallback) {
  if (const char* env = std::getenv("ABX_OUT"); env != nullptr && *env != '\0') return env;
  return flag.empty() ? fallback : flag;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void summary(const fs::path& path, std::size_t rows) {
  std::cout << "wrote " << path.string() << " (" << rows << " rows)\n";
}

void finish(const fs::path& dir, const std::string& command, const json& config, std::uint64_t seed,
            std::chrono::steady_clock::time_point t0, const std::string& csv_name, const std::string& csv,
            std::size_t rows) {
  abx::write_text(dir / csv_name, csv);
  summary(dir / csv_name, rows);
  abx::write_json(dir / "run.json", abx::run_manifest(command, config, seed, seconds_since(t0), {{csv_name, rows}}));
  summary(dir / "run.json", 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular state-abstraction laboratory: experiments and bound verification"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string out;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "Output directory, default runs/<subcommand> (ABX_OUT overrides)");
    sub->add_option("--seed", seed, "Base random seed");
    sub->add_option("--threads", threads, "Worker threads, 0 = all cores");
    sub->add_option("--config", "Key-value file of default flag values");
  };

  // warm-cold
  auto* wc = app.add_subcommand("warm-cold", "Policy-dictionary rollouts on the warm-cold lattice");
  int wc_radius = 3, wc_walks = 5, wc_max_steps = 500, wc_horizon = 0;
  std::string wc_k = "1:10", wc_dist = "3,10,50,100", wc_start_obs = "START";
  double wc_discount = 0.9;
  wc->add_option("--train-radius", wc_radius, "Radius of the training start diamond")->capture_default_str();
  wc->add_option("--k", wc_k, "Suffix lengths (list or a:b)")->capture_default_str();
  wc->add_option("--distances", wc_dist, "Test start distances")->capture_default_str();
  wc->add_option("--walks", wc_walks, "Walks per test start")->capture_default_str();
  wc->add_option("--max-steps", wc_max_steps, "Episode step cap")->capture_default_str();
  wc->add_option("--horizon", wc_horizon, "Dictionary depth, 0 = k")->capture_default_str();
  wc->add_option("--start-observation", wc_start_obs, "START or C")->check(CLI::IsMember({"START", "C"}));
  wc->add_option("--discount", wc_discount)->capture_default_str();
  common(wc);

  // sign-chain
  auto* sc = app.add_subcommand("sign-chain", "Sign-chain rollouts for three abstractions");
  int sc_left = 5, sc_right = 5, sc_repeats = 5, sc_max_steps = 500, sc_horizon = 10;
  std::string sc_dist = "6,8,10,15,20,25,30";
  sc->add_option("--train-left", sc_left, "Offset of the move-right post")->capture_default_str();
  sc->add_option("--train-right", sc_right, "Offset of the move-left post")->capture_default_str();
  sc->add_option("--distances", sc_dist, "Test post distances")->capture_default_str();
  sc->add_option("--repeats", sc_repeats)->capture_default_str();
  sc->add_option("--max-steps", sc_max_steps)->capture_default_str();
  sc->add_option("--horizon", sc_horizon, "Dictionary depth for full histories")->capture_default_str();
  common(sc);

  // chain-error
  auto* ce = app.add_subcommand("chain-error", "Transition error of the two-state chain abstraction");
  std::string ce_n = "2:100";
  double ce_p = 1.0, ce_discount = 0.9;
  ce->add_option("--N", ce_n, "Chain lengths")->capture_default_str();
  ce->add_option("--p", ce_p, "Left-move success probability")->capture_default_str();
  ce->add_option("--discount", ce_discount)->capture_default_str();
  common(ce);

  // corollary
  auto* co = app.add_subcommand("corollary", "Evaluate the abstraction-size trade-off expression");
  std::string co_t = "10,100", co_s = "2:64";
  double co_eps = 0.01, co_b = 0.0;
  int co_actions = 2;
  co->add_option("--T", co_t, "Training sample counts")->capture_default_str();
  co->add_option("--eps", co_eps)->capture_default_str();
  co->add_option("--B", co_b)->capture_default_str();
  co->add_option("--actions", co_actions)->capture_default_str();
  co->add_option("--s-phi", co_s, "Abstract state counts")->capture_default_str();
  common(co);

  // verify-bounds
  auto* vb = app.add_subcommand("verify-bounds", "Randomized bound and identity suites");
  int vb_trials = 500, vb_dirichlet = 100000;
  vb->add_option("--trials", vb_trials)->capture_default_str();
  vb->add_option("--dirichlet-samples", vb_dirichlet)->capture_default_str();
  common(vb);

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const abx::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  std::vector<const char*> cargv;
  for (const auto& a : args) cargv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (*wc) {
      const fs::path dir = output_dir(out, "runs/" + std::string(app.get_subcommands().front()->get_name()));
      abx::WarmColdExperimentConfig cfg;
      cfg.env.train_radius = wc_radius;
      cfg.env.discount = wc_discount;
      cfg.env.start_observation = wc_start_obs == "C" ? abx::warm_cold_ids::kCold : abx::warm_cold_ids::kStart;
      cfg.k_list = abx::parse_int_list(wc_k);
      cfg.distances = abx::parse_int_list(wc_dist);
      cfg.walks = wc_walks;
      cfg.max_steps = wc_max_steps;
      cfg.horizon = wc_horizon;
      cfg.seed = seed;
      cfg.threads = threads;
      const auto rows = abx::warm_cold_experiment(cfg);
      const json echo{{"train_radius", wc_radius}, {"k", cfg.k_list},         {"distances", cfg.distances},
                      {"walks", wc_walks},         {"max_steps", wc_max_steps}, {"horizon", wc_horizon},
                      {"start_observation", wc_start_obs}, {"discount", wc_discount}};
      finish(dir, "warm-cold", echo, seed, t0, "warm_cold.csv", abx::warm_cold_csv(rows), rows.size());
    } else if (*sc) {
      const fs::path dir = output_dir(out, "runs/" + std::string(app.get_subcommands().front()->get_name()));
      abx::SignChainExperimentConfig cfg;
      cfg.env.train_left = sc_left;
      cfg.env.train_right = sc_right;
      cfg.env.test_left = sc_left + 1;
      cfg.env.test_right = sc_right + 1;
      cfg.distances = abx::parse_int_list(sc_dist);
      cfg.repeats = sc_repeats;
      cfg.max_steps = sc_max_steps;
      cfg.horizon = sc_horizon;
      cfg.seed = seed;
      cfg.threads = threads;
      const auto rows = abx::sign_chain_experiment(cfg);
      const json echo{{"train_left", sc_left}, {"train_right", sc_right}, {"distances", cfg.distances},
                      {"repeats", sc_repeats}, {"max_steps", sc_max_steps}, {"horizon", sc_horizon}};
      finish(dir, "sign-chain", echo, seed, t0, "sign_chain.csv", abx::sign_chain_csv(rows), rows.size());
    } else if (*ce) {
      const fs::path dir = output_dir(out, "runs/" + std::string(app.get_subcommands().front()->get_name()));
      const auto n_list = abx::parse_int_list(ce_n);
      const auto rows = abx::chain_error_experiment(n_list, ce_p, ce_discount);
      const json echo{{"N", n_list}, {"p", ce_p}, {"discount", ce_discount}};
      finish(dir, "chain-error", echo, seed, t0, "chain_error.csv", abx::chain_error_csv(rows), rows.size());
    } else if (*co) {
      const fs::path dir = output_dir(out, "runs/" + std::string(app.get_subcommands().front()->get_name()));
      const auto t_list = abx::parse_int_list(co_t);
      const auto s_list = abx::parse_int_list(co_s);
      const auto rows = abx::corollary_experiment(t_list, co_eps, co_b, co_actions, s_list);
      const json echo{{"T", t_list}, {"eps", co_eps}, {"B", co_b}, {"actions", co_actions}, {"s_phi", s_list}};
      finish(dir, "corollary", echo, seed, t0, "corollary.csv", abx::corollary_csv(rows), rows.size());
    } else if (*vb) {
      const fs::path dir = output_dir(out, "runs/" + std::string(app.get_subcommands().front()->get_name()));
      if (vb_trials < 1) throw abx::ContractError("--trials must be at least 1");
      const auto report = abx::verify_bounds_suite(seed, vb_trials, threads, vb_dirichlet);
      abx::write_json(dir / "report.json", abx::to_json(report));
      summary(dir / "report.json", report.bound_suites.size() + report.identity_suites.size() + report.dirichlet.size());
      for (const auto& s : report.bound_suites)
        std::cout << "  " << s.name << ": " << s.trials << " trials, " << s.violations << " violations, min slack "
                  << s.min_slack << "\n";
      for (const auto& s : report.identity_suites)
        std::cout << "  " << s.name << ": " << s.trials << " trials, " << s.violations << " violations, max error "
                  << s.max_error << "\n";
      if (!report.passed()) {
        for (const auto& group : {report.bound_suites, report.identity_suites})
          for (const auto& s : group)
            if (!s.counterexample.empty()) std::cerr << s.name << " counterexample: " << s.counterexample << "\n";
        for (const auto& d : report.dirichlet)
          if (!d.within_3se)
            std::cerr << "dirichlet (" << d.n << "," << d.T << ") mean " << d.check.monte_carlo_mean << " vs "
                      << d.check.formula << "\n";
        return kViolation;
      }
    }
  } catch (const abx::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const abx::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
