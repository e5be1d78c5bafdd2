#include "abx/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#ifndef ABX_VERSION
#define ABX_VERSION "unknown"
#endif

namespace abx {

std::string version_string() { return ABX_VERSION; }

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string warm_cold_csv(const std::vector<WarmColdRow>& rows) {
  std::ostringstream out;
  out << "goal_distance,suffix_k,start_x,start_y,repeat,steps,reached_goal,mistakes_total,mistakes_known_key,"
         "mistakes_missing_key,seed\n";
  for (const auto& row : rows) {
    const auto& r = row.record;
    out << row.goal_distance << ',' << row.suffix_k << ',' << r.start[0] << ',' << r.start[1] << ',' << r.repeat
        << ',' << r.steps << ',' << (r.reached_goal ? 1 : 0) << ',' << r.mistakes_total << ','
        << r.mistakes_known_key << ',' << r.mistakes_missing_key << ',' << r.seed << '\n';
  }
  return out.str();
}

std::string sign_chain_csv(const std::vector<SignChainRow>& rows) {
  std::ostringstream out;
  out << "abstraction,distance,repeat,optimal_steps,actual_steps,ratio,seed\n";
  for (const auto& r : rows)
    out << r.abstraction << ',' << r.distance << ',' << r.repeat << ',' << r.optimal_steps << ',' << r.actual_steps
        << ',' << format_double(r.ratio) << ',' << r.seed << '\n';
  return out.str();
}

std::string chain_error_csv(const std::vector<ChainErrorRow>& rows) {
  std::ostringstream out;
  out << "N,weighted_eps_p,max_eps_p\n";
  for (const auto& r : rows)
    out << r.N << ',' << format_double(r.weighted_eps_p) << ',' << format_double(r.max_eps_p) << '\n';
  return out.str();
}

std::string corollary_csv(const std::vector<CorollaryRow>& rows) {
  std::ostringstream out;
  out << "s_phi,T,eps,B,bound\n";
  for (const auto& r : rows)
    out << r.s_phi << ',' << r.T << ',' << format_double(r.eps) << ',' << format_double(r.B) << ','
        << format_double(r.bound) << '\n';
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string(), "cannot create directory: " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << content;
  out.close();
  if (!out) throw IoError(path.string(), "write failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  write_text(path, value.dump(2) + "\n");
}

nlohmann::json to_json(const SuiteResult& s) {
  nlohmann::json j{{"name", s.name},
                   {"trials", s.trials},
                   {"violations", s.violations},
                   {"min_slack", s.min_slack},
                   {"max_slack", s.max_slack},
                   {"max_error", s.max_error},
                   {"seed", s.seed},
                   {"seconds", s.seconds}};
  if (s.per_action_form_failures > 0) j["per_action_form_failures"] = s.per_action_form_failures;
  if (!s.counterexample.empty()) j["counterexample"] = nlohmann::json::parse(s.counterexample);
  return j;
}

nlohmann::json to_json(const VerificationReport& report) {
  nlohmann::json j;
  j["seed"] = report.seed;
  j["trials"] = report.trials;
  j["version"] = version_string();
  j["seconds"] = report.seconds;
  j["total_violations"] = report.total_violations();
  j["passed"] = report.passed();
  for (const auto& s : report.bound_suites) j["bound_suites"].push_back(to_json(s));
  for (const auto& s : report.identity_suites) j["identity_suites"].push_back(to_json(s));
  for (const auto& d : report.dirichlet)
    j["dirichlet"].push_back({{"n", d.n},
                              {"T", d.T},
                              {"samples", d.samples},
                              {"monte_carlo_mean", d.check.monte_carlo_mean},
                              {"standard_error", d.check.standard_error},
                              {"formula", d.check.formula},
                              {"within_3se", d.within_3se}});
  return j;
}

nlohmann::json run_manifest(const std::string& command, const nlohmann::json& config, std::uint64_t seed,
                            double seconds, const std::map<std::string, std::size_t>& row_counts) {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config;
  j["seed"] = seed;
  j["version"] = version_string();
  j["wall_clock_seconds"] = seconds;
  j["rows"] = nlohmann::json::object();
  for (const auto& [file, n] : row_counts) j["rows"][file] = n;
  return j;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& s) {
  int v = 0;
  const auto t = trim(s);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ContractError("not an integer: '" + s + "'");
  return v;
}

}  // namespace

std::map<std::string, std::string> parse_key_value(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ContractError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw ContractError("config line " + std::to_string(line_no) + ": empty key");
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path) {
  return parse_key_value(read_text(path));
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      out.push_back(to_int(item));
      continue;
    }
    const int a = to_int(item.substr(0, colon));
    const int b = to_int(item.substr(colon + 1));
    if (b < a) throw ContractError("empty range '" + trim(item) + "'");
    for (int v = a; v <= b; ++v) out.push_back(v);
  }
  if (out.empty()) throw ContractError("empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto t = trim(item);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
      throw ContractError("not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ContractError("empty list");
  return out;
}

}  // namespace abx
