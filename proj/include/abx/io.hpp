#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "abx/errors.hpp"
#include "abx/experiments.hpp"
#include "abx/verification.hpp"

namespace abx {

/// Version string baked in at configure time (git describe when available).
std::string version_string();

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double x);

std::string warm_cold_csv(const std::vector<WarmColdRow>& rows);
std::string sign_chain_csv(const std::vector<SignChainRow>& rows);
std::string chain_error_csv(const std::vector<ChainErrorRow>& rows);
std::string corollary_csv(const std::vector<CorollaryRow>& rows);

/// Writes `content`, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

nlohmann::json to_json(const SuiteResult& suite);
nlohmann::json to_json(const VerificationReport& report);

/// Run manifest: config echo, seed, version, wall-clock seconds and the row
/// count of every file written.
nlohmann::json run_manifest(const std::string& command, const nlohmann::json& config, std::uint64_t seed,
                            double seconds, const std::map<std::string, std::size_t>& row_counts);

/// `key = value` lines; blank lines and lines starting with '#' are skipped.
/// Keys may use '-' or '_' interchangeably and are stored with '-'.
std::map<std::string, std::string> parse_key_value(const std::string& text);
std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path);

/// Comma list of integers or inclusive ranges a:b, e.g. "1:3,8".
std::vector<int> parse_int_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace abx
