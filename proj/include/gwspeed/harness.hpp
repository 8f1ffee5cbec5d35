#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwspeed/progeny.hpp"

namespace gwspeed {

/**
 * INI experiment config. Keys are addressed as "section.key"; list values
 * are comma separated and distributions are "value:mass" literals or
 * "@path" references to a file holding one.
 *
 * Every lookup is recorded so that leftover keys (typos) can be rejected
 * before any work starts.
 */
class Config {
 public:
  static Config parse(std::istream& in, std::filesystem::path source = {});
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double real(const std::string& key) const;
  double real(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::uint64_t count(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<std::string> list(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<double> reals(const std::string& key, std::vector<double> fallback) const;
  ProgenyDistribution dist(const std::string& key) const;

  /// ConfigError naming keys never looked up (sections in `ignore` skipped).
  void reject_unused(const std::set<std::string>& ignore = {}) const;

  const std::string& raw() const { return raw_; }
  const std::map<std::string, std::string>& values() const { return values_; }
  const std::filesystem::path& source() const { return source_; }

 private:
  const std::string& lookup(const std::string& key) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
  std::string raw_;
  std::filesystem::path source_;
};

/// Command-line overrides; unset fields fall back to the config [run]
/// section, then (workers only) the GWSPEED_WORKERS environment variable.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::filesystem::path> out;
};

struct RunResult {
  int exit_code = 0;
  std::string message;      // one-line status, printed by the CLI
  nlohmann::json summary;   // also written to summary.json
  nlohmann::json manifest;  // also written to manifest.json
  std::filesystem::path out_dir;
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"speed",     "compare",  "coupling-audit", "regen-stats",
                                              "threshold", "ell-check", "gen-k"};
  return kinds;
}

/// Runs one experiment, writing CSV, summary.json, manifest.json and SVG
/// plots into the output directory. Library errors are caught and mapped
/// to exit codes (2 config, 3 assertion, 4 numerical); the manifest is
/// still written and marked incomplete.
RunResult run_experiment(const std::string& kind, const Config& config, const RunOptions& options,
                         std::ostream& log);

/// `gwspeed <subcommand> --config <file> [--seed N] [--workers N] [--out DIR]`
int cli_main(int argc, char** argv);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

const char* version_string();

}  // namespace gwspeed
