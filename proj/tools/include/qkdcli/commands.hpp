#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qkd/protocol.hpp"

namespace qkd::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // I/O errors, failed fixtures, length mismatches
  kExitUsage = 2,
  kExitKeyReuse = 3,
};

/// Flags shared by `run` and `sweep`.
struct RunOptions {
  std::string protocol = "bb84";
  std::uint64_t n = 10000;
  std::uint64_t seed = 1;
  double flip = 0.0;
  double loss = 0.0;
  double multi = 0.0;
  double theta = 0.39269908169872414;  // pi / 8
  std::string eve = "none";
  double eve_frac = 1.0;
  /// Translucent carriers' outgoing angle; defaults to theta / 2.
  std::optional<double> eve_theta_out;
  double eve_mix = 0.78539816339744831;  // pi / 4
  double sample_frac = 0.1;
  double rmax = 0.12;
  std::uint32_t sec_param = 10;
  std::size_t n_clean = 10;
  std::size_t max_passes = 4;
};

/// Throws qkd::Error (InvalidConfig and friends) for values the library
/// rejects.
SessionConfig build_config(const RunOptions& opts);

/// Reads `key = value` lines (`#` starts a comment) into `--key=value`
/// arguments. Throws std::runtime_error when the file cannot be read or a
/// line has no '='.
std::vector<std::string> config_file_arguments(const std::filesystem::path& path);

/// Append-only record of one-time-pad key fingerprints.
class KeyLedger {
 public:
  explicit KeyLedger(std::filesystem::path path) : path_(std::move(path)) {}
  /// A missing ledger file counts as empty. Throws std::runtime_error on
  /// read failure.
  bool contains(const std::string& fingerprint) const;
  /// Appends `fingerprint TAB timestamp`.
  void append(const std::string& fingerprint, const std::string& timestamp) const;
  std::size_t size() const;

 private:
  std::filesystem::path path_;
};

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

/// Entry point. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qkd::cli
