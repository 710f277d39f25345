#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "qkd/protocol.hpp"

namespace qkd::cli {

/// Bumped whenever a report field is added, removed, renamed or reordered.
inline constexpr int kReportSchemaVersion = 1;

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(const std::string& text);

/// SHA-256 over the 8-byte big-endian bit count followed by the MSB-first
/// packed bits. Used for key-ledger fingerprints.
std::string key_fingerprint(const Bitstring& key);

/// Flat JSON object with a fixed field order. Stage timings are included
/// only when `with_timings` is set, since they are the one nondeterministic
/// part of a run.
std::string report_json(const SessionConfig& cfg, const SessionResult& result, bool with_timings);

/// Human-readable `name: value` lines.
std::string report_summary(const SessionResult& result);

}  // namespace qkd::cli
