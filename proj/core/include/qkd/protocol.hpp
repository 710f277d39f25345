#pragma once

// Session orchestration: quantum transmission, sifting, error estimation,
// then reconciliation and privacy amplification.

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkd/alphabet.hpp"
#include "qkd/channel.hpp"
#include "qkd/distill.hpp"
#include "qkd/eve.hpp"

namespace qkd {

struct SessionConfig {
  Protocol protocol = Protocol::BB84;
  std::uint64_t n_pulses = 10000;
  double theta = std::numbers::pi / 8;
  NoiseModel noise;
  EveStrategy eve = NoEve{};
  double sample_fraction = 0.1;
  double r_max = 0.12;
  ReconcileParams reconcile;
  std::uint32_t security_parameter = 10;
  /// Multiplier in the k = ceil(leak_factor * R * n) bound.
  double leak_factor = 2.0;
  std::uint64_t seed = 1;

  /// Throws Errc::InvalidConfig (or the strategy's own validation error).
  void validate() const;
};

struct SlotRecord {
  Bit alice_bit = 0;
  std::optional<Basis> alice_basis;       // BB84
  bool received = false;
  std::optional<Basis> bob_basis;         // BB84, received slots
  std::optional<PovmOutcome> bob_outcome; // B92, received slots
  std::optional<Bit> bob_bit;             // absent if lost or inconclusive
};

struct Stage1Record {
  Protocol protocol = Protocol::BB84;
  std::vector<SlotRecord> slots;
};

Stage1Record run_stage1_bb84(const SessionConfig& cfg, Rng& rng, ChannelTap* tap);
Stage1Record run_stage1_b92(const SessionConfig& cfg, Rng& rng, ChannelTap* tap);

/// One BB84 slot with every choice fixed in advance. A missing bob_basis
/// marks a slot Bob did not receive.
struct RecordedSlot {
  Basis alice_basis = Basis::Rectilinear;
  Bit alice_bit = 0;
  std::optional<Basis> bob_basis;
  Bit bob_bit = 0;
};

/// Builds a stage-1 record from fixed choices without touching any Rng.
Stage1Record replay_bb84(std::span<const RecordedSlot> slots);

struct RawKeys {
  Bitstring alice;
  Bitstring bob;
  std::vector<std::uint64_t> slots;
};

/// Posts Bob's non-receptions and bases, then Alice's verdicts. Keeps
/// received slots with matching bases, in slot order.
/// Throws Errc::EmptySiftedKey.
RawKeys sift_bb84(const Stage1Record& record, PublicTranscript& transcript);

/// Posts Bob's conclusive slots. Throws Errc::EmptySiftedKey.
RawKeys sift_b92(const Stage1Record& record, PublicTranscript& transcript);

struct ErrorEstimate {
  double rate = 0.0;
  std::size_t disclosed = 0;
  std::size_t disagreements = 0;
  /// Tentative keys: raw keys with the disclosed positions removed.
  Bitstring alice;
  Bitstring bob;
  bool aborted = false;
};

/// Discloses a uniformly random ceil(f * len)-subset of positions, removes it
/// from both keys, and aborts when the observed rate exceeds r_max.
ErrorEstimate estimate_error(const Bitstring& alice, const Bitstring& bob, double sample_fraction, double r_max,
                             Rng& rng, PublicTranscript& transcript);

struct StageTimings {
  double stage1_ms = 0;
  double sifting_ms = 0;
  double estimation_ms = 0;
  double reconciliation_ms = 0;
  double amplification_ms = 0;
  double total_ms = 0;
};

struct RunReport {
  Protocol protocol = Protocol::BB84;
  std::uint64_t n_pulses = 0;
  std::uint64_t seed = 0;
  std::uint64_t received_count = 0;
  std::uint64_t sifted_count = 0;
  std::uint64_t disclosed_count = 0;
  /// Estimated from the disclosed sample.
  double error_rate = 0.0;
  /// Ground truth over the entire sifted key (simulator-only knowledge).
  double sifted_error_rate = 0.0;
  bool aborted = false;
  std::string abort_reason;
  std::uint64_t reconciled_length = 0;
  bool reconciliation_ok = false;
  std::uint64_t parity_bits_disclosed = 0;
  std::uint64_t bits_discarded = 0;
  std::uint64_t leaked_bits = 0;  // k
  std::uint32_t security_parameter = 0;
  std::uint64_t final_key_length = 0;
  Bitstring final_key_alice;
  Bitstring final_key_bob;
  std::uint64_t eve_recorded_slots = 0;
  std::uint64_t eve_guessed_count = 0;
  std::optional<double> eve_guess_accuracy;
  double eve_final_key_info_estimate = 0.0;
  std::uint64_t transcript_messages = 0;
  StageTimings timings;
};

struct SessionResult {
  RunReport report;
  PublicTranscript transcript;
  Stage1Record stage1;
  std::optional<EveRecord> eve_record;
  RawKeys raw;
};

/// Deterministic in cfg (seed included), apart from the timings.
SessionResult run_session_detailed(const SessionConfig& cfg);
RunReport run_session(const SessionConfig& cfg);

/// Fraction of Eve's guesses that match Alice's bit in the same slot.
std::optional<double> guess_accuracy(const EveGuess& guess, const Stage1Record& stage1);

}  // namespace qkd
