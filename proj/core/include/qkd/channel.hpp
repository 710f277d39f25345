#pragma once

// Quantum channel (one-way pulse transport) and the public classical channel.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qkd/quantum.hpp"

namespace qkd {

/// One time slot's emission. All photons of a pulse share `state`; a Ket4
/// state (carrier entangled with an eavesdropper probe) only ever rides on a
/// single-photon pulse.
struct Pulse {
  std::uint64_t slot = 0;
  std::uint32_t photons = 1;
  std::variant<Ket2, Ket4> state;

  bool is_joint() const noexcept { return std::holds_alternative<Ket4>(state); }
};

struct NoiseModel {
  double flip_p = 0.0;   // 90-degree rotation per pulse
  double loss_p = 0.0;   // non-detection, including dark counts
  double multi_p = 0.0;  // two-photon emission

  /// Throws Errc::InvalidConfig if any field is outside [0, 1].
  void validate() const;
};

/// An eavesdropper's access point on the quantum channel.
class ChannelTap {
 public:
  virtual ~ChannelTap() = default;
  virtual Pulse intercept(Pulse pulse, Rng& rng) = 0;
  /// Called after the receiver measured the carrier of a joint pulse.
  virtual void on_carrier_measured(std::uint64_t /*slot*/, const Ket2& /*residual_probe*/) {}
};

/// photons = 2 with probability multi_p, else 1. Always consumes one draw.
Pulse emit_pulse(std::uint64_t slot, const Ket2& state, const NoiseModel& noise, Rng& rng);

/// Effects are applied in the fixed order tap -> flip -> loss. Returns
/// nullopt when the pulse is lost. The flip and loss draws are always taken.
std::optional<Pulse> transmit(Pulse pulse, const NoiseModel& noise, ChannelTap* tap, Rng& rng);

// Public channel --------------------------------------------------------------

enum class Party : std::uint8_t { Alice, Bob };

enum class MessageKind : std::uint8_t {
  NonReceptions,
  BobBases,
  AliceVerdicts,
  ConclusiveSlots,
  SamplePositions,
  SampleBits,
  Abort,
  Permutation,
  Parity,
  PrivacySubsets,
};

std::string_view party_name(Party p) noexcept;
std::string_view message_kind_name(MessageKind k) noexcept;

using Payload = std::vector<std::uint8_t>;

struct Message {
  Party sender;
  MessageKind kind;
  Payload payload;
};

/// Append-only log of every public message. Everything here is visible to
/// the eavesdropper.
class PublicTranscript {
 public:
  void post(Party sender, MessageKind kind, Payload payload);
  const std::vector<Message>& read_all() const noexcept { return messages_; }
  std::size_t size() const noexcept { return messages_.size(); }

  /// One line per message: `sender TAB kind TAB payload-hex` + '\n'.
  std::string serialize() const;

 private:
  std::vector<Message> messages_;
};

/// Payload encoding: unsigned LEB128 varints, packed bit vectors as
/// varint(bit count) followed by MSB-first bytes, and raw bytes.
class PayloadWriter {
 public:
  PayloadWriter& varint(std::uint64_t v);
  PayloadWriter& indices(std::span<const std::uint64_t> values);
  PayloadWriter& bits(const Bitstring& b);
  PayloadWriter& byte(std::uint8_t b);
  PayloadWriter& u64(std::uint64_t v);
  Payload take() { return std::move(out_); }

 private:
  Payload out_;
};

/// Throws Errc::MalformedPayload on truncated input.
class PayloadReader {
 public:
  explicit PayloadReader(std::span<const std::uint8_t> data) : data_(data) {}
  std::uint64_t varint();
  std::vector<std::uint64_t> indices();
  Bitstring bits();
  std::uint8_t byte();
  std::uint64_t u64();
  bool done() const noexcept { return pos_ == data_.size(); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace qkd
