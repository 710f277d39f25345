#include "qkd/channel.hpp"

#include <numbers>

namespace qkd {

void NoiseModel::validate() const {
  auto check = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(Errc::InvalidConfig, std::string(name) + " must lie in [0, 1]");
    }
  };
  check(flip_p, "flip_p");
  check(loss_p, "loss_p");
  check(multi_p, "multi_p");
}

Pulse emit_pulse(std::uint64_t slot, const Ket2& state, const NoiseModel& noise, Rng& rng) {
  const bool multi = rng.bernoulli(noise.multi_p);
  return Pulse{slot, multi ? 2u : 1u, state};
}

namespace {

const Matrix2& flip_rotation() {
  static const Matrix2 r = polarization_rotation(std::numbers::pi / 2);
  return r;
}

void apply_flip(Pulse& pulse) {
  if (auto* single = std::get_if<Ket2>(&pulse.state)) {
    pulse.state = apply_unitary(flip_rotation(), *single);
  } else {
    static const Matrix4 on_carrier = kron(flip_rotation(), Matrix2::identity());
    pulse.state = apply_unitary(on_carrier, std::get<Ket4>(pulse.state));
  }
}

}  // namespace

std::optional<Pulse> transmit(Pulse pulse, const NoiseModel& noise, ChannelTap* tap, Rng& rng) {
  if (tap != nullptr) pulse = tap->intercept(std::move(pulse), rng);
  if (rng.bernoulli(noise.flip_p)) apply_flip(pulse);
  if (rng.bernoulli(noise.loss_p)) return std::nullopt;
  return pulse;
}

std::string_view party_name(Party p) noexcept { return p == Party::Alice ? "alice" : "bob"; }

std::string_view message_kind_name(MessageKind k) noexcept {
  switch (k) {
    case MessageKind::NonReceptions: return "non-receptions";
    case MessageKind::BobBases: return "bob-bases";
    case MessageKind::AliceVerdicts: return "alice-verdicts";
    case MessageKind::ConclusiveSlots: return "conclusive-slots";
    case MessageKind::SamplePositions: return "sample-positions";
    case MessageKind::SampleBits: return "sample-bits";
    case MessageKind::Abort: return "abort";
    case MessageKind::Permutation: return "permutation";
    case MessageKind::Parity: return "parity";
    case MessageKind::PrivacySubsets: return "pa-subsets";
  }
  return "?";
}

void PublicTranscript::post(Party sender, MessageKind kind, Payload payload) {
  messages_.push_back(Message{sender, kind, std::move(payload)});
}

std::string PublicTranscript::serialize() const {
  std::string out;
  for (const auto& m : messages_) {
    out += party_name(m.sender);
    out += '\t';
    out += message_kind_name(m.kind);
    out += '\t';
    out += to_hex(m.payload);
    out += '\n';
  }
  return out;
}

PayloadWriter& PayloadWriter::varint(std::uint64_t v) {
  while (v >= 0x80) {
    out_.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out_.push_back(static_cast<std::uint8_t>(v));
  return *this;
}

PayloadWriter& PayloadWriter::indices(std::span<const std::uint64_t> values) {
  varint(values.size());
  for (auto v : values) varint(v);
  return *this;
}

PayloadWriter& PayloadWriter::bits(const Bitstring& b) {
  varint(b.size());
  const auto packed = pack_bits(b);
  out_.insert(out_.end(), packed.begin(), packed.end());
  return *this;
}

PayloadWriter& PayloadWriter::byte(std::uint8_t b) {
  out_.push_back(b);
  return *this;
}

PayloadWriter& PayloadWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

std::uint64_t PayloadReader::varint() {
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    const std::uint8_t b = byte();
    v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
    if ((b & 0x80) == 0) return v;
  }
  throw Error(Errc::MalformedPayload, "varint longer than 64 bits");
}

std::vector<std::uint64_t> PayloadReader::indices() {
  const auto n = varint();
  if (n > data_.size() - pos_) throw Error(Errc::MalformedPayload, "index count exceeds payload");
  std::vector<std::uint64_t> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(varint());
  return out;
}

Bitstring PayloadReader::bits() {
  const auto n = varint();
  const std::size_t bytes = (n + 7) / 8;
  if (bytes > data_.size() - pos_) throw Error(Errc::MalformedPayload, "bit vector exceeds payload");
  auto out = unpack_bits(data_.subspan(pos_, bytes), n);
  pos_ += bytes;
  return out;
}

std::uint8_t PayloadReader::byte() {
  if (pos_ >= data_.size()) throw Error(Errc::MalformedPayload, "payload truncated");
  return data_[pos_++];
}

std::uint64_t PayloadReader::u64() {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | byte();
  return v;
}

}  // namespace qkd
