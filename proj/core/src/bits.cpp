#include "qkd/bits.hpp"

#include <cctype>

#include "qkd/error.hpp"

namespace qkd {

Bitstring parse_bits(std::string_view text) {
  Bitstring out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '0' || c == '1') {
      out.push_back(static_cast<Bit>(c - '0'));
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      throw Error(Errc::MalformedPayload, std::string("not a bit character: '") + c + "'");
    }
  }
  return out;
}

std::string to_string(const Bitstring& bits) {
  std::string out;
  out.reserve(bits.size());
  for (Bit b : bits) out.push_back(b ? '1' : '0');
  return out;
}

std::vector<std::uint8_t> pack_bits(const Bitstring& bits) {
  std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

Bitstring unpack_bits(std::span<const std::uint8_t> bytes, std::size_t bit_count) {
  if (bit_count > bytes.size() * 8) {
    throw Error(Errc::MalformedPayload, "bit count exceeds packed data");
  }
  Bitstring out(bit_count);
  for (std::size_t i = 0; i < bit_count; ++i) {
    out[i] = static_cast<Bit>((bytes[i / 8] >> (7 - i % 8)) & 1u);
  }
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  std::vector<std::uint8_t> out;
  int pending = -1;
  for (char c : hex) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    const int v = hex_value(c);
    if (v < 0) throw Error(Errc::MalformedPayload, std::string("not a hex digit: '") + c + "'");
    if (pending < 0) {
      pending = v;
    } else {
      out.push_back(static_cast<std::uint8_t>((pending << 4) | v));
      pending = -1;
    }
  }
  if (pending >= 0) throw Error(Errc::MalformedPayload, "odd number of hex digits");
  return out;
}

Bit parity(const Bitstring& bits) {
  Bit p = 0;
  for (Bit b : bits) p ^= b;
  return p;
}

std::size_t hamming_distance(const Bitstring& a, const Bitstring& b) {
  if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "hamming distance of unequal lengths");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]);
  return d;
}

}  // namespace qkd
