#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qkd {

using Bit = std::uint8_t;
using Bitstring = std::vector<Bit>;

/// Parses a string of '0'/'1' characters; whitespace is ignored.
Bitstring parse_bits(std::string_view text);
std::string to_string(const Bitstring& bits);

/// MSB-first packing; the final byte is zero-padded.
std::vector<std::uint8_t> pack_bits(const Bitstring& bits);
Bitstring unpack_bits(std::span<const std::uint8_t> bytes, std::size_t bit_count);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);

Bit parity(const Bitstring& bits);
std::size_t hamming_distance(const Bitstring& a, const Bitstring& b);

}  // namespace qkd
