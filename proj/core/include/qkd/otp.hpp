#pragma once

#include "qkd/bits.hpp"

namespace qkd {

/// Vernam cipher: out_i = text_i XOR key_i. Self-inverse.
/// Throws Errc::LengthMismatch.
Bitstring otp_xor(const Bitstring& text, const Bitstring& key);

}  // namespace qkd
