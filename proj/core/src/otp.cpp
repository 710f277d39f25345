#include "qkd/otp.hpp"

#include <string>

#include "qkd/error.hpp"

namespace qkd {

Bitstring otp_xor(const Bitstring& text, const Bitstring& key) {
  if (text.size() != key.size()) {
    throw Error(Errc::LengthMismatch,
                "text has " + std::to_string(text.size()) + " bits, key has " + std::to_string(key.size()));
  }
  Bitstring out(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) out[i] = text[i] ^ key[i];
  return out;
}

}  // namespace qkd
