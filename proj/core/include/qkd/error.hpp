#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qkd {

enum class Errc {
  ZeroVector,
  DimensionMismatch,
  NotUnitary,
  NotHermitian,
  BadBasis,
  ThetaOutOfRange,
  DegenerateProjection,
  NotProjectiveAlphabet,
  StateNotInAlphabet,
  EmptySiftedKey,
  ReconciliationFailed,
  KeyExhausted,
  LengthMismatch,
  InvalidConfig,
  MalformedPayload,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the Errc codes so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace qkd
