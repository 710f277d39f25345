#include "qkd/error.hpp"

namespace qkd {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NotUnitary: return "NotUnitary";
    case Errc::NotHermitian: return "NotHermitian";
    case Errc::BadBasis: return "BadBasis";
    case Errc::ThetaOutOfRange: return "ThetaOutOfRange";
    case Errc::DegenerateProjection: return "DegenerateProjection";
    case Errc::NotProjectiveAlphabet: return "NotProjectiveAlphabet";
    case Errc::StateNotInAlphabet: return "StateNotInAlphabet";
    case Errc::EmptySiftedKey: return "EmptySiftedKey";
    case Errc::ReconciliationFailed: return "ReconciliationFailed";
    case Errc::KeyExhausted: return "KeyExhausted";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::MalformedPayload: return "MalformedPayload";
  }
  return "Unknown";
}

}  // namespace qkd
