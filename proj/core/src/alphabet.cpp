#include "qkd/alphabet.hpp"

#include <numbers>
#include <string>

namespace qkd {

std::string_view protocol_name(Protocol p) noexcept { return p == Protocol::BB84 ? "bb84" : "b92"; }

std::string_view QuantumAlphabet::name() const noexcept {
  switch (kind_) {
    case AlphabetKind::VH: return "VH";
    case AlphabetKind::Oblique: return "Oblique";
    case AlphabetKind::B92: return "B92";
  }
  return "?";
}

QuantumAlphabet vh_alphabet() {
  return QuantumAlphabet(AlphabetKind::VH, 0.0,
                         Basis2{polarization(std::numbers::pi / 2), polarization(0.0)});
}

QuantumAlphabet oblique_alphabet() {
  return QuantumAlphabet(AlphabetKind::Oblique, 0.0,
                         Basis2{polarization(-std::numbers::pi / 4), polarization(std::numbers::pi / 4)});
}

QuantumAlphabet b92_alphabet(double theta) {
  if (!(theta > 0.0 && theta < std::numbers::pi / 4)) {
    throw Error(Errc::ThetaOutOfRange, "theta must lie in (0, pi/4), got " + std::to_string(theta));
  }
  return QuantumAlphabet(AlphabetKind::B92, theta, Basis2{polarization(-theta), polarization(theta)});
}

const QuantumAlphabet& alphabet_for(Basis basis) {
  static const QuantumAlphabet vh = vh_alphabet();
  static const QuantumAlphabet oblique = oblique_alphabet();
  return basis == Basis::Rectilinear ? vh : oblique;
}

Bit decode_by_basis(const QuantumAlphabet& alphabet, const Ket2& s, Rng& rng) {
  if (!alphabet.is_projective()) {
    throw Error(Errc::NotProjectiveAlphabet, "B92 code states are not orthogonal; use the POVM receiver");
  }
  return measure_projective(s, alphabet.code_states(), rng).bit;
}

}  // namespace qkd
