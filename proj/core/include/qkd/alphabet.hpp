#pragma once

#include <string_view>

#include "qkd/quantum.hpp"

namespace qkd {

enum class Protocol : std::uint8_t { BB84, B92 };

std::string_view protocol_name(Protocol p) noexcept;

enum class AlphabetKind : std::uint8_t { VH, Oblique, B92 };

/// The two conjugate bases a BB84 party chooses between by coin flip.
enum class Basis : std::uint8_t { Rectilinear = 0, Diagonal = 1 };

/// A bit -> polarization encoding. Index into code_states() is the bit.
class QuantumAlphabet {
 public:
  AlphabetKind kind() const noexcept { return kind_; }
  /// Only meaningful for B92.
  double theta() const noexcept { return theta_; }
  std::string_view name() const noexcept;

  const Ket2& encode(Bit bit) const { return states_[bit & 1u]; }
  const Basis2& code_states() const noexcept { return states_; }
  bool is_projective() const noexcept { return kind_ != AlphabetKind::B92; }

 private:
  friend QuantumAlphabet vh_alphabet();
  friend QuantumAlphabet oblique_alphabet();
  friend QuantumAlphabet b92_alphabet(double theta);

  QuantumAlphabet(AlphabetKind kind, double theta, Basis2 states)
      : kind_(kind), theta_(theta), states_(std::move(states)) {}

  AlphabetKind kind_;
  double theta_;
  Basis2 states_;
};

/// 1 -> vertical, 0 -> horizontal.
QuantumAlphabet vh_alphabet();
/// 1 -> +45 degrees, 0 -> -45 degrees.
QuantumAlphabet oblique_alphabet();
/// 1 -> |theta+>, 0 -> |theta->. Throws Errc::ThetaOutOfRange.
QuantumAlphabet b92_alphabet(double theta);

const QuantumAlphabet& alphabet_for(Basis basis);

/// Projective measurement in the alphabet's own basis. Throws
/// Errc::NotProjectiveAlphabet for B92, which is read with a POVM.
Bit decode_by_basis(const QuantumAlphabet& alphabet, const Ket2& s, Rng& rng);

}  // namespace qkd
