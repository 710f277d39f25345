#pragma once

// Eavesdropper models applied at the quantum-channel tap, and the
// bookkeeping that turns Eve's private record plus the public transcript
// into key guesses.

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "qkd/alphabet.hpp"
#include "qkd/channel.hpp"

namespace qkd {

struct NoEve {};

/// Intercept-measure-resend on a fraction of the pulses.
struct Opaque {
  double fraction = 1.0;
};

/// |theta+-> |psi>  ->  |theta'+-> |psi+->
struct TranslucentUnitary {
  double theta = 0.0;
  Ket2 theta_out_plus;
  Ket2 theta_out_minus;
  Ket2 probe_plus;
  Ket2 probe_minus;
};

/// |theta+> |psi>  ->  a |theta'+> |psi+> + b |theta'-> |psi+>
/// |theta-> |psi>  ->  b |theta'+> |psi-> + a |theta'-> |psi->
struct TranslucentEntangling {
  double theta = 0.0;
  Complex a;
  Complex b;
  Ket2 theta_out_plus;
  Ket2 theta_out_minus;
  Ket2 probe_plus;
  Ket2 probe_minus;
};

/// Diverts one photon of every multi-photon pulse.
struct PhotonNumberSplit {};

using EveStrategy = std::variant<NoEve, Opaque, TranslucentUnitary, TranslucentEntangling, PhotonNumberSplit>;

std::string_view strategy_name(const EveStrategy& s) noexcept;

/// Range checks plus validate_interaction for translucent variants.
/// Throws Errc::InvalidConfig or Errc::NotUnitary.
void validate_strategy(const EveStrategy& s);

/// Checks that the interaction preserves the inner product of the two input
/// states (to 1e-8) and maps them to unit vectors (to 1e-10). Throws
/// Errc::NotUnitary naming the violated quantity. Non-translucent variants
/// are accepted trivially.
void validate_interaction(const EveStrategy& s);

/// One-parameter unitary family: carriers leave at +-theta_out with
/// theta_out in [0, theta]; probe overlap cos(2 theta) / cos(2 theta_out).
TranslucentUnitary make_translucent_unitary(double theta, double theta_out);

/// One-parameter entangling family: outgoing carriers at +-45 degrees,
/// a = cos(mix), b = sin(mix), probe overlap cos(2 theta) / sin(2 mix).
/// Requires sin(2 mix) >= cos(2 theta).
TranslucentEntangling make_translucent_entangling(double theta, double mix);

// Record ----------------------------------------------------------------------

enum class EveAction : std::uint8_t { Measured, StoredProbe, SplitPhoton, Entangled };

struct EveEntry {
  std::uint64_t slot = 0;
  EveAction action = EveAction::Measured;
  /// Measured: which basis of Eve's menu was used, and the outcome index.
  std::uint8_t basis_index = 0;
  Bit outcome = 0;
  /// Held quantum state: the probe, the diverted photon, or (Entangled) the
  /// probe residual once the receiver has measured the carrier.
  std::optional<Ket2> state;
};

struct EveRecord {
  Protocol protocol = Protocol::BB84;
  double theta = 0.0;
  /// Ascending slot order, at most one entry per slot.
  std::vector<EveEntry> entries;
  /// Probe states Eve discriminates between: index = Alice's bit.
  std::optional<Basis2> probe_hypotheses;
  /// Seeds the measurements Eve performs after the public discussion.
  std::uint64_t guess_seed = 0;
};

/// Eve's two measurement bases. BB84: V/H and oblique, indexed by bit.
/// B92: {|theta+>, its complement} and {|theta->, its complement}.
std::array<Basis2, 2> eve_basis_menu(Protocol protocol, double theta);

struct TapResult {
  Pulse forwarded;
  std::optional<EveEntry> entry;
};

TapResult tap_opaque(Pulse pulse, double fraction, const std::array<Basis2, 2>& menu, Rng& rng);
/// Throws Errc::StateNotInAlphabet if the pulse is not |theta+> or |theta->.
TapResult tap_translucent(Pulse pulse, const EveStrategy& strategy);
TapResult tap_pns(Pulse pulse);

class Eavesdropper final : public ChannelTap {
 public:
  Eavesdropper(EveStrategy strategy, Protocol protocol, double theta, std::uint64_t guess_seed);

  Pulse intercept(Pulse pulse, Rng& rng) override;
  void on_carrier_measured(std::uint64_t slot, const Ket2& residual_probe) override;

  const EveStrategy& strategy() const noexcept { return strategy_; }
  const EveRecord& record() const noexcept { return record_; }

 private:
  EveStrategy strategy_;
  std::array<Basis2, 2> menu_;
  EveRecord record_;
};

// Guessing --------------------------------------------------------------------

struct EveGuess {
  std::vector<std::uint64_t> slots;
  Bitstring bits;
  std::vector<double> confidence;
};

/// Minimum-error measurement basis for two equiprobable pure states.
/// Outcome index 0 favours `state0`.
Basis2 helstrom_basis(const Ket2& state0, const Ket2& state1);
double helstrom_success(const Ket2& state0, const Ket2& state1);

/// Guesses for every sifted slot Eve holds a record entry for. Sifted slots
/// and bases are read from the transcript alone.
EveGuess eve_guess(const EveRecord& record, const PublicTranscript& transcript);

/// Sifted slots announced on the transcript (and, for BB84, the basis of
/// each one).
struct SiftAnnouncement {
  std::vector<std::uint64_t> slots;
  std::vector<Basis> bases;
};
SiftAnnouncement read_sift_announcement(Protocol protocol, const PublicTranscript& transcript);

}  // namespace qkd
