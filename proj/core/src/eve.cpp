#include "qkd/eve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace qkd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kInteractionTolerance = 1e-8;
constexpr double kCodeStateTolerance = 1e-10;

std::array<Complex, 4> raw_tensor(const Ket2& u, const Ket2& v) {
  return {u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]};
}

std::array<Complex, 4> add(const std::array<Complex, 4>& x, const std::array<Complex, 4>& y, Complex cx,
                           Complex cy) {
  std::array<Complex, 4> out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = cx * x[i] + cy * y[i];
  return out;
}

Complex raw_inner(const std::array<Complex, 4>& x, const std::array<Complex, 4>& y) {
  Complex s{};
  for (std::size_t i = 0; i < 4; ++i) s += std::conj(x[i]) * y[i];
  return s;
}

struct InteractionOutputs {
  std::array<Complex, 4> plus;
  std::array<Complex, 4> minus;
};

InteractionOutputs interaction_outputs(const TranslucentUnitary& u) {
  return {raw_tensor(u.theta_out_plus, u.probe_plus), raw_tensor(u.theta_out_minus, u.probe_minus)};
}

InteractionOutputs interaction_outputs(const TranslucentEntangling& e) {
  return {add(raw_tensor(e.theta_out_plus, e.probe_plus), raw_tensor(e.theta_out_minus, e.probe_plus), e.a, e.b),
          add(raw_tensor(e.theta_out_plus, e.probe_minus), raw_tensor(e.theta_out_minus, e.probe_minus), e.b,
              e.a)};
}

template <class T>
void check_interaction(const T& s) {
  if (!(s.theta > 0.0 && s.theta < std::numbers::pi / 4)) {
    throw Error(Errc::ThetaOutOfRange, "translucent strategy theta must lie in (0, pi/4)");
  }
  const Complex in_overlap = inner(polarization(s.theta), polarization(-s.theta));
  const auto out = interaction_outputs(s);
  const double norm_plus = std::sqrt(std::real(raw_inner(out.plus, out.plus)));
  const double norm_minus = std::sqrt(std::real(raw_inner(out.minus, out.minus)));
  const Complex out_overlap = raw_inner(out.plus, out.minus);

  std::ostringstream why;
  if (std::abs(norm_plus - 1.0) > kOperatorTolerance) {
    why << "|U|theta+>|psi>| = " << norm_plus << " (expected 1)";
  } else if (std::abs(norm_minus - 1.0) > kOperatorTolerance) {
    why << "|U|theta->|psi>| = " << norm_minus << " (expected 1)";
  } else if (std::abs(out_overlap - in_overlap) > kInteractionTolerance) {
    why << "output overlap " << out_overlap << " differs from input overlap " << in_overlap;
  }
  if (!why.str().empty()) throw Error(Errc::NotUnitary, why.str());
}

/// +1 for |theta+>, -1 for |theta->; throws otherwise.
int code_state_sign(const Ket2& s, double theta) {
  if (std::norm(inner(polarization(theta), s)) >= 1.0 - kCodeStateTolerance) return +1;
  if (std::norm(inner(polarization(-theta), s)) >= 1.0 - kCodeStateTolerance) return -1;
  throw Error(Errc::StateNotInAlphabet, "translucent tap only acts on |theta+> or |theta->");
}

}  // namespace

std::string_view strategy_name(const EveStrategy& s) noexcept {
  return std::visit(Overloaded{
                        [](const NoEve&) { return std::string_view("none"); },
                        [](const Opaque&) { return std::string_view("opaque"); },
                        [](const TranslucentUnitary&) { return std::string_view("translucent"); },
                        [](const TranslucentEntangling&) { return std::string_view("entangle"); },
                        [](const PhotonNumberSplit&) { return std::string_view("pns"); },
                    },
                    s);
}

void validate_interaction(const EveStrategy& s) {
  std::visit(Overloaded{
                 [](const TranslucentUnitary& u) { check_interaction(u); },
                 [](const TranslucentEntangling& e) { check_interaction(e); },
                 [](const auto&) {},
             },
             s);
}

void validate_strategy(const EveStrategy& s) {
  if (const auto* o = std::get_if<Opaque>(&s)) {
    if (!(o->fraction >= 0.0 && o->fraction <= 1.0)) {
      throw Error(Errc::InvalidConfig, "opaque fraction must lie in [0, 1]");
    }
  }
  if (const auto* e = std::get_if<TranslucentEntangling>(&s)) {
    if (std::abs(std::norm(e->a) + std::norm(e->b) - 1.0) > kOperatorTolerance) {
      throw Error(Errc::InvalidConfig, "entangling coefficients must satisfy |a|^2 + |b|^2 = 1");
    }
  }
  validate_interaction(s);
}

TranslucentUnitary make_translucent_unitary(double theta, double theta_out) {
  if (!(theta > 0.0 && theta < std::numbers::pi / 4)) {
    throw Error(Errc::ThetaOutOfRange, "theta must lie in (0, pi/4)");
  }
  if (!(theta_out >= 0.0 && theta_out <= theta)) {
    throw Error(Errc::InvalidConfig, "outgoing carrier angle must lie in [0, theta]");
  }
  const double overlap = std::cos(2 * theta) / std::cos(2 * theta_out);
  const double chi = 0.5 * std::acos(std::clamp(overlap, -1.0, 1.0));
  return TranslucentUnitary{theta, polarization(theta_out), polarization(-theta_out), polarization(chi),
                            polarization(-chi)};
}

TranslucentEntangling make_translucent_entangling(double theta, double mix) {
  if (!(theta > 0.0 && theta < std::numbers::pi / 4)) {
    throw Error(Errc::ThetaOutOfRange, "theta must lie in (0, pi/4)");
  }
  const double s2 = std::sin(2 * mix);
  if (!(s2 >= std::cos(2 * theta) && s2 > 0.0)) {
    throw Error(Errc::InvalidConfig, "entangling mix must satisfy sin(2 mix) >= cos(2 theta)");
  }
  const double chi = 0.5 * std::acos(std::clamp(std::cos(2 * theta) / s2, -1.0, 1.0));
  constexpr double kOut = std::numbers::pi / 4;
  return TranslucentEntangling{theta,          std::cos(mix),    std::sin(mix),   polarization(kOut),
                               polarization(-kOut), polarization(chi), polarization(-chi)};
}

std::array<Basis2, 2> eve_basis_menu(Protocol protocol, double theta) {
  if (protocol == Protocol::BB84) {
    return {alphabet_for(Basis::Rectilinear).code_states(), alphabet_for(Basis::Diagonal).code_states()};
  }
  const Ket2 plus = polarization(theta);
  const Ket2 minus = polarization(-theta);
  return {Basis2{plus, orthogonal_complement(plus)}, Basis2{minus, orthogonal_complement(minus)}};
}

TapResult tap_opaque(Pulse pulse, double fraction, const std::array<Basis2, 2>& menu, Rng& rng) {
  if (!rng.bernoulli(fraction)) return {std::move(pulse), std::nullopt};
  const auto basis_index = static_cast<std::uint8_t>(rng.coin());
  const Ket2 incoming = std::get<Ket2>(pulse.state);
  const auto m = measure_projective(incoming, menu[basis_index], rng);

  EveEntry entry;
  entry.slot = pulse.slot;
  entry.action = EveAction::Measured;
  entry.basis_index = basis_index;
  entry.outcome = m.bit;
  return {Pulse{pulse.slot, pulse.photons, m.collapsed}, entry};
}

TapResult tap_translucent(Pulse pulse, const EveStrategy& strategy) {
  const auto* incoming = std::get_if<Ket2>(&pulse.state);
  if (incoming == nullptr) throw Error(Errc::StateNotInAlphabet, "pulse already entangled");

  EveEntry entry;
  entry.slot = pulse.slot;

  if (const auto* u = std::get_if<TranslucentUnitary>(&strategy)) {
    const bool plus = code_state_sign(*incoming, u->theta) > 0;
    entry.action = EveAction::StoredProbe;
    entry.state = plus ? u->probe_plus : u->probe_minus;
    return {Pulse{pulse.slot, pulse.photons, plus ? u->theta_out_plus : u->theta_out_minus}, entry};
  }
  if (const auto* e = std::get_if<TranslucentEntangling>(&strategy)) {
    const bool plus = code_state_sign(*incoming, e->theta) > 0;
    const auto out = interaction_outputs(*e);
    entry.action = EveAction::Entangled;
    // The joint state carries exactly one photon; any others are absorbed.
    return {Pulse{pulse.slot, 1, make_joint(plus ? out.plus : out.minus)}, entry};
  }
  throw Error(Errc::InvalidConfig, "tap_translucent requires a translucent strategy");
}

TapResult tap_pns(Pulse pulse) {
  if (pulse.photons < 2 || pulse.is_joint()) return {std::move(pulse), std::nullopt};
  EveEntry entry;
  entry.slot = pulse.slot;
  entry.action = EveAction::SplitPhoton;
  entry.state = std::get<Ket2>(pulse.state);
  pulse.photons -= 1;
  return {std::move(pulse), entry};
}

Eavesdropper::Eavesdropper(EveStrategy strategy, Protocol protocol, double theta, std::uint64_t guess_seed)
    : strategy_(std::move(strategy)), menu_(eve_basis_menu(protocol, theta)) {
  validate_strategy(strategy_);
  record_.protocol = protocol;
  record_.theta = theta;
  record_.guess_seed = guess_seed;
  if (const auto* u = std::get_if<TranslucentUnitary>(&strategy_)) {
    record_.probe_hypotheses = Basis2{u->probe_minus, u->probe_plus};
  } else if (const auto* e = std::get_if<TranslucentEntangling>(&strategy_)) {
    record_.probe_hypotheses = Basis2{e->probe_minus, e->probe_plus};
  }
}

Pulse Eavesdropper::intercept(Pulse pulse, Rng& rng) {
  TapResult r = std::visit(Overloaded{
                               [&](const NoEve&) { return TapResult{std::move(pulse), std::nullopt}; },
                               [&](const Opaque& o) { return tap_opaque(std::move(pulse), o.fraction, menu_, rng); },
                               [&](const PhotonNumberSplit&) { return tap_pns(std::move(pulse)); },
                               [&](const auto&) { return tap_translucent(std::move(pulse), strategy_); },
                           },
                           strategy_);
  if (r.entry) record_.entries.push_back(std::move(*r.entry));
  return std::move(r.forwarded);
}

void Eavesdropper::on_carrier_measured(std::uint64_t slot, const Ket2& residual_probe) {
  auto it = std::lower_bound(record_.entries.begin(), record_.entries.end(), slot,
                             [](const EveEntry& e, std::uint64_t s) { return e.slot < s; });
  if (it != record_.entries.end() && it->slot == slot) it->state = residual_probe;
}

Basis2 helstrom_basis(const Ket2& state0, const Ket2& state1) {
  // Gamma = |s1><s1| - |s0><s0|; the eigenvector with positive eigenvalue
  // is the "guess 1" projector.
  const Matrix2 gamma = outer(state1, state1) - outer(state0, state0);
  const double a = std::real(gamma(0, 0));
  const double d = std::real(gamma(1, 1));
  const Complex b = gamma(0, 1);
  if (std::abs(b) < 1e-15) {
    const Ket2 e0 = make_qubit(1.0, 0.0);
    const Ket2 e1 = make_qubit(0.0, 1.0);
    return a >= d ? Basis2{e1, e0} : Basis2{e0, e1};
  }
  const double lambda_plus = 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
  const Ket2 favour1 = make_qubit(b, lambda_plus - a);
  return Basis2{orthogonal_complement(favour1), favour1};
}

double helstrom_success(const Ket2& state0, const Ket2& state1) {
  return 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - std::norm(inner(state0, state1)))));
}

SiftAnnouncement read_sift_announcement(Protocol protocol, const PublicTranscript& transcript) {
  SiftAnnouncement out;
  if (protocol == Protocol::B92) {
    for (const auto& m : transcript.read_all()) {
      if (m.kind == MessageKind::ConclusiveSlots) {
        out.slots = PayloadReader(m.payload).indices();
        break;
      }
    }
    return out;
  }

  std::vector<std::uint64_t> missing;
  Bitstring bases;
  Bitstring verdicts;
  for (const auto& m : transcript.read_all()) {
    if (m.kind == MessageKind::NonReceptions) missing = PayloadReader(m.payload).indices();
    if (m.kind == MessageKind::BobBases) bases = PayloadReader(m.payload).bits();
    if (m.kind == MessageKind::AliceVerdicts) {
      verdicts = PayloadReader(m.payload).bits();
      break;
    }
  }
  if (verdicts.size() != bases.size()) throw Error(Errc::MalformedPayload, "verdicts do not match announced bases");

  std::size_t skip = 0;
  std::uint64_t slot = 0;
  for (std::size_t i = 0; i < bases.size(); ++i, ++slot) {
    while (skip < missing.size() && missing[skip] == slot) {
      ++skip;
      ++slot;
    }
    if (verdicts[i]) {
      out.slots.push_back(slot);
      out.bases.push_back(static_cast<Basis>(bases[i]));
    }
  }
  return out;
}

EveGuess eve_guess(const EveRecord& record, const PublicTranscript& transcript) {
  EveGuess guess;
  if (record.entries.empty()) return guess;

  std::unordered_map<std::uint64_t, const EveEntry*> by_slot;
  by_slot.reserve(record.entries.size());
  for (const auto& e : record.entries) by_slot.emplace(e.slot, &e);

  const SiftAnnouncement sifted = read_sift_announcement(record.protocol, transcript);
  Rng rng(record.guess_seed);
  const bool bb84 = record.protocol == Protocol::BB84;
  const double overlap_sq = bb84 ? 0.0 : std::pow(std::cos(2 * record.theta), 2);

  for (std::size_t i = 0; i < sifted.slots.size(); ++i) {
    const auto it = by_slot.find(sifted.slots[i]);
    if (it == by_slot.end()) continue;
    const EveEntry& e = *it->second;

    Bit bit = 0;
    double confidence = 0.5;
    switch (e.action) {
      case EveAction::Measured:
        if (bb84) {
          bit = e.outcome;
          confidence = (e.basis_index == static_cast<std::uint8_t>(sifted.bases[i])) ? 1.0 : 0.5;
        } else {
          // Menu basis 0 is built on |theta+> ("1"), basis 1 on |theta-> ("0").
          const Bit code_bit = e.basis_index == 0 ? 1 : 0;
          const bool found_code_state = e.outcome == 0;
          bit = found_code_state ? code_bit : static_cast<Bit>(1 - code_bit);
          confidence = found_code_state ? 1.0 / (1.0 + overlap_sq) : 1.0;
        }
        break;
      case EveAction::SplitPhoton:
        if (bb84) {
          bit = measure_projective(*e.state, alphabet_for(sifted.bases[i]).code_states(), rng).bit;
          confidence = 1.0;
        } else {
          const Ket2 zero = polarization(-record.theta);
          const Ket2 one = polarization(record.theta);
          bit = measure_projective(*e.state, helstrom_basis(zero, one), rng).bit;
          confidence = helstrom_success(zero, one);
        }
        break;
      case EveAction::StoredProbe:
      case EveAction::Entangled: {
        if (!e.state || !record.probe_hypotheses) continue;
        const auto& h = *record.probe_hypotheses;
        bit = measure_projective(*e.state, helstrom_basis(h[0], h[1]), rng).bit;
        confidence = helstrom_success(h[0], h[1]);
        break;
      }
    }
    guess.slots.push_back(sifted.slots[i]);
    guess.bits.push_back(bit);
    guess.confidence.push_back(confidence);
  }
  return guess;
}

}  // namespace qkd
