#include "qkd/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>

namespace qkd {

void SessionConfig::validate() const {
  if (n_pulses < 1) throw Error(Errc::InvalidConfig, "n_pulses must be >= 1");
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) {
    throw Error(Errc::InvalidConfig, "sample fraction must lie in (0, 1]");
  }
  if (!(r_max >= 0.0 && r_max <= 1.0)) throw Error(Errc::InvalidConfig, "r_max must lie in [0, 1]");
  if (!(leak_factor >= 0.0)) throw Error(Errc::InvalidConfig, "leak factor must be non-negative");
  noise.validate();
  reconcile.validate();
  if (protocol == Protocol::B92) (void)b92_alphabet(theta);

  const bool translucent = std::holds_alternative<TranslucentUnitary>(eve) ||
                           std::holds_alternative<TranslucentEntangling>(eve);
  if (translucent) {
    if (protocol != Protocol::B92) {
      throw Error(Errc::InvalidConfig, "translucent eavesdropping is defined for B92 only");
    }
    const double eve_theta = std::visit(
        [](const auto& s) -> double {
          if constexpr (requires { s.theta; }) return s.theta;
          return 0.0;
        },
        eve);
    if (std::abs(eve_theta - theta) > 1e-12) {
      throw Error(Errc::InvalidConfig, "eavesdropper strategy built for a different theta");
    }
  }
  validate_strategy(eve);
}

Stage1Record run_stage1_bb84(const SessionConfig& cfg, Rng& rng, ChannelTap* tap) {
  Stage1Record rec;
  rec.protocol = Protocol::BB84;
  rec.slots.resize(cfg.n_pulses);
  for (std::uint64_t slot = 0; slot < cfg.n_pulses; ++slot) {
    SlotRecord& s = rec.slots[slot];
    s.alice_bit = static_cast<Bit>(rng.coin());
    const auto alice_basis = static_cast<Basis>(rng.coin());
    s.alice_basis = alice_basis;

    Pulse pulse = emit_pulse(slot, alphabet_for(alice_basis).encode(s.alice_bit), cfg.noise, rng);
    auto delivered = transmit(std::move(pulse), cfg.noise, tap, rng);
    const auto bob_basis = static_cast<Basis>(rng.coin());
    if (!delivered) continue;

    s.received = true;
    s.bob_basis = bob_basis;
    const Basis2& basis = alphabet_for(bob_basis).code_states();
    if (const auto* joint = std::get_if<Ket4>(&delivered->state)) {
      const auto m = measure_carrier(*joint, basis, rng);
      s.bob_bit = m.bit;
      if (tap != nullptr) tap->on_carrier_measured(slot, m.residual_probe);
    } else {
      s.bob_bit = measure_projective(std::get<Ket2>(delivered->state), basis, rng).bit;
    }
  }
  return rec;
}

Stage1Record run_stage1_b92(const SessionConfig& cfg, Rng& rng, ChannelTap* tap) {
  const QuantumAlphabet alphabet = b92_alphabet(cfg.theta);
  const PovmSet povm = build_povm(cfg.theta);

  Stage1Record rec;
  rec.protocol = Protocol::B92;
  rec.slots.resize(cfg.n_pulses);
  for (std::uint64_t slot = 0; slot < cfg.n_pulses; ++slot) {
    SlotRecord& s = rec.slots[slot];
    s.alice_bit = static_cast<Bit>(rng.coin());

    Pulse pulse = emit_pulse(slot, alphabet.encode(s.alice_bit), cfg.noise, rng);
    auto delivered = transmit(std::move(pulse), cfg.noise, tap, rng);
    if (!delivered) continue;

    s.received = true;
    PovmOutcome outcome;
    if (const auto* joint = std::get_if<Ket4>(&delivered->state)) {
      const auto m = measure_povm_carrier(*joint, povm, rng);
      outcome = m.outcome;
      if (tap != nullptr && m.residual_probe) tap->on_carrier_measured(slot, *m.residual_probe);
    } else {
      outcome = measure_povm(std::get<Ket2>(delivered->state), povm, rng);
    }
    s.bob_outcome = outcome;
    if (outcome != PovmOutcome::Inconclusive) s.bob_bit = static_cast<Bit>(outcome);
  }
  return rec;
}

Stage1Record replay_bb84(std::span<const RecordedSlot> slots) {
  Stage1Record rec;
  rec.protocol = Protocol::BB84;
  rec.slots.reserve(slots.size());
  for (const RecordedSlot& r : slots) {
    SlotRecord s;
    s.alice_bit = r.alice_bit;
    s.alice_basis = r.alice_basis;
    if (r.bob_basis) {
      s.received = true;
      s.bob_basis = r.bob_basis;
      s.bob_bit = r.bob_bit;
    }
    rec.slots.push_back(s);
  }
  return rec;
}

namespace {

RawKeys keep_slots(const Stage1Record& record, const std::vector<std::uint64_t>& slots) {
  RawKeys raw;
  raw.slots = slots;
  raw.alice.reserve(slots.size());
  raw.bob.reserve(slots.size());
  for (auto slot : slots) {
    raw.alice.push_back(record.slots[slot].alice_bit);
    raw.bob.push_back(*record.slots[slot].bob_bit);
  }
  return raw;
}

}  // namespace

RawKeys sift_bb84(const Stage1Record& record, PublicTranscript& transcript) {
  std::vector<std::uint64_t> missing;
  Bitstring bob_bases;
  Bitstring verdicts;
  std::vector<std::uint64_t> kept;
  for (std::uint64_t slot = 0; slot < record.slots.size(); ++slot) {
    const SlotRecord& s = record.slots[slot];
    if (!s.received) {
      missing.push_back(slot);
      continue;
    }
    bob_bases.push_back(static_cast<Bit>(*s.bob_basis));
    const bool match = s.alice_basis == s.bob_basis;
    verdicts.push_back(match ? 1 : 0);
    if (match) kept.push_back(slot);
  }
  transcript.post(Party::Bob, MessageKind::NonReceptions, PayloadWriter().indices(missing).take());
  transcript.post(Party::Bob, MessageKind::BobBases, PayloadWriter().bits(bob_bases).take());
  transcript.post(Party::Alice, MessageKind::AliceVerdicts, PayloadWriter().bits(verdicts).take());
  if (kept.empty()) throw Error(Errc::EmptySiftedKey, "no slot survived sifting");
  return keep_slots(record, kept);
}

RawKeys sift_b92(const Stage1Record& record, PublicTranscript& transcript) {
  std::vector<std::uint64_t> conclusive;
  for (std::uint64_t slot = 0; slot < record.slots.size(); ++slot) {
    const SlotRecord& s = record.slots[slot];
    if (s.received && s.bob_bit) conclusive.push_back(slot);
  }
  transcript.post(Party::Bob, MessageKind::ConclusiveSlots, PayloadWriter().indices(conclusive).take());
  if (conclusive.empty()) throw Error(Errc::EmptySiftedKey, "no conclusive reception");
  return keep_slots(record, conclusive);
}

ErrorEstimate estimate_error(const Bitstring& alice, const Bitstring& bob, double sample_fraction, double r_max,
                             Rng& rng, PublicTranscript& transcript) {
  if (alice.size() != bob.size()) throw Error(Errc::LengthMismatch, "raw keys differ in length");
  if (alice.empty()) throw Error(Errc::EmptySiftedKey, "nothing to estimate from");

  const std::size_t len = alice.size();
  auto m = static_cast<std::size_t>(std::ceil(sample_fraction * static_cast<double>(len) - 1e-9));
  m = std::clamp<std::size_t>(m, 1, len);

  // Partial Fisher-Yates: the first m entries are a uniform m-subset.
  std::vector<std::uint64_t> order(len);
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(len - i));
    std::swap(order[i], order[j]);
  }
  std::vector<std::uint64_t> sample(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(sample.begin(), sample.end());

  Bitstring sample_a;
  Bitstring sample_b;
  std::vector<std::uint8_t> disclosed(len, 0);
  for (auto p : sample) {
    sample_a.push_back(alice[p]);
    sample_b.push_back(bob[p]);
    disclosed[p] = 1;
  }
  transcript.post(Party::Bob, MessageKind::SamplePositions, PayloadWriter().indices(sample).take());
  transcript.post(Party::Alice, MessageKind::SampleBits, PayloadWriter().bits(sample_a).take());
  transcript.post(Party::Bob, MessageKind::SampleBits, PayloadWriter().bits(sample_b).take());

  ErrorEstimate est;
  est.disclosed = m;
  est.disagreements = hamming_distance(sample_a, sample_b);
  est.rate = static_cast<double>(est.disagreements) / static_cast<double>(m);
  for (std::size_t i = 0; i < len; ++i) {
    if (disclosed[i]) continue;
    est.alice.push_back(alice[i]);
    est.bob.push_back(bob[i]);
  }
  est.aborted = est.rate > r_max;
  if (est.aborted) transcript.post(Party::Alice, MessageKind::Abort, {});
  return est;
}

std::optional<double> guess_accuracy(const EveGuess& guess, const Stage1Record& stage1) {
  if (guess.slots.empty()) return std::nullopt;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < guess.slots.size(); ++i) hits += guess.bits[i] == stage1.slots[guess.slots[i]].alice_bit;
  return static_cast<double>(hits) / static_cast<double>(guess.slots.size());
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

/// Eve's estimated information about the final key, in bits. Her effective
/// known-bit fraction is (2 * accuracy - 1) scaled by the share of sifted
/// slots she guessed; whatever exceeds the k used for amplification is
/// assumed known, plus the residual 2^-s / ln 2 of the amplification bound.
double final_key_info_estimate(const RunReport& r) {
  if (r.aborted || r.final_key_length == 0) return 0.0;
  const double residual = std::ldexp(1.0, -static_cast<int>(r.security_parameter)) / std::log(2.0);
  double known = 0.0;
  if (r.eve_guess_accuracy && r.sifted_count > 0) {
    const double coverage = static_cast<double>(r.eve_guessed_count) / static_cast<double>(r.sifted_count);
    known = std::max(0.0, 2.0 * *r.eve_guess_accuracy - 1.0) * coverage * static_cast<double>(r.reconciled_length);
  }
  const double excess = std::max(0.0, known - static_cast<double>(r.leaked_bits));
  return std::min(static_cast<double>(r.final_key_length), excess + residual);
}

}  // namespace

SessionResult run_session_detailed(const SessionConfig& cfg) {
  cfg.validate();
  const auto t_start = Clock::now();

  SessionResult out;
  RunReport& rep = out.report;
  rep.protocol = cfg.protocol;
  rep.n_pulses = cfg.n_pulses;
  rep.seed = cfg.seed;
  rep.security_parameter = cfg.security_parameter;

  Rng rng(cfg.seed);
  const std::uint64_t guess_seed = rng.next_u64();
  std::unique_ptr<Eavesdropper> eve;
  if (!std::holds_alternative<NoEve>(cfg.eve)) {
    eve = std::make_unique<Eavesdropper>(cfg.eve, cfg.protocol, cfg.theta, guess_seed);
  }

  auto t = Clock::now();
  out.stage1 = cfg.protocol == Protocol::BB84 ? run_stage1_bb84(cfg, rng, eve.get())
                                              : run_stage1_b92(cfg, rng, eve.get());
  rep.timings.stage1_ms = elapsed_ms(t);
  rep.received_count = static_cast<std::uint64_t>(
      std::count_if(out.stage1.slots.begin(), out.stage1.slots.end(), [](const SlotRecord& s) { return s.received; }));

  auto finish = [&]() -> SessionResult {
    if (eve) {
      out.eve_record = eve->record();
      rep.eve_recorded_slots = out.eve_record->entries.size();
      const EveGuess guess = eve_guess(*out.eve_record, out.transcript);
      rep.eve_guessed_count = guess.slots.size();
      rep.eve_guess_accuracy = guess_accuracy(guess, out.stage1);
    }
    rep.eve_final_key_info_estimate = final_key_info_estimate(rep);
    rep.transcript_messages = out.transcript.size();
    rep.timings.total_ms = elapsed_ms(t_start);
    return std::move(out);
  };
  auto abort_with = [&](std::string reason) {
    rep.aborted = true;
    rep.abort_reason = std::move(reason);
    return finish();
  };

  t = Clock::now();
  try {
    out.raw = cfg.protocol == Protocol::BB84 ? sift_bb84(out.stage1, out.transcript)
                                             : sift_b92(out.stage1, out.transcript);
  } catch (const Error& e) {
    if (e.code() != Errc::EmptySiftedKey) throw;
    rep.timings.sifting_ms = elapsed_ms(t);
    return abort_with("empty-sifted-key");
  }
  rep.timings.sifting_ms = elapsed_ms(t);
  rep.sifted_count = out.raw.alice.size();
  rep.sifted_error_rate =
      static_cast<double>(hamming_distance(out.raw.alice, out.raw.bob)) / static_cast<double>(rep.sifted_count);

  t = Clock::now();
  ErrorEstimate est = estimate_error(out.raw.alice, out.raw.bob, cfg.sample_fraction, cfg.r_max, rng, out.transcript);
  rep.timings.estimation_ms = elapsed_ms(t);
  rep.disclosed_count = est.disclosed;
  rep.error_rate = est.rate;
  if (est.aborted) return abort_with("error-rate-exceeds-threshold");

  t = Clock::now();
  ReconcileResult rec = reconcile(std::move(est.alice), std::move(est.bob), est.rate, cfg.reconcile, rng, out.transcript);
  rep.timings.reconciliation_ms = elapsed_ms(t);
  rep.reconciled_length = rec.alice.size();
  rep.reconciliation_ok = rec.alice == rec.bob;
  rep.parity_bits_disclosed = rec.accounting.parity_comparisons;
  rep.bits_discarded = rec.accounting.bits_discarded();
  rep.leaked_bits = leaked_bits_bound(est.rate, rec.alice.size(), rec.accounting, cfg.leak_factor);

  t = Clock::now();
  try {
    AmplifyResult amp = privacy_amplify(rec.alice, rep.leaked_bits, cfg.security_parameter, rng, out.transcript);
    rep.final_key_alice = std::move(amp.final_key);
    rep.final_key_bob = apply_subsets(rec.bob, amp.subsets);
  } catch (const Error& e) {
    if (e.code() != Errc::KeyExhausted) throw;
    rep.timings.amplification_ms = elapsed_ms(t);
    return abort_with("key-exhausted");
  }
  rep.timings.amplification_ms = elapsed_ms(t);
  rep.final_key_length = rep.final_key_alice.size();
  return finish();
}

RunReport run_session(const SessionConfig& cfg) { return run_session_detailed(cfg).report; }

}  // namespace qkd
