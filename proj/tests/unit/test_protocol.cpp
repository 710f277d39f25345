#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qkd/protocol.hpp"

using namespace qkd;
using std::numbers::pi;

namespace {

SessionConfig base(Protocol p, std::uint64_t n, std::uint64_t seed) {
  SessionConfig cfg;
  cfg.protocol = p;
  cfg.n_pulses = n;
  cfg.seed = seed;
  return cfg;
}

std::vector<RecordedSlot> ten_slot_example(const std::string& bob_bits) {
  const std::string alice_bases = "RDDDRDRDRD", alice_bits = "1001100101", bob_bases = "DDRDRDRRRR";
  std::vector<RecordedSlot> slots;
  for (std::size_t i = 0; i < 10; ++i) {
    slots.push_back({alice_bases[i] == 'R' ? Basis::Rectilinear : Basis::Diagonal,
                     static_cast<Bit>(alice_bits[i] - '0'),
                     bob_bases[i] == 'R' ? Basis::Rectilinear : Basis::Diagonal, static_cast<Bit>(bob_bits[i] - '0')});
  }
  return slots;
}

}  // namespace

TEST(Stage1Bb84, BasisAgreementStatistics) {
  SessionConfig cfg = base(Protocol::BB84, 100000, 1);
  Rng rng(cfg.seed);
  const Stage1Record rec = run_stage1_bb84(cfg, rng, nullptr);
  ASSERT_EQ(rec.slots.size(), 100000u);
  int matched = 0, mismatched = 0, mismatched_agree = 0;
  for (const auto& s : rec.slots) {
    ASSERT_TRUE(s.received);
    if (s.alice_basis == s.bob_basis) {
      ++matched;
      ASSERT_EQ(s.bob_bit, s.alice_bit);
    } else {
      ++mismatched;
      mismatched_agree += *s.bob_bit == s.alice_bit;
    }
  }
  EXPECT_NEAR(matched / 1e5, 0.5, 0.01);
  EXPECT_NEAR(mismatched_agree / double(mismatched), 0.5, 0.01);
}

TEST(Stage1Bb84, LostSlotsHaveNoBobFields) {
  SessionConfig cfg = base(Protocol::BB84, 20000, 2);
  cfg.noise.loss_p = 0.3;
  Rng rng(cfg.seed);
  for (const auto& s : run_stage1_bb84(cfg, rng, nullptr).slots) {
    if (s.received) continue;
    EXPECT_FALSE(s.bob_basis || s.bob_bit || s.bob_outcome);
  }
}

TEST(SiftBb84, TenSlotExamples) {
  PublicTranscript t;
  const RawKeys a = sift_bb84(replay_bb84(ten_slot_example("1011100000")), t);
  EXPECT_EQ(to_string(a.alice), "011000");
  EXPECT_EQ(a.alice, a.bob);
  EXPECT_EQ(a.slots, (std::vector<std::uint64_t>{1, 3, 4, 5, 6, 8}));  // slots 2,4,5,6,7,9 one-indexed
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.read_all()[0].kind, MessageKind::NonReceptions);
  EXPECT_EQ(t.read_all()[1].kind, MessageKind::BobBases);
  EXPECT_EQ(t.read_all()[2].kind, MessageKind::AliceVerdicts);

  PublicTranscript t2;
  const RawKeys b = sift_bb84(replay_bb84(ten_slot_example("1011111000")), t2);
  EXPECT_EQ(to_string(b.alice), "011000");
  EXPECT_EQ(to_string(b.bob), "011110");
  std::vector<std::uint64_t> differ;
  for (std::size_t i = 0; i < b.alice.size(); ++i)
    if (b.alice[i] != b.bob[i]) differ.push_back(b.slots[i] + 1);
  EXPECT_EQ(differ, (std::vector<std::uint64_t>{6, 7}));
}

TEST(SiftBb84, AllMismatchedIsEmpty) {
  std::vector<RecordedSlot> slots(5, RecordedSlot{Basis::Rectilinear, 1, Basis::Diagonal, 0});
  PublicTranscript t;
  try {
    sift_bb84(replay_bb84(slots), t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptySiftedKey);
  }
}

TEST(SiftBb84, SymmetricAndLossAware) {
  SessionConfig cfg = base(Protocol::BB84, 50000, 3);
  cfg.noise.loss_p = 0.4;
  Rng rng(cfg.seed);
  const Stage1Record rec = run_stage1_bb84(cfg, rng, nullptr);
  PublicTranscript t;
  const RawKeys raw = sift_bb84(rec, t);
  ASSERT_EQ(raw.alice.size(), raw.bob.size());
  ASSERT_EQ(raw.alice.size(), raw.slots.size());
  for (std::size_t i = 0; i < raw.slots.size(); ++i) {
    EXPECT_EQ(raw.alice[i], rec.slots[raw.slots[i]].alice_bit);
    EXPECT_TRUE(std::is_sorted(raw.slots.begin(), raw.slots.end()));
  }
  const double expected = (1 - cfg.noise.loss_p) / 2;
  EXPECT_NEAR(static_cast<double>(raw.slots.size()) / 50000.0, expected, 3 * oracle::binomial_sigma(expected, 50000));
  // Eve reconstructs exactly the same slots from the public messages.
  EXPECT_EQ(read_sift_announcement(Protocol::BB84, t).slots, raw.slots);
}

TEST(Stage1B92, ConclusiveFractionMatchesOracle) {
  SessionConfig cfg = base(Protocol::B92, 100000, 4);
  Rng rng(cfg.seed);
  const Stage1Record rec = run_stage1_b92(cfg, rng, nullptr);
  int conclusive = 0;
  for (const auto& s : rec.slots) {
    if (!s.bob_bit) continue;
    ++conclusive;
    ASSERT_EQ(*s.bob_bit, s.alice_bit);
  }
  const double oracle_rate = oracle::b92_conclusive_rate(pi / 8);
  EXPECT_NEAR(oracle_rate, 1 - std::cos(pi / 4), 1e-12);
  EXPECT_NEAR(conclusive / 1e5, oracle_rate, 0.01);
}

TEST(Stage1B92, LossHalvesReception) {
  SessionConfig cfg = base(Protocol::B92, 100000, 5);
  cfg.noise.loss_p = 0.5;
  Rng rng(cfg.seed);
  int received = 0;
  for (const auto& s : run_stage1_b92(cfg, rng, nullptr).slots) received += s.received;
  EXPECT_NEAR(received / 1e5, 0.5, 0.01);
}

TEST(SiftB92, CleanKeysAgree) {
  SessionConfig cfg = base(Protocol::B92, 5000, 6);
  Rng rng(cfg.seed);
  PublicTranscript t;
  const RawKeys raw = sift_b92(run_stage1_b92(cfg, rng, nullptr), t);
  EXPECT_EQ(raw.alice, raw.bob);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.read_all()[0].kind, MessageKind::ConclusiveSlots);
}

TEST(SiftB92, AllInconclusiveIsEmpty) {
  Stage1Record rec;
  rec.protocol = Protocol::B92;
  rec.slots.resize(4);
  for (auto& s : rec.slots) {
    s.received = true;
    s.bob_outcome = PovmOutcome::Inconclusive;
  }
  PublicTranscript t;
  EXPECT_THROW(sift_b92(rec, t), Error);
}

TEST(SiftB92, OpaqueAttackMatchesExactOracle) {
  const double theta = pi / 8;
  const oracle::ErrorOracle expected = oracle::b92_opaque(theta);
  SessionConfig cfg = base(Protocol::B92, 60000, 7);
  cfg.eve = Opaque{1.0};
  cfg.r_max = 1.0;
  const RunReport r = run_session(cfg);
  const double n = static_cast<double>(r.sifted_count);
  ASSERT_GE(n, 10000);
  EXPECT_NEAR(n / 60000.0, expected.conclusive, 3 * oracle::binomial_sigma(expected.conclusive, 60000));
  EXPECT_NEAR(r.sifted_error_rate, expected.error, 3 * oracle::binomial_sigma(expected.error, n));
  EXPECT_GT(r.sifted_error_rate, 5 * oracle::binomial_sigma(expected.error, n));
}

TEST(EstimateError, IdenticalKeys) {
  Rng rng(8);
  PublicTranscript t;
  const Bitstring k = parse_bits("1011001110001011");
  const ErrorEstimate e = estimate_error(k, k, 0.25, 0.12, rng, t);
  EXPECT_EQ(e.rate, 0.0);
  EXPECT_EQ(e.disclosed, 4u);
  EXPECT_EQ(e.alice.size(), 12u);
  EXPECT_EQ(e.alice, e.bob);
  EXPECT_FALSE(e.aborted);
}

TEST(EstimateError, FullDisclosureOfNoisyExample) {
  Rng rng(9);
  PublicTranscript t;
  const ErrorEstimate e = estimate_error(parse_bits("011000"), parse_bits("011110"), 1.0, 0.12, rng, t);
  EXPECT_DOUBLE_EQ(e.rate, 2.0 / 6.0);
  EXPECT_EQ(e.disagreements, 2u);
  EXPECT_TRUE(e.alice.empty());
  EXPECT_TRUE(e.aborted);
  EXPECT_EQ(t.read_all().back().kind, MessageKind::Abort);
}

TEST(EstimateError, SampleIsUniform) {
  // Every position should be disclosed about f of the time.
  std::vector<int> hits(20, 0);
  const Bitstring a(20, 0);
  Bitstring b(20, 0);
  for (int trial = 0; trial < 20000; ++trial) {
    Rng rng(static_cast<std::uint64_t>(trial));
    PublicTranscript t;
    estimate_error(a, b, 0.25, 1.0, rng, t);
    for (auto p : PayloadReader(t.read_all()[0].payload).indices()) ++hits[p];
  }
  for (int h : hits) EXPECT_NEAR(h / 20000.0, 0.25, 0.015);
}

TEST(EstimateError, LengthMismatch) {
  Rng rng(10);
  PublicTranscript t;
  EXPECT_THROW(estimate_error(parse_bits("01"), parse_bits("0"), 0.5, 0.1, rng, t), Error);
}

TEST(RunSession, CleanBb84) {
  const RunReport r = run_session(base(Protocol::BB84, 10000, 11));
  EXPECT_FALSE(r.aborted);
  EXPECT_EQ(r.error_rate, 0.0);
  EXPECT_TRUE(r.reconciliation_ok);
  EXPECT_EQ(r.final_key_alice, r.final_key_bob);
  EXPECT_EQ(r.final_key_length, r.reconciled_length - r.leaked_bits - r.security_parameter);
  EXPECT_EQ(r.final_key_alice.size(), r.final_key_length);
}

TEST(RunSession, OpaqueAborts) {
  SessionConfig cfg = base(Protocol::BB84, 20000, 12);
  cfg.eve = Opaque{1.0};
  const RunReport r = run_session(cfg);
  EXPECT_TRUE(r.aborted);
  EXPECT_EQ(r.abort_reason, "error-rate-exceeds-threshold");
  EXPECT_NEAR(r.error_rate, 0.25, 0.04);
  EXPECT_EQ(r.final_key_length, 0u);
  EXPECT_TRUE(r.final_key_alice.empty());
}

TEST(RunSession, EmptySiftedKeyAborts) {
  SessionConfig cfg = base(Protocol::BB84, 100, 13);
  cfg.noise.loss_p = 1.0;
  const RunReport r = run_session(cfg);
  EXPECT_TRUE(r.aborted);
  EXPECT_EQ(r.abort_reason, "empty-sifted-key");
}

TEST(RunSession, TooShortKeyAborts) {
  SessionConfig cfg = base(Protocol::BB84, 30, 14);
  cfg.security_parameter = 40;
  const RunReport r = run_session(cfg);
  EXPECT_TRUE(r.aborted);
  EXPECT_EQ(r.abort_reason, "key-exhausted");
}

TEST(RunSession, Deterministic) {
  SessionConfig cfg = base(Protocol::B92, 20000, 15);
  cfg.noise.flip_p = 0.02;
  cfg.eve = Opaque{0.1};
  const SessionResult a = run_session_detailed(cfg);
  const SessionResult b = run_session_detailed(cfg);
  EXPECT_EQ(a.transcript.serialize(), b.transcript.serialize());
  EXPECT_EQ(a.report.final_key_alice, b.report.final_key_alice);
  EXPECT_EQ(a.report.eve_guess_accuracy, b.report.eve_guess_accuracy);
  cfg.seed = 16;
  EXPECT_NE(run_session_detailed(cfg).transcript.serialize(), a.transcript.serialize());
}

TEST(RunSession, NoisyRunsReconcile) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SessionConfig cfg = base(Protocol::BB84, 20000, seed);
    cfg.noise.flip_p = 0.03;
    cfg.noise.loss_p = 0.2;
    const RunReport r = run_session(cfg);
    ASSERT_FALSE(r.aborted);
    EXPECT_TRUE(r.reconciliation_ok);
    EXPECT_EQ(r.final_key_alice, r.final_key_bob);
    EXPECT_EQ(r.final_key_length, r.reconciled_length - r.leaked_bits - r.security_parameter);
  }
}

TEST(SessionConfig, Validation) {
  auto expect_invalid = [](SessionConfig cfg) {
    EXPECT_THROW(cfg.validate(), Error);
  };
  SessionConfig cfg;
  cfg.n_pulses = 0;
  expect_invalid(cfg);
  cfg = {};
  cfg.sample_fraction = 0.0;
  expect_invalid(cfg);
  cfg = {};
  cfg.r_max = 1.5;
  expect_invalid(cfg);
  cfg = {};
  cfg.protocol = Protocol::B92;
  cfg.theta = 1.0;
  expect_invalid(cfg);
  cfg = {};
  cfg.eve = make_translucent_unitary(pi / 8, 0.1);  // BB84
  expect_invalid(cfg);
  cfg.protocol = Protocol::B92;
  cfg.theta = 0.3;  // strategy built for pi / 8
  expect_invalid(cfg);
  cfg.theta = pi / 8;
  EXPECT_NO_THROW(cfg.validate());
}
