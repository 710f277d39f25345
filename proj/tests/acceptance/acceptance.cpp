// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.
//
//   qkd_acceptance                 run everything
//   qkd_acceptance NAME [NAME...]  run the named criteria

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qkd/qkd.hpp"
#include "qkdcli/commands.hpp"
#include "qkdcli/fixtures.hpp"

#ifndef QKDSIM_PATH
#error "QKDSIM_PATH must name the qkdsim executable"
#endif

using namespace qkd;
using std::numbers::pi;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SessionConfig session(Protocol p, std::uint64_t n, std::uint64_t seed) {
  SessionConfig cfg;
  cfg.protocol = p;
  cfg.n_pulses = n;
  cfg.seed = seed;
  return cfg;
}

Bitstring random_bits(Rng& rng, std::size_t n) {
  Bitstring b(n);
  for (auto& x : b) x = static_cast<Bit>(rng.coin());
  return b;
}

oracle::Mat to_oracle(const Matrix2& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }

double max_abs(const oracle::Mat& m) {
  double r = 0;
  for (const auto& x : m) r = std::max(r, std::abs(x));
  return r;
}

oracle::Mat adjoint(const oracle::Mat& m) { return {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}; }

oracle::C expect(const oracle::Mat& m, const oracle::Vec& v) {
  const oracle::Vec mv{m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
  return oracle::dot(v, mv);
}

// 1. Full intercept-resend on BB84 leaves a 25% error in the sifted key.
void opaque_signature(Verdict& v) {
  double worst_dev = 0, slowest = 0;
  std::uint64_t min_sifted = ~0ull;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SessionConfig cfg = session(Protocol::BB84, 42000, seed);
    cfg.eve = Opaque{1.0};
    const auto t0 = Clock::now();
    const RunReport r = run_session(cfg);
    slowest = std::max(slowest, seconds_since(t0));
    min_sifted = std::min<std::uint64_t>(min_sifted, r.sifted_count);
    worst_dev = std::max(worst_dev, std::abs(r.sifted_error_rate - 0.25));
  }
  v.detail << "min sifted " << min_sifted << ", max |R - 0.25| " << worst_dev << ", slowest run " << slowest << " s";
  v.require(min_sifted >= 20000, "sifted >= 20000");
  v.require(worst_dev <= 0.02, "|R - 0.25| <= 0.02");
  v.require(slowest < 5.0, "runtime < 5 s");
}

// 2. No eavesdropper and no noise: zero errors, identical keys, every time.
void clean_channel(Verdict& v) {
  Rng seeds(20240601);
  int bad = 0, runs = 0;
  for (Protocol p : {Protocol::BB84, Protocol::B92}) {
    for (int i = 0; i < 1000; ++i, ++runs) {
      const RunReport r = run_session(session(p, 2000, seeds.next_u64()));
      const bool ok = !r.aborted && r.error_rate == 0.0 && r.sifted_error_rate == 0.0 && r.final_key_length > 0 &&
                      r.final_key_alice == r.final_key_bob;
      bad += !ok;
    }
  }
  v.detail << runs << " runs, " << bad << " with errors, aborts or unequal keys";
  v.require(bad == 0, "every run clean");
}

// 3. Recorded examples replay exactly.
void fixtures(Verdict& v) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> expected{
      {"fig6a", {"alice_raw_key=011000", "bob_raw_key=011000"}},
      {"fig6b", {"alice_raw_key=011000", "bob_raw_key=011110", "error_slots=6,7"}},
      {"vernam", {"ciphertext=110010111001", "decrypted=011001011101"}},
  };
  for (const auto& [name, lines] : expected) {
    const auto out = cli::run_fixture(name);
    v.require(out.has_value(), name + " exists");
    if (!out) continue;
    v.require(out->pass, name + " self-check");
    for (const auto& line : lines) {
      v.require(std::find(out->lines.begin(), out->lines.end(), line) != out->lines.end(), name + " " + line);
    }
    v.detail << name << (out->pass ? " ok " : " mismatch ");
  }
}

// 4. B92 conclusive rate against the quadratic-form oracle.
void b92_statistics(Verdict& v) {
  const double theta = pi / 8;
  const double oracle_rate = oracle::b92_conclusive_rate(theta);
  v.require(std::abs(oracle_rate - (1 - std::cos(2 * theta))) < 1e-12, "oracle matches 1 - cos 2 theta");
  SessionConfig cfg = session(Protocol::B92, 100000, 1);
  cfg.theta = theta;
  const RunReport r = run_session(cfg);
  const double rate = static_cast<double>(r.sifted_count) / 1e5;
  const auto errors = static_cast<std::uint64_t>(std::llround(r.sifted_error_rate * static_cast<double>(r.sifted_count)));
  v.detail << "conclusive " << rate << " vs oracle " << oracle_rate << ", conclusive errors " << errors;
  v.require(std::abs(rate - oracle_rate) <= 0.01, "conclusive within 0.01");
  v.require(errors == 0, "no conclusive errors");
}

// 5. The receiver POVM is complete, Hermitian and positive across theta.
void povm_validity(Verdict& v) {
  double completeness = 0, hermiticity = 0, negativity = 0, oracle_dev = 0;
  for (int i = 0; i < 50; ++i) {
    const double theta = 0.01 + (pi / 4 - 0.02) * (i + 0.5) / 50;
    const PovmSet p = build_povm(theta);
    const oracle::Povm o = oracle::povm(theta);
    const oracle::Mat ap = to_oracle(p.a_plus), am = to_oracle(p.a_minus), aq = to_oracle(p.a_q);
    completeness = std::max(completeness, max_abs(oracle::sub(oracle::add(oracle::add(ap, am), aq), oracle::eye())));
    for (const auto& m : {ap, am, aq}) {
      hermiticity = std::max(hermiticity, max_abs(oracle::sub(m, adjoint(m))));
      for (double ev : oracle::eigenvalues(m)) negativity = std::max(negativity, -ev);
    }
    oracle_dev = std::max({oracle_dev, max_abs(oracle::sub(ap, o.plus)), max_abs(oracle::sub(am, o.minus)),
                           max_abs(oracle::sub(aq, o.q))});
  }
  v.detail << "max |sum - I| " << completeness << ", max |A - A^dagger| " << hermiticity << ", max negative eigenvalue "
           << negativity << ", max deviation from oracle " << oracle_dev;
  v.require(completeness <= 1e-10, "completeness");
  v.require(hermiticity <= 1e-10, "hermiticity");
  v.require(negativity <= 1e-10, "positivity");
  v.require(oracle_dev <= 1e-10, "agreement with oracle");
}

// 6. Robertson inequality on random observables and states.
void uncertainty(Verdict& v) {
  Rng rng(6);
  auto sym = [&] { return rng.uniform() * 4 - 2; };
  auto hermitian = [&] {
    Matrix2 m;
    m(0, 0) = sym();
    m(1, 1) = sym();
    m(0, 1) = Complex(sym(), sym());
    m(1, 0) = std::conj(m(0, 1));
    return m;
  };
  int violations = 0, disagreements = 0;
  for (int i = 0; i < 10000; ++i) {
    const Matrix2 a = hermitian(), b = hermitian();
    const Ket2 s = make_qubit(Complex(sym(), sym()), Complex(sym(), sym()));
    const UncertaintyCheck c = uncertainty_check(a, b, s);

    const oracle::Vec sv{s[0], s[1]};
    const oracle::Mat oa = to_oracle(a), ob = to_oracle(b);
    auto variance = [&](const oracle::Mat& m) {
      const double mean = expect(m, sv).real();
      return expect(oracle::mul(m, m), sv).real() - mean * mean;
    };
    const double lhs = variance(oa) * variance(ob);
    const double rhs = std::norm(expect(oracle::sub(oracle::mul(oa, ob), oracle::mul(ob, oa)), sv)) / 4;
    violations += !(lhs >= rhs - 1e-9) || !c.holds;
    disagreements += std::abs(lhs - c.lhs) > 1e-9 || std::abs(rhs - c.rhs) > 1e-9;
  }
  v.detail << "10000 cases, " << violations << " violations, " << disagreements << " disagreements with oracle";
  v.require(violations == 0, "lhs >= rhs - 1e-9");
  v.require(disagreements == 0, "library matches oracle");
}

// 7. Estimation plus reconciliation on 4096-bit keys with 3% flips.
void reconciliation(Verdict& v) {
  int equal = 0;
  double worst_consumed = 0, total_consumed = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng keys(7000 + seed);
    const Bitstring a = random_bits(keys, 4096);
    Bitstring b = a;
    for (auto& x : b)
      if (keys.bernoulli(0.03)) x ^= 1;

    Rng rng(seed);
    PublicTranscript t;
    const ErrorEstimate e = estimate_error(a, b, 0.1, 0.12, rng, t);
    if (e.aborted) {
      worst_consumed = 1.0;
      continue;
    }
    const ReconcileResult r = reconcile(e.alice, e.bob, e.rate, ReconcileParams{}, rng, t);
    equal += r.alice == r.bob;
    const double consumed = static_cast<double>(e.disclosed + r.accounting.bits_discarded()) / 4096.0;
    worst_consumed = std::max(worst_consumed, consumed);
    total_consumed += consumed;
  }
  v.detail << equal << "/100 equal, mean consumed " << total_consumed / 100 << ", worst consumed " << worst_consumed;
  v.require(equal >= 99, ">= 99 equal");
  v.require(worst_consumed < 0.6, "consumed < 60% in every run");
}

// 8. Exhaustive information about the amplified key at n = 12, k = 4, s = 3.
void privacy_amplification(Verdict& v) {
  const auto t0 = Clock::now();
  const int n = 12;
  const std::uint64_t k = 4, s = 3;
  double total = 0;
  for (int d = 0; d < 200; ++d) {
    Rng rng(static_cast<std::uint64_t>(d) + 800);
    PublicTranscript t;
    const AmplifyResult amp = privacy_amplify(Bitstring(n, 0), k, s, rng, t);
    std::vector<std::uint32_t> masks;
    for (const auto& subset : amp.subsets.materialize()) {
      std::uint32_t m = 0;
      for (auto i : subset) m |= 1u << i;
      masks.push_back(m);
    }
    total += oracle::pa_information(n, masks, 0b1111);
  }
  const double mean = total / 200;
  const double bound = std::ldexp(1.0, -static_cast<int>(s)) / std::log(2.0);
  const double elapsed = seconds_since(t0);
  v.detail << "mean information " << mean << " bits, bound " << bound << ", " << elapsed << " s";
  v.require(mean <= bound, "mean <= 2^-s / ln 2");
  v.require(elapsed < 60.0, "runtime < 60 s");
}

// 9. Photon-number splitting: full knowledge of split slots, no extra errors.
void pns_stealth(Verdict& v) {
  SessionConfig with = session(Protocol::BB84, 1000000, 9);
  with.noise.multi_p = 1.0 / 200;
  with.noise.flip_p = 0.03;
  with.eve = PhotonNumberSplit{};
  SessionConfig without = with;
  without.seed = 10;
  without.eve = NoEve{};
  const RunReport r = run_session(with);
  const RunReport base = run_session(without);

  const double recorded = static_cast<double>(r.eve_recorded_slots) / 1e6;
  const double n1 = static_cast<double>(r.sifted_count), n2 = static_cast<double>(base.sifted_count);
  const double p1 = r.sifted_error_rate, p2 = base.sifted_error_rate;
  const double pooled = (p1 * n1 + p2 * n2) / (n1 + n2);
  const double z = (p1 - p2) / std::sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2));
  v.detail << "recorded " << recorded * 100 << "%, accuracy "
           << (r.eve_guess_accuracy ? std::to_string(*r.eve_guess_accuracy) : "none") << " over "
           << r.eve_guessed_count << " slots, error " << p1 << " vs baseline " << p2 << ", z " << z;
  v.require(std::abs(recorded - 0.005) <= 0.0005, "recorded 0.5% +- 0.05%");
  v.require(r.eve_guess_accuracy && *r.eve_guess_accuracy == 1.0 && r.eve_guessed_count > 0, "accuracy 1.0");
  v.require(std::abs(z) < 3.0, "|z| < 3");
}

std::string run_process(const std::string& args) {
  const std::string cmd = std::string(QKDSIM_PATH) + " " + args;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) return "<popen failed>";
  std::string out;
  char buf[4096];
  while (const std::size_t got = std::fread(buf, 1, sizeof buf, pipe.get())) out.append(buf, got);
  return out;
}

// 10. Repeated invocations give byte-identical reports.
void determinism(Verdict& v) {
  const std::vector<std::string> cases{
      "run --n 20000 --seed 7 --flip 0.02 --loss 0.1",
      "run --n 20000 --seed 8 --eve opaque --eve-frac 0.3",
      "run --protocol b92 --n 30000 --seed 9 --eve entangle",
      "run --protocol b92 --n 30000 --seed 9 --eve translucent --summary",
      "run --n 100000 --seed 10 --multi 0.01 --eve pns",
  };
  int identical = 0;
  for (const auto& c : cases) {
    const std::string first = run_process(c);
    const std::string second = run_process(c);
    std::vector<std::string> args;
    std::istringstream words(c);
    for (std::string w; words >> w;) args.push_back(w);
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    const bool same = code == 0 && !first.empty() && first == second && first == out.str();
    identical += same;
    v.require(same, c);
  }
  v.detail << identical << "/" << cases.size() << " invocations byte-identical across two processes and in-process";
}

struct Criterion {
  int number;
  const char* name;
  std::function<void(Verdict&)> check;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "opaque_signature", opaque_signature}, {2, "clean_channel", clean_channel},
      {3, "fixtures", fixtures},                 {4, "b92_statistics", b92_statistics},
      {5, "povm_validity", povm_validity},       {6, "uncertainty", uncertainty},
      {7, "reconciliation", reconciliation},     {8, "privacy_amplification", privacy_amplification},
      {9, "pns_stealth", pns_stealth},           {10, "determinism", determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> selected(argv + 1, argv + argc);
  bool all_pass = true;
  int ran = 0;
  for (const auto& c : criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.name) == selected.end()) continue;
    ++ran;
    Verdict v;
    try {
      c.check(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    all_pass = all_pass && v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << c.number << " " << c.name << ": " << v.detail.str() << std::endl;
  }
  if (ran == 0) {
    std::cerr << "no criterion matched\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}
