#include <benchmark/benchmark.h>

#include <numbers>

#include "qkd/qkd.hpp"

namespace {

qkd::Bitstring random_bits(qkd::Rng& rng, std::size_t n) {
  qkd::Bitstring b(n);
  for (auto& x : b) x = static_cast<qkd::Bit>(rng.coin());
  return b;
}

void BM_Stage1Bb84(benchmark::State& state) {
  qkd::SessionConfig cfg;
  cfg.n_pulses = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    qkd::Rng rng(1);
    benchmark::DoNotOptimize(qkd::run_stage1_bb84(cfg, rng, nullptr));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Stage1Bb84)->Arg(10000)->Arg(100000);

void BM_Stage1B92(benchmark::State& state) {
  qkd::SessionConfig cfg;
  cfg.protocol = qkd::Protocol::B92;
  cfg.n_pulses = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    qkd::Rng rng(1);
    benchmark::DoNotOptimize(qkd::run_stage1_b92(cfg, rng, nullptr));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Stage1B92)->Arg(100000);

// Full sessions, including the eavesdropper's bookkeeping where present.
void BM_Session(benchmark::State& state) {
  qkd::SessionConfig cfg;
  cfg.n_pulses = 50000;
  cfg.noise.flip_p = 0.02;
  switch (state.range(0)) {
    case 1:
      cfg.eve = qkd::Opaque{0.2};
      break;
    case 2:
      cfg.protocol = qkd::Protocol::B92;
      cfg.eve = qkd::make_translucent_entangling(std::numbers::pi / 8, 0.6);
      break;
    default:
      break;
  }
  for (auto _ : state) benchmark::DoNotOptimize(qkd::run_session(cfg));
  state.SetItemsProcessed(state.iterations() * 50000);
}
BENCHMARK(BM_Session)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Reconcile(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  qkd::Rng keys(3);
  const qkd::Bitstring a = random_bits(keys, n);
  qkd::Bitstring b = a;
  for (auto& x : b)
    if (keys.bernoulli(0.03)) x ^= 1;
  for (auto _ : state) {
    qkd::Rng rng(4);
    qkd::PublicTranscript t;
    benchmark::DoNotOptimize(qkd::reconcile(a, b, 0.03, qkd::ReconcileParams{}, rng, t));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Reconcile)->Arg(4096)->Arg(65536);

void BM_PrivacyAmplify(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  qkd::Rng keys(5);
  const qkd::Bitstring key = random_bits(keys, n);
  for (auto _ : state) {
    qkd::Rng rng(6);
    qkd::PublicTranscript t;
    benchmark::DoNotOptimize(qkd::privacy_amplify(key, n / 10, 10, rng, t));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PrivacyAmplify)->Arg(1024)->Arg(4096);

void BM_PovmMeasure(benchmark::State& state) {
  const qkd::PovmSet povm = qkd::build_povm(std::numbers::pi / 8);
  const qkd::Ket2 s = qkd::polarization(std::numbers::pi / 8);
  qkd::Rng rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(qkd::measure_povm(s, povm, rng));
}
BENCHMARK(BM_PovmMeasure);

}  // namespace
BENCHMARK_MAIN();
