#include "qkdcli/report.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace qkd::cli {

std::string sha256_hex(std::span<const std::uint8_t> data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  return to_hex(std::span<const std::uint8_t>(digest.data(), len));
}

std::string sha256_hex(const std::string& text) {
  return sha256_hex(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string key_fingerprint(const Bitstring& key) {
  std::vector<std::uint8_t> buf;
  const std::uint64_t n = key.size();
  for (int shift = 56; shift >= 0; shift -= 8) buf.push_back(static_cast<std::uint8_t>(n >> shift));
  const auto packed = pack_bits(key);
  buf.insert(buf.end(), packed.begin(), packed.end());
  return sha256_hex(buf);
}

namespace {

std::string key_hex(const Bitstring& key) { return to_hex(pack_bits(key)); }

void echo_strategy(nlohmann::ordered_json& j, const EveStrategy& eve) {
  j["config_eve"] = std::string(strategy_name(eve));
  if (const auto* o = std::get_if<Opaque>(&eve)) j["config_eve_fraction"] = o->fraction;
  if (const auto* t = std::get_if<TranslucentUnitary>(&eve)) {
    j["config_eve_probe_overlap"] = std::abs(inner(t->probe_plus, t->probe_minus));
  }
  if (const auto* t = std::get_if<TranslucentEntangling>(&eve)) {
    j["config_eve_a"] = std::abs(t->a);
    j["config_eve_b"] = std::abs(t->b);
  }
}

}  // namespace

std::string report_json(const SessionConfig& cfg, const SessionResult& result, bool with_timings) {
  const RunReport& r = result.report;
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;

  j["config_protocol"] = std::string(protocol_name(cfg.protocol));
  j["config_n_pulses"] = cfg.n_pulses;
  j["config_seed"] = cfg.seed;
  j["config_theta"] = cfg.theta;
  j["config_flip_p"] = cfg.noise.flip_p;
  j["config_loss_p"] = cfg.noise.loss_p;
  j["config_multi_p"] = cfg.noise.multi_p;
  echo_strategy(j, cfg.eve);
  j["config_sample_fraction"] = cfg.sample_fraction;
  j["config_r_max"] = cfg.r_max;
  j["config_security_parameter"] = cfg.security_parameter;
  j["config_leak_factor"] = cfg.leak_factor;
  j["config_n_clean"] = cfg.reconcile.n_clean;
  j["config_max_passes"] = cfg.reconcile.max_passes;

  j["protocol"] = std::string(protocol_name(r.protocol));
  j["n_pulses"] = r.n_pulses;
  j["seed"] = r.seed;
  j["received_count"] = r.received_count;
  j["sifted_count"] = r.sifted_count;
  j["disclosed_count"] = r.disclosed_count;
  j["error_rate"] = r.error_rate;
  j["sifted_error_rate"] = r.sifted_error_rate;
  j["aborted"] = r.aborted;
  j["abort_reason"] = r.abort_reason;
  j["reconciled_length"] = r.reconciled_length;
  j["reconciliation_ok"] = r.reconciliation_ok;
  j["parity_bits_disclosed"] = r.parity_bits_disclosed;
  j["bits_discarded"] = r.bits_discarded;
  j["leaked_bits"] = r.leaked_bits;
  j["security_parameter"] = r.security_parameter;
  j["final_key_length"] = r.final_key_length;
  j["final_key_alice"] = key_hex(r.final_key_alice);
  j["final_key_bob"] = key_hex(r.final_key_bob);
  j["final_keys_equal"] = r.final_key_alice == r.final_key_bob;
  j["eve_recorded_slots"] = r.eve_recorded_slots;
  j["eve_guessed_count"] = r.eve_guessed_count;
  if (r.eve_guess_accuracy) {
    j["eve_guess_accuracy"] = *r.eve_guess_accuracy;
  } else {
    j["eve_guess_accuracy"] = nullptr;
  }
  j["eve_final_key_info_estimate"] = r.eve_final_key_info_estimate;
  j["transcript_messages"] = r.transcript_messages;
  j["transcript_sha256"] = sha256_hex(result.transcript.serialize());

  if (with_timings) {
    j["timing_stage1_ms"] = r.timings.stage1_ms;
    j["timing_sifting_ms"] = r.timings.sifting_ms;
    j["timing_estimation_ms"] = r.timings.estimation_ms;
    j["timing_reconciliation_ms"] = r.timings.reconciliation_ms;
    j["timing_amplification_ms"] = r.timings.amplification_ms;
    j["timing_total_ms"] = r.timings.total_ms;
  }
  return j.dump(2) + "\n";
}

std::string report_summary(const SessionResult& result) {
  const RunReport& r = result.report;
  std::ostringstream os;
  os << "protocol: " << protocol_name(r.protocol) << '\n'
     << "pulses: " << r.n_pulses << " (seed " << r.seed << ")\n"
     << "received: " << r.received_count << '\n'
     << "sifted: " << r.sifted_count << '\n'
     << "disclosed for estimation: " << r.disclosed_count << '\n'
     << "estimated error rate: " << r.error_rate << '\n'
     << "sifted-key error rate: " << r.sifted_error_rate << '\n';
  if (r.aborted) {
    os << "aborted: " << r.abort_reason << '\n';
  } else {
    os << "reconciled: " << r.reconciled_length << (r.reconciliation_ok ? " (keys agree)" : " (keys differ)") << '\n'
       << "parity bits disclosed: " << r.parity_bits_disclosed << '\n'
       << "bits discarded: " << r.bits_discarded << '\n'
       << "leak bound k: " << r.leaked_bits << '\n'
       << "final key: " << r.final_key_length << " bits"
       << (r.final_key_alice == r.final_key_bob ? ", identical" : ", MISMATCH") << '\n';
  }
  if (r.eve_recorded_slots > 0 || r.eve_guessed_count > 0) {
    os << "eve recorded slots: " << r.eve_recorded_slots << '\n' << "eve guesses: " << r.eve_guessed_count;
    if (r.eve_guess_accuracy) os << " (accuracy " << *r.eve_guess_accuracy << ')';
    os << '\n';
  }
  os << "eve final-key information estimate: " << r.eve_final_key_info_estimate << " bits\n"
     << "public messages: " << r.transcript_messages << '\n';
  return os.str();
}

}  // namespace qkd::cli
