#include "qkdcli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qkd/otp.hpp"
#include "qkdcli/fixtures.hpp"
#include "qkdcli/report.hpp"

namespace qkd::cli {

namespace {

/// Input/output failure distinct from usage errors.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string read_file(const std::filesystem::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read " + path.string());
  return data;
}

void write_file(const std::filesystem::path& path, const std::string& data, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << data;
  if (!out.flush()) throw IoError("cannot write " + path.string());
}

}  // namespace

SessionConfig build_config(const RunOptions& o) {
  SessionConfig cfg;
  cfg.protocol = o.protocol == "b92" ? Protocol::B92 : Protocol::BB84;
  cfg.n_pulses = o.n;
  cfg.seed = o.seed;
  cfg.theta = o.theta;
  cfg.noise = NoiseModel{o.flip, o.loss, o.multi};
  cfg.sample_fraction = o.sample_frac;
  cfg.r_max = o.rmax;
  cfg.security_parameter = o.sec_param;
  cfg.reconcile.n_clean = o.n_clean;
  cfg.reconcile.max_passes = o.max_passes;

  if (o.eve == "none") {
    cfg.eve = NoEve{};
  } else if (o.eve == "opaque") {
    cfg.eve = Opaque{o.eve_frac};
  } else if (o.eve == "translucent") {
    cfg.eve = make_translucent_unitary(o.theta, o.eve_theta_out.value_or(o.theta / 2));
  } else if (o.eve == "entangle") {
    cfg.eve = make_translucent_entangling(o.theta, o.eve_mix);
  } else if (o.eve == "pns") {
    cfg.eve = PhotonNumberSplit{};
  } else {
    throw Error(Errc::InvalidConfig, "unknown eavesdropper '" + o.eve + "'");
  }
  cfg.validate();
  return cfg;
}

std::vector<std::string> config_file_arguments(const std::filesystem::path& path) {
  std::istringstream in(read_file(path, false));
  std::vector<std::string> args;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    args.push_back("--" + key + "=" + trim(std::string_view(body).substr(eq + 1)));
  }
  return args;
}

bool KeyLedger::contains(const std::string& fingerprint) const {
  if (!std::filesystem::exists(path_)) return false;
  std::istringstream in(read_file(path_, false));
  std::string line;
  while (std::getline(in, line)) {
    if (line.substr(0, line.find('\t')) == fingerprint) return true;
  }
  return false;
}

void KeyLedger::append(const std::string& fingerprint, const std::string& timestamp) const {
  std::ofstream out(path_, std::ios::app);
  if (!out) throw IoError("cannot open ledger " + path_.string());
  out << fingerprint << '\t' << timestamp << '\n';
  if (!out.flush()) throw IoError("cannot write ledger " + path_.string());
}

std::size_t KeyLedger::size() const {
  if (!std::filesystem::exists(path_)) return 0;
  const std::string data = read_file(path_, false);
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), '\n'));
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

namespace {

void add_session_flags(CLI::App& cmd, RunOptions& o) {
  cmd.add_option("--protocol", o.protocol, "bb84 or b92")->check(CLI::IsMember({"bb84", "b92"}));
  cmd.add_option("--n", o.n, "number of pulses")->check(CLI::PositiveNumber);
  cmd.add_option("--seed", o.seed, "session seed");
  cmd.add_option("--flip", o.flip, "polarization flip probability")->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--loss", o.loss, "loss probability")->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--multi", o.multi, "two-photon emission probability")->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--theta", o.theta, "B92 half-angle in radians");
  cmd.add_option("--eve", o.eve, "eavesdropper")
      ->check(CLI::IsMember({"none", "opaque", "translucent", "entangle", "pns"}));
  cmd.add_option("--eve-frac", o.eve_frac, "fraction of pulses the opaque eavesdropper measures")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--eve-theta-out", o.eve_theta_out, "outgoing carrier angle of the translucent attack");
  cmd.add_option("--eve-mix", o.eve_mix, "mixing angle of the entangling attack");
  cmd.add_option("--sample-frac", o.sample_frac, "fraction of the raw key disclosed for estimation");
  cmd.add_option("--rmax", o.rmax, "abort threshold on the estimated error rate");
  cmd.add_option("--sec-param", o.sec_param, "privacy amplification security parameter s");
  cmd.add_option("--n-clean", o.n_clean, "consecutive clean subset checks ending reconciliation");
  cmd.add_option("--max-passes", o.max_passes, "maximum permutation passes");
  cmd.add_option("--config", "key = value file; command-line flags take precedence");
}

/// Splices `--config FILE` contents in front of the explicit flags so the
/// latter win under the take-last policy.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::vector<std::string> from_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::optional<std::string> path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
    if (path) {
      try {
        auto extra = config_file_arguments(*path);
        from_file.insert(from_file.end(), extra.begin(), extra.end());
      } catch (const IoError&) {
        throw;
      } catch (const std::runtime_error& e) {
        throw CLI::ValidationError("--config", e.what());
      }
    }
    out.push_back(args[i]);
  }
  if (!from_file.empty() && !out.empty()) out.insert(out.begin() + 1, from_file.begin(), from_file.end());
  return out;
}

struct RunFlags {
  RunOptions opts;
  bool json = false;
  bool summary = false;
  bool timings = false;
  std::string dump_transcript;
};

int do_run(const RunFlags& f, std::ostream& out) {
  const SessionConfig cfg = build_config(f.opts);
  const SessionResult result = run_session_detailed(cfg);
  if (!f.dump_transcript.empty()) write_file(f.dump_transcript, result.transcript.serialize(), false);
  out << (f.summary ? report_summary(result) : report_json(cfg, result, f.timings));
  return kExitOk;
}

struct SweepFlags {
  RunOptions opts;
  std::string vary;
  double from = 0.0;
  double to = 1.0;
  std::size_t steps = 5;
  std::size_t repeats = 1;
};

/// Grid point i takes seeds seed + i * repeats + r for r in [0, repeats).
int do_sweep(const SweepFlags& f, std::ostream& out) {
  out << "param,mean_error_rate,mean_conclusive_rate,mean_final_len,aborted_frac\n";
  for (std::size_t i = 0; i < f.steps; ++i) {
    const double value =
        f.steps == 1 ? f.from : f.from + (f.to - f.from) * static_cast<double>(i) / static_cast<double>(f.steps - 1);
    RunOptions o = f.opts;
    if (f.vary == "eve-frac") {
      if (o.eve == "none") o.eve = "opaque";
      if (o.eve != "opaque") throw Error(Errc::InvalidConfig, "--vary eve-frac needs --eve opaque");
      o.eve_frac = value;
    } else if (f.vary == "theta") {
      o.theta = value;
    } else {
      o.flip = value;
    }

    double err = 0, conclusive = 0, final_len = 0, aborted = 0;
    for (std::size_t r = 0; r < f.repeats; ++r) {
      o.seed = f.opts.seed + i * f.repeats + r;
      const RunReport rep = run_session(build_config(o));
      err += rep.error_rate;
      conclusive += static_cast<double>(rep.sifted_count) / static_cast<double>(rep.n_pulses);
      final_len += static_cast<double>(rep.final_key_length);
      aborted += rep.aborted ? 1.0 : 0.0;
    }
    const auto n = static_cast<double>(f.repeats);
    out << std::fixed << std::setprecision(6) << value << ',' << err / n << ',' << conclusive / n << ','
        << std::setprecision(2) << final_len / n << ',' << std::setprecision(6) << aborted / n << '\n';
  }
  return kExitOk;
}

int do_fixture(const std::string& name, std::ostream& out, std::ostream& err) {
  const auto outcome = run_fixture(name);
  if (!outcome) {
    err << "unknown fixture '" << name << "'; known fixtures:";
    for (const auto& n : fixture_names()) err << ' ' << n;
    err << '\n';
    return kExitUsage;
  }
  out << name << ": " << (outcome->pass ? "PASS" : "FAIL") << '\n';
  for (const auto& line : outcome->lines) out << "  " << line << '\n';
  return outcome->pass ? kExitOk : kExitFailure;
}

struct OtpFlags {
  std::string in;
  std::string key;
  std::string out;
  std::string ledger;
  std::string format = "bin";
};

Bitstring read_bits(const std::string& path, const std::string& format) {
  if (format == "raw") {
    const std::string data = read_file(path, true);
    const std::vector<std::uint8_t> bytes(data.begin(), data.end());
    return unpack_bits(bytes, bytes.size() * 8);
  }
  const std::string text = read_file(path, false);
  if (format == "hex") {
    std::string digits;
    std::copy_if(text.begin(), text.end(), std::back_inserter(digits),
                 [](unsigned char c) { return !std::isspace(c); });
    const auto bytes = from_hex(digits);
    return unpack_bits(bytes, bytes.size() * 8);
  }
  return parse_bits(text);
}

void write_bits(const std::string& path, const Bitstring& bits, const std::string& format) {
  if (format == "raw") {
    const auto bytes = pack_bits(bits);
    write_file(path, std::string(bytes.begin(), bytes.end()), true);
  } else if (format == "hex") {
    write_file(path, to_hex(pack_bits(bits)) + "\n", false);
  } else {
    write_file(path, to_string(bits) + "\n", false);
  }
}

int do_otp(bool encrypt, const OtpFlags& f, std::ostream& out, std::ostream& err) {
  Bitstring text;
  Bitstring key;
  try {
    text = read_bits(f.in, f.format);
    key = read_bits(f.key, f.format);
  } catch (const Error& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return kExitFailure;
  }

  const std::string fingerprint = key_fingerprint(key);
  const KeyLedger ledger(f.ledger);
  if (encrypt && ledger.contains(fingerprint)) {
    err << "error: key " << fingerprint.substr(0, 16) << "... is already recorded in " << f.ledger
        << "; a one-time pad key must never encrypt two messages\n";
    return kExitKeyReuse;
  }

  Bitstring result;
  try {
    result = otp_xor(text, key);
  } catch (const Error& e) {
    err << "error: " << e.what() << " (input " << text.size() << " bits, key " << key.size() << " bits)\n";
    return kExitFailure;
  }
  write_bits(f.out, result, f.format);
  if (encrypt) ledger.append(fingerprint, utc_timestamp());
  out << (encrypt ? "encrypted " : "decrypted ") << result.size() << " bits -> " << f.out << '\n';
  return kExitOk;
}

void add_otp_flags(CLI::App& cmd, OtpFlags& f, bool ledger_required) {
  cmd.add_option("--in", f.in, "input file")->required();
  cmd.add_option("--key", f.key, "key file")->required();
  cmd.add_option("--out", f.out, "output file")->required();
  auto* ledger = cmd.add_option("--ledger", f.ledger, "key fingerprint ledger");
  if (ledger_required) ledger->required();
  cmd.add_option("--format", f.format, "raw bytes, hex text, or 0/1 text")
      ->check(CLI::IsMember({"raw", "hex", "bin"}));
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum key distribution simulator"};
  app.name("qkdsim");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "run one seeded session and print its report");
  add_session_flags(*run, run_flags.opts);
  auto* json = run->add_flag("--json", run_flags.json, "JSON report (default)");
  auto* summary = run->add_flag("--summary", run_flags.summary, "human-readable summary");
  json->excludes(summary);
  run->add_flag("--timings", run_flags.timings, "include stage timings in the JSON report");
  run->add_option("--dump-transcript", run_flags.dump_transcript, "write the public transcript to FILE");

  SweepFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "average sessions over a parameter grid and print CSV");
  add_session_flags(*sweep, sweep_flags.opts);
  sweep->add_option("--vary", sweep_flags.vary, "parameter to vary")
      ->required()
      ->check(CLI::IsMember({"eve-frac", "theta", "flip"}));
  sweep->add_option("--from", sweep_flags.from, "first grid value");
  sweep->add_option("--to", sweep_flags.to, "last grid value");
  sweep->add_option("--steps", sweep_flags.steps, "grid points")->check(CLI::PositiveNumber);
  sweep->add_option("--repeats", sweep_flags.repeats, "sessions per grid point")->check(CLI::PositiveNumber);

  std::string fixture_name;
  auto* fixture = app.add_subcommand("fixture", "replay a recorded example and check it");
  fixture->add_option("name", fixture_name, "fig6a, fig6b or vernam")->required();

  auto* otp = app.add_subcommand("otp", "one-time pad with a key-reuse ledger");
  otp->require_subcommand(1);
  OtpFlags enc_flags;
  OtpFlags dec_flags;
  auto* enc = otp->add_subcommand("encrypt", "encrypt and record the key fingerprint");
  add_otp_flags(*enc, enc_flags, true);
  auto* dec = otp->add_subcommand("decrypt", "decrypt; never touches the ledger");
  add_otp_flags(*dec, dec_flags, false);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  try {
    if (run->parsed()) return do_run(run_flags, out);
    if (sweep->parsed()) return do_sweep(sweep_flags, out);
    if (fixture->parsed()) return do_fixture(fixture_name, out, err);
    if (enc->parsed()) return do_otp(true, enc_flags, out, err);
    if (dec->parsed()) return do_otp(false, dec_flags, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace qkd::cli
