#include "qkdcli/fixtures.hpp"

#include <sstream>

#include "qkd/otp.hpp"
#include "qkd/protocol.hpp"

namespace qkd::cli {
namespace {

// Basis rows use R for the rectilinear (V/H) basis and D for the diagonal one.
std::vector<Basis> parse_bases(std::string_view row) {
  std::vector<Basis> out;
  for (char c : row) out.push_back(c == 'R' ? Basis::Rectilinear : Basis::Diagonal);
  return out;
}

constexpr std::string_view kAliceBases = "RDDDRDRDRD";
constexpr std::string_view kAliceBits = "1001100101";
constexpr std::string_view kBobBases = "DDRDRDRRRR";
constexpr std::string_view kBobBitsClean = "1011100000";
constexpr std::string_view kBobBitsTapped = "1011111000";
constexpr std::string_view kEveBases = "DRRDRRDDRR";
constexpr std::string_view kEveBits = "1011110100";

std::string join_slots(const std::vector<std::uint64_t>& slots) {
  std::ostringstream os;
  for (std::size_t i = 0; i < slots.size(); ++i) os << (i ? "," : "") << slots[i];
  return os.str();
}

struct Replay {
  RawKeys raw;
  std::vector<std::uint64_t> error_slots;      // 1-indexed
  std::vector<std::uint64_t> error_positions;  // 1-indexed within the raw key
};

Replay replay(std::string_view bob_bits_row) {
  const auto alice_bases = parse_bases(kAliceBases);
  const auto bob_bases = parse_bases(kBobBases);
  const Bitstring alice_bits = parse_bits(kAliceBits);
  const Bitstring bob_bits = parse_bits(bob_bits_row);

  std::vector<RecordedSlot> slots;
  for (std::size_t i = 0; i < alice_bits.size(); ++i) {
    slots.push_back({alice_bases[i], alice_bits[i], bob_bases[i], bob_bits[i]});
  }
  PublicTranscript transcript;
  Replay out;
  out.raw = sift_bb84(replay_bb84(slots), transcript);
  for (std::size_t i = 0; i < out.raw.alice.size(); ++i) {
    if (out.raw.alice[i] == out.raw.bob[i]) continue;
    out.error_slots.push_back(out.raw.slots[i] + 1);
    out.error_positions.push_back(i + 1);
  }
  return out;
}

// Where two parties measured or prepared in the same basis, their bits must
// agree; anything else would contradict the recorded table.
bool consistent(std::string_view bases_a, std::string_view bits_a, std::string_view bases_b,
                std::string_view bits_b) {
  for (std::size_t i = 0; i < bases_a.size(); ++i) {
    if (bases_a[i] == bases_b[i] && bits_a[i] != bits_b[i]) return false;
  }
  return true;
}

FixtureOutcome fig6a() {
  const Replay r = replay(kBobBitsClean);
  FixtureOutcome out;
  std::vector<std::uint64_t> sifted;
  for (auto s : r.raw.slots) sifted.push_back(s + 1);
  out.lines.push_back("sifted_slots=" + join_slots(sifted));
  out.lines.push_back("alice_raw_key=" + to_string(r.raw.alice));
  out.lines.push_back("bob_raw_key=" + to_string(r.raw.bob));
  out.pass = to_string(r.raw.alice) == "011000" && r.raw.alice == r.raw.bob && r.error_slots.empty() &&
             consistent(kAliceBases, kAliceBits, kBobBases, kBobBitsClean);
  return out;
}

FixtureOutcome fig6b() {
  const Replay r = replay(kBobBitsTapped);
  FixtureOutcome out;
  out.lines.push_back("alice_raw_key=" + to_string(r.raw.alice));
  out.lines.push_back("bob_raw_key=" + to_string(r.raw.bob));
  out.lines.push_back("error_slots=" + join_slots(r.error_slots));
  out.lines.push_back("error_positions=" + join_slots(r.error_positions));
  const bool eve_consistent = consistent(kAliceBases, kAliceBits, kEveBases, kEveBits) &&
                              consistent(kEveBases, kEveBits, kBobBases, kBobBitsTapped);
  out.lines.push_back(std::string("eve_table_consistent=") + (eve_consistent ? "true" : "false"));
  out.pass = to_string(r.raw.alice) == "011000" && to_string(r.raw.bob) == "011110" &&
             r.error_slots == std::vector<std::uint64_t>{6, 7} &&
             r.error_positions == std::vector<std::uint64_t>{4, 5} && eve_consistent;
  return out;
}

FixtureOutcome vernam() {
  const Bitstring plain = parse_bits("0110 0101 1101");
  const Bitstring key = parse_bits("1010 1110 0100");
  const Bitstring cipher = otp_xor(plain, key);
  const Bitstring back = otp_xor(cipher, key);
  FixtureOutcome out;
  out.lines.push_back("ciphertext=" + to_string(cipher));
  out.lines.push_back("decrypted=" + to_string(back));
  out.pass = to_string(cipher) == "110010111001" && back == plain;
  return out;
}

}  // namespace

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names{"fig6a", "fig6b", "vernam"};
  return names;
}

std::optional<FixtureOutcome> run_fixture(std::string_view name) {
  if (name == "fig6a") return fig6a();
  if (name == "fig6b") return fig6b();
  if (name == "vernam") return vernam();
  return std::nullopt;
}

}  // namespace qkd::cli
