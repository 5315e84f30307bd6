#include "refab/sha3_kernels.hpp"

#include <bit>

namespace refab {

namespace {

constexpr std::array<uint64_t, kKeccakRounds> kRoundConstants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808AULL, 0x8000000080008000ULL,
    0x000000000000808BULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008AULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000AULL,
    0x000000008000808BULL, 0x800000000000008BULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800AULL, 0x800000008000000AULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

constexpr std::array<unsigned, 25> kRhoOffsets = {
    0,  1,  62, 28, 27,
    36, 44, 6,  55, 20,
    3,  10, 43, 25, 39,
    41, 45, 15, 21, 8,
    18, 2,  61, 56, 14,
};

// theta, rho through the buffer, pi, then chi into gam and iota into res.
void comp_round(KeccakState& res, KeccakState& gam, RhoBuffer& rho, int round) {
  std::array<uint64_t, 5> c{};
  for (int x = 0; x < 5; ++x) {
    c[x] = res[x] ^ res[x + 5] ^ res[x + 10] ^ res[x + 15] ^ res[x + 20];
  }
  KeccakState a = res;
  for (int x = 0; x < 5; ++x) {
    const uint64_t d = c[(x + 4) % 5] ^ std::rotl(c[(x + 1) % 5], 1);
    for (int y = 0; y < 5; ++y) a[x + 5 * y] ^= d;
  }

  KeccakState rotated{};
  for (int base = 0; base < 25; base += 4) {
    const int n = std::min(4, 25 - base);
    std::array<int, 4> ids{};
    for (int i = 0; i < n; ++i) ids[i] = base + i;
    auto out = rho.apply(std::span<const uint64_t>(a.data() + base, n), std::span<const int>(ids.data(), n));
    for (int i = 0; i < n; ++i) rotated[base + i] = out[i];
  }

  KeccakState b{};
  for (int x = 0; x < 5; ++x) {
    for (int y = 0; y < 5; ++y) b[y + 5 * ((2 * x + 3 * y) % 5)] = rotated[x + 5 * y];
  }

  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) {
      gam[x + 5 * y] = b[x + 5 * y] ^ (~b[(x + 1) % 5 + 5 * y] & b[(x + 2) % 5 + 5 * y]);
    }
  }
  res = gam;
  res[0] ^= kRoundConstants[static_cast<std::size_t>(round)];
}

}  // namespace

uint64_t keccak_round_constant(int round) { return kRoundConstants.at(static_cast<std::size_t>(round)); }

unsigned keccak_rho_offset(int lane) { return kRhoOffsets.at(static_cast<std::size_t>(lane)); }

std::vector<int> RhoBuffer::stages_for(unsigned offset) {
  if (offset == 0) return {0};
  std::vector<int> out;
  for (int s = 1; s < 7; ++s) {
    if (offset & kStageShift[s]) out.push_back(s);
  }
  return out;
}

std::array<uint64_t, 4> RhoBuffer::apply(std::span<const uint64_t> lanes, std::span<const int> lane_ids) {
  std::array<uint64_t, 4> out{};
  // splitter -> shift-register chain -> combiner
  for (std::size_t i = 0; i < lanes.size() && i < 4; ++i) {
    uint64_t v = lanes[i];
    for (int stage : stages_for(keccak_rho_offset(lane_ids[i]))) {
      v = std::rotl(v, static_cast<int>(kStageShift[stage]));
      ++uses_[stage];
    }
    out[i] = v;
  }
  return out;
}

KeccakState keccak_round(const KeccakState& st, int round) {
  if (round < 0 || round >= kKeccakRounds) throw std::out_of_range("keccak round index");
  KeccakState res = st;
  KeccakState gam{};
  RhoBuffer rho;
  comp_round(res, gam, rho, round);
  return res;
}

void keccak_f1600(KeccakState& st) {
  KeccakState gam{};
  RhoBuffer rho;
  for (int r = 0; r < kKeccakRounds; ++r) comp_round(st, gam, rho, r);
}

std::vector<Sha3Block> pad10x1(std::span<const uint8_t> msg) {
  const std::size_t blocks = msg.size() / kSha3Rate + 1;
  std::vector<Sha3Block> out(blocks, Sha3Block{});
  for (std::size_t i = 0; i < msg.size(); ++i) out[i / kSha3Rate][i % kSha3Rate] = msg[i];
  out.back()[msg.size() % kSha3Rate] ^= 0x06;
  out.back()[kSha3Rate - 1] ^= 0x80;
  return out;
}

Sha3Digest sha3_256(std::span<const uint8_t> msg) {
  KeccakState st{};
  for (const auto& block : pad10x1(msg)) {
    for (std::size_t i = 0; i < kSha3Rate / 8; ++i) {
      uint64_t lane = 0;
      for (int b = 0; b < 8; ++b) lane |= uint64_t{block[8 * i + b]} << (8 * b);
      st[i] ^= lane;
    }
    keccak_f1600(st);
  }
  Sha3Digest d{};
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<uint8_t>(st[i / 8] >> (8 * (i % 8)));
  return d;
}

std::string to_hex(std::span<const uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (uint8_t b : bytes) {
    s += kDigits[b >> 4];
    s += kDigits[b & 15];
  }
  return s;
}

std::vector<uint32_t> sha3_stream_words(std::span<const uint8_t> msg) {
  std::vector<uint32_t> words;
  for (const auto& block : pad10x1(msg)) {
    for (std::size_t i = 0; i < kSha3RateWords; ++i) {
      words.push_back(uint32_t{block[4 * i]} | uint32_t{block[4 * i + 1]} << 8 | uint32_t{block[4 * i + 2]} << 16 |
                      uint32_t{block[4 * i + 3]} << 24);
    }
  }
  return words;
}

bool ShaBuffKernel::ready(uint8_t op, const StreamBank& streams) const {
  return op != opc::buff::kPop || !streams.empty(0);
}

KernelResult ShaBuffKernel::execute(uint8_t op, uint32_t, uint32_t, StreamBank& streams) {
  if (op != opc::buff::kPop) throw SimulationFault("SHA_BUFF opcode " + std::to_string(op) + " undefined");
  uint32_t w = streams.pop(0);
  return {w, static_cast<uint8_t>(streams.empty(0) ? 1 : 0), false};
}

KernelResult ShaCompKernel::execute(uint8_t op, uint32_t a, uint32_t, StreamBank&) {
  switch (op) {
    case opc::comp::kInit:
      res_ = {};
      gam_ = {};
      round_ = 0;
      absorb_cursor_ = squeeze_cursor_ = 0;
      return {};
    case opc::comp::kAbsorb: {
      if (absorb_cursor_ >= kSha3RateWords) throw SimulationFault("SHA_COMP absorb past the rate");
      const unsigned lane = absorb_cursor_ / 2;
      res_[lane] ^= uint64_t{a} << (32 * (absorb_cursor_ % 2));
      ++absorb_cursor_;
      return {};
    }
    case opc::comp::kRound:
      comp_round(res_, gam_, rho_, round_);
      round_ = (round_ + 1) % kKeccakRounds;
      ++rounds_done_;
      absorb_cursor_ = squeeze_cursor_ = 0;
      return {0, static_cast<uint8_t>(round_ == 0 ? 1 : 0), false};
    case opc::comp::kSqueeze: {
      if (squeeze_cursor_ >= kSha3RateWords) throw SimulationFault("SHA_COMP squeeze past the rate");
      const unsigned lane = squeeze_cursor_ / 2;
      const auto w = static_cast<uint32_t>(res_[lane] >> (32 * (squeeze_cursor_ % 2)));
      ++squeeze_cursor_;
      return {w, 0, false};
    }
    default: throw SimulationFault("SHA_COMP opcode " + std::to_string(op) + " undefined");
  }
}

void ShaCompKernel::reset() {
  res_ = {};
  gam_ = {};
  rho_ = {};
  round_ = 0;
  absorb_cursor_ = squeeze_cursor_ = 0;
  rounds_done_ = 0;
}

}  // namespace refab
