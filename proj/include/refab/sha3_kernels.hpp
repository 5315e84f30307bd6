#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "refab/fabric.hpp"

namespace refab {

// Lane (x, y) lives at index x + 5*y.
using KeccakState = std::array<uint64_t, 25>;

inline constexpr std::size_t kSha3Rate = 136;          // bytes, SHA3-256
inline constexpr std::size_t kSha3RateWords = kSha3Rate / 4;
inline constexpr int kKeccakRounds = 24;

using Sha3Block = std::array<uint8_t, kSha3Rate>;
using Sha3Digest = std::array<uint8_t, 32>;

// SHA-3 domain bits 01 followed by pad10*1.
std::vector<Sha3Block> pad10x1(std::span<const uint8_t> msg);

uint64_t keccak_round_constant(int round);
unsigned keccak_rho_offset(int lane);

// Seven shift registers of 0, 1, 2, 4, 8, 16 and 32 bits. A lane passes
// through the stages named by the bits of its rotation amount; stage 0 is
// the pass-through register for offset 0.
class RhoBuffer {
 public:
  static constexpr std::array<unsigned, 7> kStageShift = {0, 1, 2, 4, 8, 16, 32};

  // Rotates up to four lanes at once; lane_ids pick the rho offsets.
  std::array<uint64_t, 4> apply(std::span<const uint64_t> lanes, std::span<const int> lane_ids);
  static std::vector<int> stages_for(unsigned offset);
  const std::array<uint64_t, 7>& stage_uses() const { return uses_; }

 private:
  std::array<uint64_t, 7> uses_{};
};

KeccakState keccak_round(const KeccakState& st, int round);
void keccak_f1600(KeccakState& st);
Sha3Digest sha3_256(std::span<const uint8_t> msg);
std::string to_hex(std::span<const uint8_t> bytes);

// Padded message as little-endian 32-bit words, kSha3RateWords per block.
std::vector<uint32_t> sha3_stream_words(std::span<const uint8_t> msg);

class ShaBuffKernel final : public Kernel {
 public:
  KernelKind kind() const override { return KernelKind::ShaBuff; }
  bool ready(uint8_t op, const StreamBank& streams) const override;
  KernelResult execute(uint8_t op, uint32_t a, uint32_t b, StreamBank& streams) override;
  void reset() override {}
};

class ShaCompKernel final : public Kernel {
 public:
  KernelKind kind() const override { return KernelKind::ShaComp; }
  KernelResult execute(uint8_t op, uint32_t a, uint32_t b, StreamBank& streams) override;
  void reset() override;

  const KeccakState& res_memory() const { return res_; }
  const KeccakState& gam_memory() const { return gam_; }
  int round_index() const { return round_; }
  uint64_t rounds_done() const { return rounds_done_; }

 private:
  KeccakState res_{};
  KeccakState gam_{};
  RhoBuffer rho_;
  int round_ = 0;
  unsigned absorb_cursor_ = 0;
  unsigned squeeze_cursor_ = 0;
  uint64_t rounds_done_ = 0;
};

}  // namespace refab
