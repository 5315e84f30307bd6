#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace refab {

// Accelerator kinds that can occupy a fabric slot. The numeric values are the
// slot-binding bytes of the program image format.
enum class KernelKind : uint8_t {
  None = 0,
  Fmav = 1,
  Div = 2,
  Sqrt = 3,
  Util = 4,
  CnnMac = 5,
  CnnSum = 6,
  ShaBuff = 7,
  ShaComp = 8,
};

inline constexpr uint8_t kKernelKindCount = 9;

struct OpcodeInfo {
  uint8_t code;
  std::string_view mnemonic;
  uint32_t latency;  // default cycles from issue until out/ctrl are visible
};

// Per-kind opcode numbering. Opcode 0 is SLOT_NOP for every kind.
namespace opc {
inline constexpr uint8_t kNop = 0;

namespace fmav {
inline constexpr uint8_t kAdd = 1, kSub = 2, kMul = 3, kSubSqAcc = 4, kMac = 5, kClrAcc = 6,
                         kRdAcc = 7;
}
namespace div {
inline constexpr uint8_t kDiv = 1;
}
namespace sqrt {
inline constexpr uint8_t kSqrt = 1;
}
namespace util {
inline constexpr uint8_t kMin = 1, kMax = 2, kAbs = 3, kCmp = 4;
}
namespace mac {
inline constexpr uint8_t kSetGeom = 1, kLoadWeights = 2, kClear = 3, kMac = 4, kNextRow = 5,
                         kRead = 6;
}
namespace sum {
inline constexpr uint8_t kSetQuant = 1, kAccumulate = 2, kQuantize = 3, kTake = 4, kClear = 5;
}
namespace buff {
inline constexpr uint8_t kPop = 1;
}
namespace comp {
inline constexpr uint8_t kInit = 1, kAbsorb = 2, kRound = 3, kSqueeze = 4;
}
}  // namespace opc

std::string_view kind_name(KernelKind kind);
std::optional<KernelKind> kind_from_name(std::string_view name);
std::optional<KernelKind> kind_from_byte(uint8_t value);

std::span<const OpcodeInfo> opcode_table(KernelKind kind);
const OpcodeInfo* find_opcode(KernelKind kind, uint8_t code);
const OpcodeInfo* find_opcode(KernelKind kind, std::string_view mnemonic);

}  // namespace refab
