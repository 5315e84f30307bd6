#include "refab/kernel_kind.hpp"

#include <array>

namespace refab {

namespace {

constexpr std::array<std::string_view, kKernelKindCount> kKindNames = {
    "NONE", "FMAV", "DIV", "SQRT", "UTIL", "CNN_MAC", "CNN_SUM", "SHA_BUFF", "SHA_COMP"};

constexpr OpcodeInfo kNoneOps[] = {{0, "NOP", 1}};

constexpr OpcodeInfo kFmavOps[] = {
    {0, "NOP", 1},       {1, "ADD", 3},    {2, "SUB", 3},    {3, "MUL", 3},
    {4, "SUBSQ_ACC", 4}, {5, "MAC", 4},    {6, "CLR_ACC", 1}, {7, "RD_ACC", 1},
};
constexpr OpcodeInfo kDivOps[] = {{0, "NOP", 1}, {1, "DIV", 16}};
constexpr OpcodeInfo kSqrtOps[] = {{0, "NOP", 1}, {1, "SQRT", 16}};
constexpr OpcodeInfo kUtilOps[] = {
    {0, "NOP", 1}, {1, "MIN", 1}, {2, "MAX", 1}, {3, "ABS", 1}, {4, "CMP", 1},
};
constexpr OpcodeInfo kMacOps[] = {
    {0, "NOP", 1}, {1, "SET_GEOM", 1}, {2, "LDW", 1},      {3, "CLR", 1},
    {4, "MAC", 2}, {5, "NEXT_ROW", 1}, {6, "RD", 1},
};
constexpr OpcodeInfo kSumOps[] = {
    {0, "NOP", 1}, {1, "SETQ", 1}, {2, "ACC", 2}, {3, "QUANT", 2}, {4, "TAKE", 1}, {5, "CLR", 1},
};
constexpr OpcodeInfo kBuffOps[] = {{0, "NOP", 1}, {1, "POP", 1}};
constexpr OpcodeInfo kCompOps[] = {
    {0, "NOP", 1}, {1, "INIT", 1}, {2, "ABSORB", 1}, {3, "ROUND", 2}, {4, "SQUEEZE", 1},
};

}  // namespace

std::string_view kind_name(KernelKind kind) {
  auto idx = static_cast<std::size_t>(kind);
  return idx < kKindNames.size() ? kKindNames[idx] : "INVALID";
}

std::optional<KernelKind> kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<KernelKind>(i);
  }
  return std::nullopt;
}

std::optional<KernelKind> kind_from_byte(uint8_t value) {
  if (value >= kKernelKindCount) return std::nullopt;
  return static_cast<KernelKind>(value);
}

std::span<const OpcodeInfo> opcode_table(KernelKind kind) {
  switch (kind) {
    case KernelKind::None: return kNoneOps;
    case KernelKind::Fmav: return kFmavOps;
    case KernelKind::Div: return kDivOps;
    case KernelKind::Sqrt: return kSqrtOps;
    case KernelKind::Util: return kUtilOps;
    case KernelKind::CnnMac: return kMacOps;
    case KernelKind::CnnSum: return kSumOps;
    case KernelKind::ShaBuff: return kBuffOps;
    case KernelKind::ShaComp: return kCompOps;
  }
  return kNoneOps;
}

const OpcodeInfo* find_opcode(KernelKind kind, uint8_t code) {
  for (const auto& info : opcode_table(kind)) {
    if (info.code == code) return &info;
  }
  return nullptr;
}

const OpcodeInfo* find_opcode(KernelKind kind, std::string_view mnemonic) {
  for (const auto& info : opcode_table(kind)) {
    if (info.mnemonic == mnemonic) return &info;
  }
  return nullptr;
}

}  // namespace refab
