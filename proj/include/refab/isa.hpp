#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "refab/kernel_kind.hpp"

namespace refab {

inline constexpr int kSlotCount = 5;
inline constexpr int kParamSetCount = 4;
inline constexpr int kAguCount = 8;
inline constexpr std::size_t kVliwBytes = 24;
inline constexpr uint32_t kMaxVliws = 4096;
inline constexpr uint16_t kMax12 = 0x0FFF;
inline constexpr uint16_t kImageVersion = 1;

// Controller jump/trap sub-instruction. Encoding 10 is unassigned.
enum class FlowOpcode : uint8_t {
  NoJmp = 0,
  AlwJmp = 1,
  JmpIfCntEq = 2,
  JmpIfCntNeq = 3,
  JmpIfCntLt = 4,
  JmpIfCntGt = 5,
  JmpIfAccEq = 6,
  JmpIfAccNeq = 7,
  JmpIfAccLt = 8,
  JmpIfAccGt = 9,
  TrapAlw = 11,
  TrapIfAccEq = 12,
  TrapIfAccNeq = 13,
  TrapIfAccLt = 14,
  TrapIfAccGt = 15,
};

enum class Compare : uint8_t { Eq, Neq, Lt, Gt };

bool is_defined(FlowOpcode op);
bool is_cnt_conditioned(FlowOpcode op);
bool is_acc_conditioned(FlowOpcode op);  // JMP_IF_ACC_* and TRAP_IF_ACC_*
bool is_trap(FlowOpcode op);
bool is_jump(FlowOpcode op);  // everything that can redirect to a parameter-set destination
Compare comparison_of(FlowOpcode op);
bool compare_holds(Compare cmp, uint32_t lhs, uint32_t rhs);

struct FlowOp {
  FlowOpcode opcode = FlowOpcode::NoJmp;
  uint8_t param_set = 0;  // 0..3
  uint16_t operand = 0;   // 12-bit
  uint8_t acc_mask = 0;   // 5-bit slot selection
  uint8_t trap_value = 0; // 3-bit
  friend bool operator==(const FlowOp&, const FlowOp&) = default;
};

enum class AuxOpcode : uint8_t {
  Nop = 0,
  PsSetDest = 1,
  PsCntSet = 2,
  PsCntInc = 3,
  PsCntReset = 4,
  AguSet = 5,
  AguAdd = 6,
};

bool is_param_set_op(AuxOpcode op);

struct AuxOp {
  AuxOpcode opcode = AuxOpcode::Nop;
  uint8_t target = 0;     // parameter set 0..3 or AGU register 0..7
  uint16_t operand = 0;   // 12-bit
  friend bool operator==(const AuxOp&, const AuxOp&) = default;
};

enum class SrcKind : uint8_t { None = 0, MemAgu = 1, SlotOut = 2, Imm = 3 };
enum class DstKind : uint8_t { None = 0, OutOnly = 1, MemAgu = 2 };

struct SrcSel {
  SrcKind kind = SrcKind::None;
  uint8_t index = 0;  // 4-bit
  friend bool operator==(const SrcSel&, const SrcSel&) = default;
};

struct DstSel {
  DstKind kind = DstKind::None;
  uint8_t index = 0;  // 3-bit
  friend bool operator==(const DstSel&, const DstSel&) = default;
};

struct SlotInstr {
  uint8_t op = 0;  // 6-bit, kernel specific; 0 is SLOT_NOP
  SrcSel src_a;
  SrcSel src_b;
  DstSel dst;
  uint8_t imm_nibble = 0;
  friend bool operator==(const SlotInstr&, const SlotInstr&) = default;
};

// An IMM operand carries an 8-bit value: the selector index is the high
// nibble, the shared imm_nibble the low one.
inline uint32_t immediate_value(SrcSel sel, uint8_t imm_nibble) {
  return (static_cast<uint32_t>(sel.index & 0xF) << 4) | (imm_nibble & 0xF);
}

struct Vliw {
  std::array<SlotInstr, kSlotCount> slots{};
  FlowOp flow;
  AuxOp aux;
  friend bool operator==(const Vliw&, const Vliw&) = default;
};

using VliwWord = std::array<uint8_t, kVliwBytes>;

class EncodeError : public std::runtime_error {
 public:
  EncodeError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class DecodeError : public std::runtime_error {
 public:
  DecodeError(unsigned bit_offset, const std::string& what)
      : std::runtime_error("bit " + std::to_string(bit_offset) + ": " + what),
        bit_offset_(bit_offset) {}
  unsigned bit_offset() const { return bit_offset_; }

 private:
  unsigned bit_offset_;
};

// Throws EncodeError naming the first out-of-range or non-canonical field.
VliwWord encode_vliw(const Vliw& v);
// Throws DecodeError carrying the bit offset of the offending field.
Vliw decode_vliw(std::span<const uint8_t, kVliwBytes> word);

// Bit offsets of the External Interfaces layout, exposed for tests and tools.
namespace layout {
inline constexpr unsigned kSlotBits = 28;
inline constexpr unsigned kCtrlBase = 140;
inline constexpr unsigned kFlowOpcode = kCtrlBase;
inline constexpr unsigned kParamSet = kCtrlBase + 4;
inline constexpr unsigned kFlowOperand = kCtrlBase + 6;
inline constexpr unsigned kAccMask = kCtrlBase + 18;
inline constexpr unsigned kTrapValue = kCtrlBase + 23;
inline constexpr unsigned kAuxOpcode = kCtrlBase + 26;
inline constexpr unsigned kAuxTarget = kCtrlBase + 29;
inline constexpr unsigned kAuxOperand = kCtrlBase + 32;
inline constexpr unsigned kCtrlReserved = kCtrlBase + 44;
inline constexpr unsigned kTailReserved = 188;
}  // namespace layout

uint64_t read_bits(std::span<const uint8_t, kVliwBytes> word, unsigned offset, unsigned width);
void write_bits(std::span<uint8_t, kVliwBytes> word, unsigned offset, unsigned width,
                uint64_t value);

struct ProgramImage {
  uint16_t version = kImageVersion;
  std::array<KernelKind, kSlotCount> slot_bindings{};
  uint16_t entry_pc = 0;
  std::vector<VliwWord> words;
  std::vector<uint32_t> memory;  // initial data-memory segment, loaded at address 0

  uint32_t vliw_count() const { return static_cast<uint32_t>(words.size()); }
  friend bool operator==(const ProgramImage&, const ProgramImage&) = default;
};

class ImageFormatError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kImageHeaderBytes = 21;

std::vector<uint8_t> serialize_image(const ProgramImage& image);
ProgramImage parse_image(std::span<const uint8_t> bytes);
ProgramImage read_image_file(const std::filesystem::path& path);
void write_image_file(const std::filesystem::path& path, const ProgramImage& image);

// Static checks; an empty result means the image is runnable. The machine
// skips the destination check so a bad PS_SET_DEST traps at run time.
std::vector<std::string> validate_program(const ProgramImage& image, bool check_destinations = true);

std::string_view flow_mnemonic(FlowOpcode op);
std::string_view aux_mnemonic(AuxOpcode op);

}  // namespace refab
