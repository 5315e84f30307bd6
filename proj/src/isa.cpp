#include "refab/isa.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>

namespace refab {

bool is_defined(FlowOpcode op) { return static_cast<uint8_t>(op) <= 15 && static_cast<uint8_t>(op) != 10; }

bool is_cnt_conditioned(FlowOpcode op) {
  return op >= FlowOpcode::JmpIfCntEq && op <= FlowOpcode::JmpIfCntGt;
}

bool is_acc_conditioned(FlowOpcode op) {
  return (op >= FlowOpcode::JmpIfAccEq && op <= FlowOpcode::JmpIfAccGt) ||
         (op >= FlowOpcode::TrapIfAccEq && op <= FlowOpcode::TrapIfAccGt);
}

bool is_trap(FlowOpcode op) { return op >= FlowOpcode::TrapAlw; }

bool is_jump(FlowOpcode op) {
  return op >= FlowOpcode::AlwJmp && op <= FlowOpcode::JmpIfAccGt;
}

Compare comparison_of(FlowOpcode op) {
  switch (op) {
    case FlowOpcode::JmpIfCntNeq:
    case FlowOpcode::JmpIfAccNeq:
    case FlowOpcode::TrapIfAccNeq: return Compare::Neq;
    case FlowOpcode::JmpIfCntLt:
    case FlowOpcode::JmpIfAccLt:
    case FlowOpcode::TrapIfAccLt: return Compare::Lt;
    case FlowOpcode::JmpIfCntGt:
    case FlowOpcode::JmpIfAccGt:
    case FlowOpcode::TrapIfAccGt: return Compare::Gt;
    default: return Compare::Eq;
  }
}

bool compare_holds(Compare cmp, uint32_t lhs, uint32_t rhs) {
  switch (cmp) {
    case Compare::Eq: return lhs == rhs;
    case Compare::Neq: return lhs != rhs;
    case Compare::Lt: return lhs < rhs;
    case Compare::Gt: return lhs > rhs;
  }
  return false;
}

bool is_param_set_op(AuxOpcode op) {
  return op >= AuxOpcode::PsSetDest && op <= AuxOpcode::PsCntReset;
}

std::string_view flow_mnemonic(FlowOpcode op) {
  switch (op) {
    case FlowOpcode::NoJmp: return "NO_JMP";
    case FlowOpcode::AlwJmp: return "ALW_JMP";
    case FlowOpcode::JmpIfCntEq: return "JMP_IF_CNT_EQ";
    case FlowOpcode::JmpIfCntNeq: return "JMP_IF_CNT_NEQ";
    case FlowOpcode::JmpIfCntLt: return "JMP_IF_CNT_LT";
    case FlowOpcode::JmpIfCntGt: return "JMP_IF_CNT_GT";
    case FlowOpcode::JmpIfAccEq: return "JMP_IF_ACC_EQ";
    case FlowOpcode::JmpIfAccNeq: return "JMP_IF_ACC_NEQ";
    case FlowOpcode::JmpIfAccLt: return "JMP_IF_ACC_LT";
    case FlowOpcode::JmpIfAccGt: return "JMP_IF_ACC_GT";
    case FlowOpcode::TrapAlw: return "TRAP_ALW";
    case FlowOpcode::TrapIfAccEq: return "TRAP_IF_ACC_EQ";
    case FlowOpcode::TrapIfAccNeq: return "TRAP_IF_ACC_NEQ";
    case FlowOpcode::TrapIfAccLt: return "TRAP_IF_ACC_LT";
    case FlowOpcode::TrapIfAccGt: return "TRAP_IF_ACC_GT";
  }
  return "?";
}

std::string_view aux_mnemonic(AuxOpcode op) {
  switch (op) {
    case AuxOpcode::Nop: return "AUX_NOP";
    case AuxOpcode::PsSetDest: return "PS_SET_DEST";
    case AuxOpcode::PsCntSet: return "PS_CNT_SET";
    case AuxOpcode::PsCntInc: return "PS_CNT_INC";
    case AuxOpcode::PsCntReset: return "PS_CNT_RESET";
    case AuxOpcode::AguSet: return "AGU_SET";
    case AuxOpcode::AguAdd: return "AGU_ADD";
  }
  return "?";
}

uint64_t read_bits(std::span<const uint8_t, kVliwBytes> word, unsigned offset, unsigned width) {
  uint64_t value = 0;
  for (unsigned i = 0; i < width; ++i) {
    unsigned bit = offset + i;
    if ((word[bit / 8] >> (bit % 8)) & 1u) value |= uint64_t{1} << i;
  }
  return value;
}

void write_bits(std::span<uint8_t, kVliwBytes> word, unsigned offset, unsigned width,
                uint64_t value) {
  for (unsigned i = 0; i < width; ++i) {
    unsigned bit = offset + i;
    auto mask = static_cast<uint8_t>(1u << (bit % 8));
    if ((value >> i) & 1u) {
      word[bit / 8] |= mask;
    } else {
      word[bit / 8] &= static_cast<uint8_t>(~mask);
    }
  }
}

namespace {

struct Violation {
  std::string field;
  unsigned offset;
  std::string message;
};

struct SlotOffsets {
  unsigned op, a_kind, a_idx, b_kind, b_idx, dst_kind, dst_idx, imm, reserved;
};

SlotOffsets slot_offsets(int slot) {
  unsigned base = layout::kSlotBits * static_cast<unsigned>(slot);
  return {base, base + 6, base + 8, base + 12, base + 14, base + 18, base + 20, base + 23, base + 27};
}

std::optional<Violation> check_src(const std::string& name, SrcSel sel, unsigned kind_off,
                                   unsigned idx_off) {
  if (static_cast<uint8_t>(sel.kind) > 3) return Violation{name + ".kind", kind_off, "undefined selector kind"};
  if (sel.index > 15) return Violation{name + ".index", idx_off, "index exceeds 4 bits"};
  switch (sel.kind) {
    case SrcKind::None:
      if (sel.index != 0) return Violation{name + ".index", idx_off, "index set on NONE selector"};
      break;
    case SrcKind::MemAgu:
      if (sel.index >= kAguCount) return Violation{name + ".index", idx_off, "AGU register out of range"};
      break;
    case SrcKind::SlotOut:
      if (sel.index >= kSlotCount) return Violation{name + ".index", idx_off, "slot index out of range"};
      break;
    case SrcKind::Imm: break;
  }
  return std::nullopt;
}

std::optional<Violation> check_slot(int slot, const SlotInstr& s) {
  const std::string p = "slot" + std::to_string(slot);
  const SlotOffsets o = slot_offsets(slot);
  if (s.op > 63) return Violation{p + ".op", o.op, "opcode exceeds 6 bits"};
  if (s.imm_nibble > 15) return Violation{p + ".imm_nibble", o.imm, "immediate exceeds 4 bits"};
  if (s.op == 0) {
    if (s.src_a != SrcSel{}) return Violation{p + ".src_a.kind", o.a_kind, "SLOT_NOP carries an operand"};
    if (s.src_b != SrcSel{}) return Violation{p + ".src_b.kind", o.b_kind, "SLOT_NOP carries an operand"};
    if (s.dst != DstSel{}) return Violation{p + ".dst.kind", o.dst_kind, "SLOT_NOP carries a destination"};
    if (s.imm_nibble != 0) return Violation{p + ".imm_nibble", o.imm, "SLOT_NOP carries an immediate"};
    return std::nullopt;
  }
  if (auto v = check_src(p + ".src_a", s.src_a, o.a_kind, o.a_idx)) return v;
  if (auto v = check_src(p + ".src_b", s.src_b, o.b_kind, o.b_idx)) return v;
  if (s.imm_nibble != 0 && s.src_a.kind != SrcKind::Imm && s.src_b.kind != SrcKind::Imm) {
    return Violation{p + ".imm_nibble", o.imm, "immediate without IMM selector"};
  }
  if (static_cast<uint8_t>(s.dst.kind) > 2) return Violation{p + ".dst.kind", o.dst_kind, "undefined destination kind"};
  if (s.dst.index > 7) return Violation{p + ".dst.index", o.dst_idx, "index exceeds 3 bits"};
  if (s.dst.kind != DstKind::MemAgu && s.dst.index != 0) {
    return Violation{p + ".dst.index", o.dst_idx, "index set on non-memory destination"};
  }
  return std::nullopt;
}

std::optional<Violation> check_flow(const FlowOp& f) {
  if (!is_defined(f.opcode)) return Violation{"flow.opcode", layout::kFlowOpcode, "undefined flow opcode"};
  if (f.param_set >= kParamSetCount) return Violation{"flow.param_set", layout::kParamSet, "parameter set exceeds 2 bits"};
  if (f.operand > kMax12) return Violation{"flow.operand", layout::kFlowOperand, "operand exceeds 12 bits"};
  if (f.acc_mask > 0x1F) return Violation{"flow.acc_mask", layout::kAccMask, "mask exceeds 5 bits"};
  if (f.trap_value > 7) return Violation{"flow.trap_value", layout::kTrapValue, "trap value exceeds 3 bits"};

  const bool uses_set = is_jump(f.opcode);
  const bool uses_operand = is_cnt_conditioned(f.opcode) || is_acc_conditioned(f.opcode);
  const bool uses_mask = is_acc_conditioned(f.opcode);
  const bool uses_trap = is_trap(f.opcode);
  if (!uses_set && f.param_set != 0) return Violation{"flow.param_set", layout::kParamSet, "field unused by opcode must be zero"};
  if (!uses_operand && f.operand != 0) return Violation{"flow.operand", layout::kFlowOperand, "field unused by opcode must be zero"};
  if (!uses_mask && f.acc_mask != 0) return Violation{"flow.acc_mask", layout::kAccMask, "field unused by opcode must be zero"};
  if (!uses_trap && f.trap_value != 0) return Violation{"flow.trap_value", layout::kTrapValue, "field unused by opcode must be zero"};
  return std::nullopt;
}

std::optional<Violation> check_aux(const AuxOp& a) {
  if (static_cast<uint8_t>(a.opcode) > 6) return Violation{"aux.opcode", layout::kAuxOpcode, "undefined aux opcode"};
  if (a.target > 7) return Violation{"aux.target", layout::kAuxTarget, "target exceeds 3 bits"};
  if (a.operand > kMax12) return Violation{"aux.operand", layout::kAuxOperand, "operand exceeds 12 bits"};
  if (a.opcode == AuxOpcode::Nop && a.target != 0) return Violation{"aux.target", layout::kAuxTarget, "field unused by opcode must be zero"};
  const bool uses_operand = a.opcode == AuxOpcode::PsSetDest || a.opcode == AuxOpcode::PsCntSet ||
                            a.opcode == AuxOpcode::AguSet || a.opcode == AuxOpcode::AguAdd;
  if (!uses_operand && a.operand != 0) return Violation{"aux.operand", layout::kAuxOperand, "field unused by opcode must be zero"};
  return std::nullopt;
}

std::optional<Violation> check_vliw(const Vliw& v) {
  for (int i = 0; i < kSlotCount; ++i) {
    if (auto viol = check_slot(i, v.slots[static_cast<std::size_t>(i)])) return viol;
  }
  if (auto viol = check_flow(v.flow)) return viol;
  return check_aux(v.aux);
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t get_le(std::span<const uint8_t> bytes, std::size_t pos, int width) {
  uint32_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<uint32_t>(bytes[pos + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

}  // namespace

VliwWord encode_vliw(const Vliw& v) {
  if (auto viol = check_vliw(v)) throw EncodeError(viol->field, viol->message);
  VliwWord word{};
  for (int i = 0; i < kSlotCount; ++i) {
    const auto& s = v.slots[static_cast<std::size_t>(i)];
    const SlotOffsets o = slot_offsets(i);
    write_bits(word, o.op, 6, s.op);
    write_bits(word, o.a_kind, 2, static_cast<uint8_t>(s.src_a.kind));
    write_bits(word, o.a_idx, 4, s.src_a.index);
    write_bits(word, o.b_kind, 2, static_cast<uint8_t>(s.src_b.kind));
    write_bits(word, o.b_idx, 4, s.src_b.index);
    write_bits(word, o.dst_kind, 2, static_cast<uint8_t>(s.dst.kind));
    write_bits(word, o.dst_idx, 3, s.dst.index);
    write_bits(word, o.imm, 4, s.imm_nibble);
  }
  write_bits(word, layout::kFlowOpcode, 4, static_cast<uint8_t>(v.flow.opcode));
  write_bits(word, layout::kParamSet, 2, v.flow.param_set);
  write_bits(word, layout::kFlowOperand, 12, v.flow.operand);
  write_bits(word, layout::kAccMask, 5, v.flow.acc_mask);
  write_bits(word, layout::kTrapValue, 3, v.flow.trap_value);
  write_bits(word, layout::kAuxOpcode, 3, static_cast<uint8_t>(v.aux.opcode));
  write_bits(word, layout::kAuxTarget, 3, v.aux.target);
  write_bits(word, layout::kAuxOperand, 12, v.aux.operand);
  return word;
}

Vliw decode_vliw(std::span<const uint8_t, kVliwBytes> word) {
  Vliw v;
  for (int i = 0; i < kSlotCount; ++i) {
    auto& s = v.slots[static_cast<std::size_t>(i)];
    const SlotOffsets o = slot_offsets(i);
    if (read_bits(word, o.reserved, 1) != 0) throw DecodeError(o.reserved, "reserved slot bit set");
    s.op = static_cast<uint8_t>(read_bits(word, o.op, 6));
    s.src_a = {static_cast<SrcKind>(read_bits(word, o.a_kind, 2)), static_cast<uint8_t>(read_bits(word, o.a_idx, 4))};
    s.src_b = {static_cast<SrcKind>(read_bits(word, o.b_kind, 2)), static_cast<uint8_t>(read_bits(word, o.b_idx, 4))};
    s.dst = {static_cast<DstKind>(read_bits(word, o.dst_kind, 2)), static_cast<uint8_t>(read_bits(word, o.dst_idx, 3))};
    s.imm_nibble = static_cast<uint8_t>(read_bits(word, o.imm, 4));
  }
  if (read_bits(word, layout::kCtrlReserved, 4) != 0) throw DecodeError(layout::kCtrlReserved, "reserved controller bits set");
  if (read_bits(word, layout::kTailReserved, 4) != 0) throw DecodeError(layout::kTailReserved, "reserved tail bits set");
  v.flow.opcode = static_cast<FlowOpcode>(read_bits(word, layout::kFlowOpcode, 4));
  v.flow.param_set = static_cast<uint8_t>(read_bits(word, layout::kParamSet, 2));
  v.flow.operand = static_cast<uint16_t>(read_bits(word, layout::kFlowOperand, 12));
  v.flow.acc_mask = static_cast<uint8_t>(read_bits(word, layout::kAccMask, 5));
  v.flow.trap_value = static_cast<uint8_t>(read_bits(word, layout::kTrapValue, 3));
  v.aux.opcode = static_cast<AuxOpcode>(read_bits(word, layout::kAuxOpcode, 3));
  v.aux.target = static_cast<uint8_t>(read_bits(word, layout::kAuxTarget, 3));
  v.aux.operand = static_cast<uint16_t>(read_bits(word, layout::kAuxOperand, 12));
  if (auto viol = check_vliw(v)) throw DecodeError(viol->offset, viol->field + ": " + viol->message);
  return v;
}

std::vector<uint8_t> serialize_image(const ProgramImage& image) {
  if (image.words.size() > kMaxVliws) throw ImageFormatError("image holds more than 4096 VLIWs");
  std::vector<uint8_t> out;
  out.reserve(kImageHeaderBytes + image.words.size() * kVliwBytes + image.memory.size() * 4);
  out.insert(out.end(), {'R', 'F', 'S', 'I'});
  put_u16(out, image.version);
  for (auto kind : image.slot_bindings) out.push_back(static_cast<uint8_t>(kind));
  put_u16(out, image.entry_pc);
  put_u32(out, static_cast<uint32_t>(image.words.size()));
  put_u32(out, static_cast<uint32_t>(image.memory.size()));
  for (const auto& w : image.words) out.insert(out.end(), w.begin(), w.end());
  for (uint32_t m : image.memory) put_u32(out, m);
  return out;
}

ProgramImage parse_image(std::span<const uint8_t> bytes) {
  if (bytes.size() < kImageHeaderBytes) throw ImageFormatError("truncated header");
  if (std::memcmp(bytes.data(), "RFSI", 4) != 0) throw ImageFormatError("bad magic");
  ProgramImage image;
  image.version = static_cast<uint16_t>(get_le(bytes, 4, 2));
  if (image.version != kImageVersion) {
    throw ImageFormatError("unsupported version " + std::to_string(image.version));
  }
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    auto kind = kind_from_byte(bytes[6 + i]);
    if (!kind) throw ImageFormatError("unknown kernel kind in slot binding " + std::to_string(i));
    image.slot_bindings[i] = *kind;
  }
  image.entry_pc = static_cast<uint16_t>(get_le(bytes, 11, 2));
  const uint32_t vliw_count = get_le(bytes, 13, 4);
  const uint32_t mem_words = get_le(bytes, 17, 4);
  if (vliw_count > kMaxVliws) throw ImageFormatError("vliw_count exceeds 4096");
  const std::size_t expected = kImageHeaderBytes + std::size_t{vliw_count} * kVliwBytes + std::size_t{mem_words} * 4;
  if (bytes.size() != expected) {
    throw ImageFormatError("size mismatch: expected " + std::to_string(expected) + " bytes, got " +
                           std::to_string(bytes.size()));
  }
  std::size_t pos = kImageHeaderBytes;
  image.words.resize(vliw_count);
  for (auto& w : image.words) {
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), kVliwBytes, w.begin());
    pos += kVliwBytes;
  }
  image.memory.resize(mem_words);
  for (auto& m : image.memory) {
    m = get_le(bytes, pos, 4);
    pos += 4;
  }
  return image;
}

ProgramImage read_image_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageFormatError("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_image(bytes);
}

void write_image_file(const std::filesystem::path& path, const ProgramImage& image) {
  auto bytes = serialize_image(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageFormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::string> validate_program(const ProgramImage& image, bool check_destinations) {
  std::vector<std::string> diags;
  const uint32_t count = image.vliw_count();
  if (count > kMaxVliws) diags.push_back("program holds " + std::to_string(count) + " VLIWs (max 4096)");
  if (image.entry_pc >= count) {
    diags.push_back("entry out of range (" + std::to_string(image.entry_pc) + " >= " + std::to_string(count) + ")");
  }
  for (uint32_t i = 0; i < count; ++i) {
    const std::string at = "vliw " + std::to_string(i) + ": ";
    Vliw v;
    try {
      v = decode_vliw(image.words[i]);
    } catch (const DecodeError& e) {
      diags.push_back(at + "decode error at " + e.what());
      continue;
    }
    if (is_acc_conditioned(v.flow.opcode) && v.flow.acc_mask == 0) {
      diags.push_back(at + "ACC-conditioned flow op with empty slot mask");
    }
    for (std::size_t s = 0; s < kSlotCount; ++s) {
      const auto kind = image.slot_bindings[s];
      if (!find_opcode(kind, v.slots[s].op)) {
        diags.push_back(at + "slot" + std::to_string(s) + " opcode " + std::to_string(v.slots[s].op) +
                        " undefined for " + std::string(kind_name(kind)));
      }
    }
    if (is_param_set_op(v.aux.opcode) && v.aux.target >= kParamSetCount) {
      diags.push_back(at + "parameter-set op targets set " + std::to_string(v.aux.target) + " (max 3)");
    }
    if (check_destinations && v.aux.opcode == AuxOpcode::PsSetDest && v.aux.operand >= count) {
      diags.push_back(at + "static jump destination out of range (" + std::to_string(v.aux.operand) +
                      " >= " + std::to_string(count) + ")");
    }
  }
  return diags;
}

}  // namespace refab
