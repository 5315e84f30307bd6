#include "refab/fabric.hpp"

#include "refab/cnn_kernels.hpp"
#include "refab/fp_kernels.hpp"
#include "refab/sha3_kernels.hpp"

namespace refab {

void StreamBank::push(int channel, std::span<const uint32_t> words) {
  auto& q = fifo(channel);
  q.insert(q.end(), words.begin(), words.end());
}

uint32_t StreamBank::pop(int channel) {
  auto& q = fifo(channel);
  if (q.empty()) throw SimulationFault("pop from empty stream channel " + std::to_string(channel));
  uint32_t w = q.front();
  q.pop_front();
  return w;
}

void StreamBank::clear() {
  for (auto& q : fifos_) q.clear();
}

const std::deque<uint32_t>& StreamBank::fifo(int channel) const {
  if (channel < 0 || channel >= kStreamChannels) throw SimulationFault("stream channel " + std::to_string(channel) + " out of range");
  return fifos_[static_cast<std::size_t>(channel)];
}

std::deque<uint32_t>& StreamBank::fifo(int channel) {
  if (channel < 0 || channel >= kStreamChannels) throw SimulationFault("stream channel " + std::to_string(channel) + " out of range");
  return fifos_[static_cast<std::size_t>(channel)];
}

bool Kernel::ready(uint8_t, const StreamBank&) const { return true; }

namespace {

class NoneKernel final : public Kernel {
 public:
  KernelKind kind() const override { return KernelKind::None; }
  KernelResult execute(uint8_t op, uint32_t, uint32_t, StreamBank&) override {
    throw SimulationFault("opcode " + std::to_string(op) + " issued to an empty slot");
  }
  void reset() override {}
};

}  // namespace

std::unique_ptr<Kernel> make_kernel(KernelKind kind) {
  switch (kind) {
    case KernelKind::None: return std::make_unique<NoneKernel>();
    case KernelKind::Fmav: return std::make_unique<FmavKernel>();
    case KernelKind::Div: return std::make_unique<DivKernel>();
    case KernelKind::Sqrt: return std::make_unique<SqrtKernel>();
    case KernelKind::Util: return std::make_unique<UtilKernel>();
    case KernelKind::CnnMac: return std::make_unique<CnnMacKernel>();
    case KernelKind::CnnSum: return std::make_unique<CnnSumKernel>();
    case KernelKind::ShaBuff: return std::make_unique<ShaBuffKernel>();
    case KernelKind::ShaComp: return std::make_unique<ShaCompKernel>();
  }
  throw std::invalid_argument("unknown kernel kind");
}

uint32_t LatencyTable::get(KernelKind kind, uint8_t op) const {
  if (auto it = overrides_.find({kind, op}); it != overrides_.end()) return it->second;
  const OpcodeInfo* info = find_opcode(kind, op);
  return info ? info->latency : 1;
}

void LatencyTable::set(KernelKind kind, uint8_t op, uint32_t cycles) {
  if (cycles < 1) throw std::invalid_argument("latency must be at least 1 cycle");
  if (!find_opcode(kind, op)) throw std::invalid_argument("no such opcode for " + std::string(kind_name(kind)));
  overrides_[{kind, op}] = cycles;
}

Fabric::Fabric(const FabricSetup& setup)
    : slot_count_(setup.slot_count), memory_(setup.memory_words, 0), latencies_(setup.latencies) {
  if (slot_count_ < 1 || slot_count_ > kSlotCount) throw std::invalid_argument("slot count must be 1..5");
  for (int i = 0; i < kSlotCount; ++i) {
    KernelKind k = i < slot_count_ ? setup.slots[static_cast<std::size_t>(i)] : KernelKind::None;
    kernels_[static_cast<std::size_t>(i)] = make_kernel(k);
    slots_[static_cast<std::size_t>(i)].kind = k;
  }
}

const SlotState& Fabric::slot(int idx) const {
  if (idx < 0 || idx >= kSlotCount) throw std::out_of_range("slot index " + std::to_string(idx));
  return slots_[static_cast<std::size_t>(idx)];
}

SlotState& Fabric::slot_mut(int idx) {
  if (idx < 0 || idx >= kSlotCount) throw std::out_of_range("slot index " + std::to_string(idx));
  return slots_[static_cast<std::size_t>(idx)];
}

void Fabric::bind_slot(int idx, KernelKind kind) {
  if (idx < 0 || idx >= slot_count_) throw std::out_of_range("slot index " + std::to_string(idx));
  kernels_[static_cast<std::size_t>(idx)] = make_kernel(kind);
  slots_[static_cast<std::size_t>(idx)] = SlotState{};
  slots_[static_cast<std::size_t>(idx)].kind = kind;
  streams_[static_cast<std::size_t>(idx)].clear();
}

uint32_t Fabric::mem_read(uint32_t addr) const {
  if (addr >= memory_.size()) {
    throw SimulationFault("memory read at " + std::to_string(addr) + " beyond " + std::to_string(memory_.size()) + " words");
  }
  return memory_[addr];
}

void Fabric::mem_write(uint32_t addr, uint32_t word) {
  if (addr >= memory_.size()) {
    throw SimulationFault("memory write at " + std::to_string(addr) + " beyond " + std::to_string(memory_.size()) + " words");
  }
  memory_[addr] = word;
}

void Fabric::clear_memory() { std::fill(memory_.begin(), memory_.end(), 0u); }

void Fabric::stream_push(int idx, int channel, std::span<const uint32_t> words) {
  streams(idx).push(channel, words);
}

StreamBank& Fabric::streams(int idx) {
  if (idx < 0 || idx >= kSlotCount) throw std::out_of_range("slot index " + std::to_string(idx));
  return streams_[static_cast<std::size_t>(idx)];
}

const StreamBank& Fabric::streams(int idx) const {
  if (idx < 0 || idx >= kSlotCount) throw std::out_of_range("slot index " + std::to_string(idx));
  return streams_[static_cast<std::size_t>(idx)];
}

bool Fabric::any_busy() const {
  for (const auto& s : slots_) {
    if (s.busy > 0) return true;
  }
  return false;
}

bool Fabric::ready(int idx, uint8_t op) const {
  return kernels_.at(static_cast<std::size_t>(idx))->ready(op, streams(idx));
}

bool Fabric::pending_write(uint32_t addr) const {
  for (const auto& s : slots_) {
    if (s.busy > 0 && s.pending_addr == addr) return true;
  }
  return false;
}

std::optional<int> Fabric::error_slot() const {
  for (int i = 0; i < kSlotCount; ++i) {
    if (slots_[static_cast<std::size_t>(i)].error) return i;
  }
  return std::nullopt;
}

void Fabric::issue(int idx, const SlotInstr& instr, uint32_t a, uint32_t b, std::optional<uint32_t> dst_addr) {
  SlotState& s = slot_mut(idx);
  if (instr.op == 0) return;
  if (!find_opcode(s.kind, instr.op)) {
    throw SimulationFault("opcode " + std::to_string(instr.op) + " undefined for " + std::string(kind_name(s.kind)) +
                          " in slot " + std::to_string(idx));
  }
  if (s.busy > 0) throw SimulationFault("issue to busy slot " + std::to_string(idx));
  if (dst_addr && *dst_addr >= memory_.size()) {
    throw SimulationFault("memory write at " + std::to_string(*dst_addr) + " beyond " + std::to_string(memory_.size()) + " words");
  }
  s.pending = kernels_[static_cast<std::size_t>(idx)]->execute(instr.op, a, b, streams(idx));
  s.pending_out = instr.dst.kind != DstKind::None;
  s.pending_addr = dst_addr;
  s.busy = latencies_.get(s.kind, instr.op);
  s.last_op = instr.op;
}

void Fabric::tick() {
  for (auto& s : slots_) {
    if (s.busy == 0) continue;
    if (--s.busy > 0) continue;
    s.ctrl = s.pending.ctrl & 3u;
    s.error = s.pending.error;
    if (s.pending_out) s.out = s.pending.out;
    if (s.pending_addr) memory_[*s.pending_addr] = s.pending.out;
    s.pending_addr.reset();
  }
}

void Fabric::reset_slots() {
  for (int i = 0; i < kSlotCount; ++i) {
    auto& s = slots_[static_cast<std::size_t>(i)];
    KernelKind k = s.kind;
    s = SlotState{};
    s.kind = k;
    kernels_[static_cast<std::size_t>(i)]->reset();
  }
}

}  // namespace refab
