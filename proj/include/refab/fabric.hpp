#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "refab/isa.hpp"
#include "refab/kernel_kind.hpp"

namespace refab {

// Host-model misuse (bad address, undefined opcode, buffer overrun). Not an
// architectural trap.
class SimulationFault : public std::runtime_error {
 public:
  explicit SimulationFault(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr int kStreamChannels = 4;

class StreamBank {
 public:
  void push(int channel, std::span<const uint32_t> words);
  bool empty(int channel) const { return fifo(channel).empty(); }
  std::size_t size(int channel) const { return fifo(channel).size(); }
  uint32_t front(int channel) const { return fifo(channel).front(); }
  uint32_t pop(int channel);
  void clear();

 private:
  const std::deque<uint32_t>& fifo(int channel) const;
  std::deque<uint32_t>& fifo(int channel);
  std::array<std::deque<uint32_t>, kStreamChannels> fifos_;
};

struct KernelResult {
  uint32_t out = 0;
  uint8_t ctrl = 0;  // 2-bit
  bool error = false;
};

// Uniform slot contract. The result is computed at issue and published by the
// fabric when the op's latency elapses.
class Kernel {
 public:
  virtual ~Kernel() = default;
  virtual KernelKind kind() const = 0;
  // false means the op cannot start this cycle (e.g. its input stream is dry).
  virtual bool ready(uint8_t op, const StreamBank& streams) const;
  virtual KernelResult execute(uint8_t op, uint32_t a, uint32_t b, StreamBank& streams) = 0;
  virtual void reset() = 0;
};

std::unique_ptr<Kernel> make_kernel(KernelKind kind);

class LatencyTable {
 public:
  uint32_t get(KernelKind kind, uint8_t op) const;
  void set(KernelKind kind, uint8_t op, uint32_t cycles);  // cycles >= 1

 private:
  std::map<std::pair<KernelKind, uint8_t>, uint32_t> overrides_;
};

struct FabricSetup {
  int slot_count = kSlotCount;
  std::array<KernelKind, kSlotCount> slots{};
  uint32_t memory_words = 65536;
  LatencyTable latencies;
};

struct SlotState {
  KernelKind kind = KernelKind::None;
  uint32_t out = 0;
  uint8_t ctrl = 0;
  bool error = false;
  uint32_t busy = 0;  // cycles until the in-flight result is published
  uint8_t last_op = 0;

  KernelResult pending;
  bool pending_out = false;
  std::optional<uint32_t> pending_addr;
};

class Fabric {
 public:
  explicit Fabric(const FabricSetup& setup = {});

  int slot_count() const { return slot_count_; }
  void bind_slot(int idx, KernelKind kind);
  KernelKind slot_kind(int idx) const { return slot(idx).kind; }
  const SlotState& slot(int idx) const;
  const Kernel* kernel(int idx) const { return kernels_.at(static_cast<std::size_t>(idx)).get(); }

  uint32_t memory_words() const { return static_cast<uint32_t>(memory_.size()); }
  uint32_t mem_read(uint32_t addr) const;
  void mem_write(uint32_t addr, uint32_t word);
  std::span<const uint32_t> memory() const { return memory_; }
  void clear_memory();

  void stream_push(int idx, int channel, std::span<const uint32_t> words);
  StreamBank& streams(int idx);
  const StreamBank& streams(int idx) const;

  LatencyTable& latencies() { return latencies_; }
  const LatencyTable& latencies() const { return latencies_; }

  bool busy(int idx) const { return slot(idx).busy > 0; }
  bool any_busy() const;
  bool ready(int idx, uint8_t op) const;
  bool pending_write(uint32_t addr) const;
  // First slot whose error line is up, if any.
  std::optional<int> error_slot() const;

  void issue(int idx, const SlotInstr& instr, uint32_t a, uint32_t b, std::optional<uint32_t> dst_addr);
  void tick();
  // Clears pipelines and output registers and resets kernel-private state.
  // Streams are left alone so a host may preload them.
  void reset_slots();

 private:
  SlotState& slot_mut(int idx);

  int slot_count_;
  std::array<SlotState, kSlotCount> slots_{};
  std::array<std::unique_ptr<Kernel>, kSlotCount> kernels_{};
  std::array<StreamBank, kSlotCount> streams_{};
  std::vector<uint32_t> memory_;
  LatencyTable latencies_;
};

}  // namespace refab
