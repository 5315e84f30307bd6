#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "refab/fabric.hpp"
#include "refab/isa.hpp"

namespace refab {

struct ControllerConfig {
  uint32_t stall_threshold = 512;
  uint64_t max_cycles = 100'000'000;
  bool trap_on_nan = true;
};

struct ParamSet {
  uint16_t destination = 0;
  uint16_t counter = 0;  // wraps at 4096
};

enum class TrapKind { InvalidJumpTarget, AcceleratorError, StallTimeout, User };

struct Trap {
  TrapKind kind = TrapKind::User;
  uint8_t slot = 0;   // AcceleratorError
  uint8_t value = 0;  // User
  uint16_t target = 0;  // InvalidJumpTarget
  uint64_t cycle = 0;
  uint16_t pc = 0;

  std::string describe() const;
  friend bool operator==(const Trap&, const Trap&) = default;
};

std::string_view trap_kind_name(TrapKind kind);

enum class FlowDecisionKind { Fallthrough, Jump, Trap };

struct FlowDecision {
  FlowDecisionKind kind = FlowDecisionKind::Fallthrough;
  uint16_t destination = 0;
  uint8_t trap_value = 0;
  friend bool operator==(const FlowDecision&, const FlowDecision&) = default;
};

// signals are the latched 2-bit ctrl values of all five slots.
FlowDecision eval_flow(const FlowOp& f, const std::array<ParamSet, kParamSetCount>& sets,
                       const std::array<uint8_t, kSlotCount>& signals);

enum class StepKind { Retired, Stalled, Trapped, Halted };
std::string_view step_kind_name(StepKind kind);

struct StepEvent {
  StepKind kind = StepKind::Retired;
  uint16_t next_pc = 0;
  std::optional<Trap> trap;
  FlowDecision decision;
};

class SetupError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class UsageError : public std::logic_error {
  using std::logic_error::logic_error;
};
class ResourceLimit : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MachineState {
  uint16_t pc = 0;
  std::array<ParamSet, kParamSetCount> param_sets{};
  std::array<uint32_t, kAguCount> agu{};
  uint64_t cycle = 0;
  uint32_t stall_count = 0;
  bool halted = false;
  std::optional<Trap> trap;
  uint64_t retired = 0;
  uint64_t stalled = 0;
};

struct TraceRecord {
  uint64_t cycle = 0;  // cycle at which the step began
  uint16_t pc = 0;
  StepKind event = StepKind::Retired;
  FlowDecision decision;
  std::array<uint16_t, kParamSetCount> counters{};
  uint32_t stall_count = 0;
  std::array<uint8_t, kSlotCount> slot_op{};
  std::array<uint8_t, kSlotCount> slot_ctrl{};
  std::optional<Trap> trap;
};

using TraceSink = std::function<void(const TraceRecord&)>;

struct RunOutcome {
  bool halted = false;
  std::optional<Trap> trap;
  uint64_t cycles = 0;
  uint64_t retired_vliws = 0;
  uint64_t stalled_cycles = 0;
};

class Machine {
 public:
  // Performs reset: checks the image and bindings, loads memory, clears state.
  Machine(const ProgramImage& image, const ControllerConfig& cfg, Fabric& fabric);

  StepEvent step();
  // Steps until HALTED or TRAPPED; throws ResourceLimit past max_cycles.
  RunOutcome run(const TraceSink& trace = {});
  void set_trace(TraceSink sink) { sink_ = std::move(sink); }

  const MachineState& state() const { return st_; }
  const ControllerConfig& config() const { return cfg_; }
  Fabric& fabric() { return fabric_; }
  const Fabric& fabric() const { return fabric_; }
  uint32_t vliw_count() const { return static_cast<uint32_t>(program_.size()); }

 private:
  bool must_stall(const Vliw& v) const;
  StepEvent finish(TraceRecord& rec, StepEvent ev);
  StepEvent raise(TraceRecord& rec, Trap t);
  uint32_t read_operand(SrcSel sel, uint8_t nibble);

  ControllerConfig cfg_;
  Fabric& fabric_;
  std::vector<Vliw> program_;
  MachineState st_;
  TraceSink sink_;
};

}  // namespace refab
