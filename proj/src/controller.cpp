#include "refab/controller.hpp"

#include <sstream>

namespace refab {

std::string_view trap_kind_name(TrapKind kind) {
  switch (kind) {
    case TrapKind::InvalidJumpTarget: return "INVALID_JUMP_TARGET";
    case TrapKind::AcceleratorError: return "ACCELERATOR_ERROR";
    case TrapKind::StallTimeout: return "STALL_TIMEOUT";
    case TrapKind::User: return "USER";
  }
  return "?";
}

std::string Trap::describe() const {
  std::ostringstream os;
  os << trap_kind_name(kind);
  if (kind == TrapKind::AcceleratorError) os << "(slot " << int(slot) << ')';
  if (kind == TrapKind::User) os << '(' << int(value) << ')';
  if (kind == TrapKind::InvalidJumpTarget) os << '(' << target << ')';
  os << " at cycle " << cycle << ", pc " << pc;
  return os.str();
}

std::string_view step_kind_name(StepKind kind) {
  switch (kind) {
    case StepKind::Retired: return "RETIRED";
    case StepKind::Stalled: return "STALLED";
    case StepKind::Trapped: return "TRAPPED";
    case StepKind::Halted: return "HALTED";
  }
  return "?";
}

FlowDecision eval_flow(const FlowOp& f, const std::array<ParamSet, kParamSetCount>& sets,
                       const std::array<uint8_t, kSlotCount>& signals) {
  const ParamSet& ps = sets[f.param_set & 3u];
  const Compare cmp = comparison_of(f.opcode);
  auto acc_holds = [&] {
    if (f.acc_mask == 0) return false;
    for (int i = 0; i < kSlotCount; ++i) {
      if ((f.acc_mask >> i) & 1u) {
        if (!compare_holds(cmp, signals[static_cast<std::size_t>(i)] & 3u, f.operand % 4u)) return false;
      }
    }
    return true;
  };
  const FlowDecision jump{FlowDecisionKind::Jump, ps.destination, 0};
  const FlowDecision trap{FlowDecisionKind::Trap, 0, f.trap_value};
  if (f.opcode == FlowOpcode::AlwJmp) return jump;
  if (is_cnt_conditioned(f.opcode)) return compare_holds(cmp, ps.counter, f.operand) ? jump : FlowDecision{};
  if (f.opcode == FlowOpcode::TrapAlw) return trap;
  if (is_acc_conditioned(f.opcode)) {
    if (!acc_holds()) return {};
    return is_trap(f.opcode) ? trap : jump;
  }
  return {};
}

Machine::Machine(const ProgramImage& image, const ControllerConfig& cfg, Fabric& fabric)
    : cfg_(cfg), fabric_(fabric) {
  if (cfg_.stall_threshold < 1) throw SetupError("stall threshold must be at least 1");
  auto diags = validate_program(image, false);
  if (!diags.empty()) throw SetupError("invalid program: " + diags.front());
  for (int i = 0; i < kSlotCount; ++i) {
    const KernelKind want = image.slot_bindings[static_cast<std::size_t>(i)];
    if (fabric_.slot_kind(i) != want) {
      throw SetupError("slot " + std::to_string(i) + " holds " + std::string(kind_name(fabric_.slot_kind(i))) +
                       " but the image expects " + std::string(kind_name(want)));
    }
  }
  if (image.memory.size() > fabric_.memory_words()) {
    throw SetupError("image memory segment of " + std::to_string(image.memory.size()) +
                     " words does not fit fabric memory of " + std::to_string(fabric_.memory_words()));
  }
  fabric_.clear_memory();
  for (std::size_t i = 0; i < image.memory.size(); ++i) fabric_.mem_write(static_cast<uint32_t>(i), image.memory[i]);
  fabric_.reset_slots();
  program_.reserve(image.words.size());
  for (const auto& w : image.words) program_.push_back(decode_vliw(w));
  st_.pc = image.entry_pc;
}

bool Machine::must_stall(const Vliw& v) const {
  std::array<uint32_t, kAguCount> agu = st_.agu;
  for (int i = 0; i < kSlotCount; ++i) {
    const SlotInstr& s = v.slots[static_cast<std::size_t>(i)];
    if (s.op == 0) continue;
    if (fabric_.busy(i) || !fabric_.ready(i, s.op)) return true;
    for (const SrcSel& src : {s.src_a, s.src_b}) {
      if (src.kind == SrcKind::SlotOut && fabric_.busy(src.index)) return true;
      if (src.kind == SrcKind::MemAgu && fabric_.pending_write(agu[src.index]++)) return true;
    }
    if (s.dst.kind == DstKind::MemAgu && fabric_.pending_write(agu[s.dst.index]++)) return true;
  }
  if (is_acc_conditioned(v.flow.opcode)) {
    for (int i = 0; i < kSlotCount; ++i) {
      if (((v.flow.acc_mask >> i) & 1u) && fabric_.busy(i)) return true;
    }
  }
  return false;
}

uint32_t Machine::read_operand(SrcSel sel, uint8_t nibble) {
  switch (sel.kind) {
    case SrcKind::None: return 0;
    case SrcKind::MemAgu: return fabric_.mem_read(st_.agu[sel.index]++);
    case SrcKind::SlotOut: return fabric_.slot(sel.index).out;
    case SrcKind::Imm: return immediate_value(sel, nibble);
  }
  return 0;
}

StepEvent Machine::finish(TraceRecord& rec, StepEvent ev) {
  if (ev.kind == StepKind::Trapped) st_.trap = ev.trap;
  if (ev.kind == StepKind::Halted) st_.halted = true;
  if (sink_) {
    rec.event = ev.kind;
    rec.decision = ev.decision;
    rec.trap = ev.trap;
    rec.stall_count = st_.stall_count;
    for (int i = 0; i < kParamSetCount; ++i) rec.counters[static_cast<std::size_t>(i)] = st_.param_sets[static_cast<std::size_t>(i)].counter;
    for (int i = 0; i < kSlotCount; ++i) rec.slot_ctrl[static_cast<std::size_t>(i)] = fabric_.slot(i).ctrl;
    sink_(rec);
  }
  return ev;
}

StepEvent Machine::raise(TraceRecord& rec, Trap t) {
  t.cycle = st_.cycle;
  t.pc = st_.pc;
  StepEvent ev;
  ev.kind = StepKind::Trapped;
  ev.next_pc = st_.pc;
  ev.trap = t;
  ev.decision = rec.decision;
  return finish(rec, ev);
}

StepEvent Machine::step() {
  if (st_.halted) throw UsageError("step on a halted machine");
  if (st_.trap) throw UsageError("step on a trapped machine");

  TraceRecord rec;
  rec.cycle = st_.cycle;
  rec.pc = st_.pc;
  const auto count = static_cast<uint32_t>(program_.size());

  try {
    // Fell through past the last VLIW: drain in-flight results, then halt.
    if (st_.pc >= count) {
      if (!fabric_.any_busy()) return finish(rec, {StepKind::Halted, st_.pc, std::nullopt, {}});
      fabric_.tick();
      ++st_.cycle;
      ++st_.stalled;
      if (auto e = fabric_.error_slot(); e && cfg_.trap_on_nan) {
        return raise(rec, {TrapKind::AcceleratorError, static_cast<uint8_t>(*e)});
      }
      return finish(rec, {StepKind::Stalled, st_.pc, std::nullopt, {}});
    }

    const Vliw& v = program_[st_.pc];
    for (int i = 0; i < kSlotCount; ++i) rec.slot_op[static_cast<std::size_t>(i)] = v.slots[static_cast<std::size_t>(i)].op;

    if (must_stall(v)) {
      fabric_.tick();
      ++st_.cycle;
      ++st_.stall_count;
      ++st_.stalled;
      if (auto e = fabric_.error_slot(); e && cfg_.trap_on_nan) {
        return raise(rec, {TrapKind::AcceleratorError, static_cast<uint8_t>(*e)});
      }
      if (st_.stall_count >= cfg_.stall_threshold) return raise(rec, {TrapKind::StallTimeout});
      return finish(rec, {StepKind::Stalled, st_.pc, std::nullopt, {}});
    }

    struct Issue {
      uint32_t a = 0, b = 0;
      std::optional<uint32_t> dst;
    };
    std::array<Issue, kSlotCount> issues{};
    for (std::size_t i = 0; i < kSlotCount; ++i) {
      const SlotInstr& s = v.slots[i];
      if (s.op == 0) continue;
      issues[i].a = read_operand(s.src_a, s.imm_nibble);
      issues[i].b = read_operand(s.src_b, s.imm_nibble);
      if (s.dst.kind == DstKind::MemAgu) issues[i].dst = st_.agu[s.dst.index]++;
    }
    for (std::size_t i = 0; i < kSlotCount; ++i) {
      fabric_.issue(static_cast<int>(i), v.slots[i], issues[i].a, issues[i].b, issues[i].dst);
    }

    const AuxOp& a = v.aux;
    auto& sets = st_.param_sets;
    switch (a.opcode) {
      case AuxOpcode::Nop: break;
      case AuxOpcode::PsSetDest: sets[a.target].destination = a.operand; break;
      case AuxOpcode::PsCntSet: sets[a.target].counter = a.operand & kMax12; break;
      case AuxOpcode::PsCntInc: sets[a.target].counter = (sets[a.target].counter + 1) & kMax12; break;
      case AuxOpcode::PsCntReset: sets[a.target].counter = 0; break;
      case AuxOpcode::AguSet: st_.agu[a.target] = a.operand; break;
      case AuxOpcode::AguAdd: st_.agu[a.target] += a.operand; break;
    }

    std::array<uint8_t, kSlotCount> signals{};
    for (int i = 0; i < kSlotCount; ++i) signals[static_cast<std::size_t>(i)] = fabric_.slot(i).ctrl;
    const FlowDecision d = eval_flow(v.flow, sets, signals);

    fabric_.tick();
    ++st_.cycle;
    st_.stall_count = 0;
    ++st_.retired;

    rec.decision = d;
    if (auto e = fabric_.error_slot(); e && cfg_.trap_on_nan) {
      return raise(rec, {TrapKind::AcceleratorError, static_cast<uint8_t>(*e)});
    }
    if (d.kind == FlowDecisionKind::Jump && d.destination >= count) {
      Trap t{TrapKind::InvalidJumpTarget};
      t.target = d.destination;
      return raise(rec, t);
    }
    if (d.kind == FlowDecisionKind::Trap) {
      Trap t{TrapKind::User};
      t.value = d.trap_value;
      return raise(rec, t);
    }
    st_.pc = d.kind == FlowDecisionKind::Jump ? d.destination : static_cast<uint16_t>(st_.pc + 1);
    return finish(rec, {StepKind::Retired, st_.pc, std::nullopt, d});
  } catch (const SimulationFault& f) {
    throw SimulationFault("pc " + std::to_string(rec.pc) + ", cycle " + std::to_string(rec.cycle) + ": " + f.what());
  }
}

RunOutcome Machine::run(const TraceSink& trace) {
  if (trace) sink_ = trace;
  while (!st_.halted && !st_.trap) {
    if (st_.cycle >= cfg_.max_cycles) {
      throw ResourceLimit("max_cycles " + std::to_string(cfg_.max_cycles) + " exceeded at pc " + std::to_string(st_.pc));
    }
    step();
  }
  RunOutcome out;
  out.halted = st_.halted;
  out.trap = st_.trap;
  out.cycles = st_.cycle;
  out.retired_vliws = st_.retired;
  out.stalled_cycles = st_.stalled;
  return out;
}

}  // namespace refab
