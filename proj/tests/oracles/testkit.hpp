#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "refab/assembler.hpp"
#include "refab/controller.hpp"
#include "refab/fabric.hpp"

namespace kit {

inline refab::ProgramImage assemble_ok(const std::string& src) {
  auto r = refab::assemble(src);
  if (!r.ok()) {
    std::string msg = "assembly failed:";
    for (const auto& d : r.diagnostics) msg += "\n  " + refab::format_diagnostic(d, "<test>");
    throw std::runtime_error(msg);
  }
  return *r.image;
}

// Fabric matching the image bindings, plus a machine over it.
struct Rig {
  std::unique_ptr<refab::Fabric> fabric;
  std::unique_ptr<refab::Machine> machine;
  std::vector<refab::TraceRecord> trace;

  Rig(const refab::ProgramImage& image, refab::ControllerConfig cfg = {}) {
    refab::FabricSetup setup;
    setup.slots = image.slot_bindings;
    fabric = std::make_unique<refab::Fabric>(setup);
    machine = std::make_unique<refab::Machine>(image, cfg, *fabric);
    machine->set_trace([this](const refab::TraceRecord& r) { trace.push_back(r); });
  }
  explicit Rig(const std::string& src, refab::ControllerConfig cfg = {}) : Rig(assemble_ok(src), cfg) {}

  refab::RunOutcome run() { return machine->run(); }
  const refab::MachineState& state() const { return machine->state(); }

  std::size_t retired_at(uint16_t pc) const {
    std::size_t n = 0;
    for (const auto& r : trace) n += r.pc == pc && r.event == refab::StepKind::Retired;
    return n;
  }
};

}  // namespace kit
