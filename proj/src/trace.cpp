#include "refab/trace.hpp"

#include <sstream>

#include "json.hpp"

namespace refab {

std::string_view decision_name(FlowDecisionKind kind) {
  switch (kind) {
    case FlowDecisionKind::Fallthrough: return "FALLTHROUGH";
    case FlowDecisionKind::Jump: return "JUMP";
    case FlowDecisionKind::Trap: return "TRAP";
  }
  return "?";
}

namespace {

std::string decision_text(const FlowDecision& d) {
  std::string s(decision_name(d.kind));
  if (d.kind == FlowDecisionKind::Jump) s += "(" + std::to_string(d.destination) + ")";
  if (d.kind == FlowDecisionKind::Trap) s += "(" + std::to_string(d.trap_value) + ")";
  return s;
}

}  // namespace

std::string trace_json_line(const TraceRecord& r) {
  nlohmann::ordered_json j;
  j["cycle"] = r.cycle;
  j["pc"] = r.pc;
  j["event"] = step_kind_name(r.event);
  j["flow"] = decision_text(r.decision);
  j["counters"] = r.counters;
  j["stall_count"] = r.stall_count;
  auto slots = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    slots.push_back({{"op", r.slot_op[i]}, {"ctrl", r.slot_ctrl[i]}});
  }
  j["slots"] = std::move(slots);
  if (r.trap) j["trap"] = r.trap->describe();
  return j.dump();
}

std::string trace_csv_header() {
  std::string h = "cycle,pc,event,flow,cnt0,cnt1,cnt2,cnt3,stall_count";
  for (int i = 0; i < kSlotCount; ++i) h += ",op" + std::to_string(i) + ",ctrl" + std::to_string(i);
  return h + ",trap";
}

std::string trace_csv_line(const TraceRecord& r) {
  std::ostringstream os;
  os << r.cycle << ',' << r.pc << ',' << step_kind_name(r.event) << ',' << decision_text(r.decision);
  for (auto c : r.counters) os << ',' << c;
  os << ',' << r.stall_count;
  for (std::size_t i = 0; i < kSlotCount; ++i) os << ',' << int(r.slot_op[i]) << ',' << int(r.slot_ctrl[i]);
  os << ',';
  if (r.trap) os << '"' << r.trap->describe() << '"';
  return os.str();
}

}  // namespace refab
