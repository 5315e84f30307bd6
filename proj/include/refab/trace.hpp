#pragma once

#include <string>

#include "refab/controller.hpp"

namespace refab {

enum class TraceFormat { Json, Csv };

// One JSON object per line.
std::string trace_json_line(const TraceRecord& r);
std::string trace_csv_header();
std::string trace_csv_line(const TraceRecord& r);

std::string_view decision_name(FlowDecisionKind kind);

}  // namespace refab
