#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "refab/isa.hpp"

namespace refab {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  int line = 0;  // 1-based
  std::string message;
};

struct AssemblyResult {
  std::optional<ProgramImage> image;  // absent whenever an error was reported
  std::vector<Diagnostic> diagnostics;
  std::map<std::string, uint16_t> labels;
  std::vector<int> vliw_lines;  // source line of each statement

  bool ok() const { return image.has_value(); }
  std::optional<uint16_t> label(const std::string& name) const;
};

AssemblyResult assemble(std::string_view source);

// `file:line: severity: message`
std::string format_diagnostic(const Diagnostic& d, std::string_view file);

class DisassemblyError : public std::runtime_error {
 public:
  DisassemblyError(int vliw_index, const std::string& what)
      : std::runtime_error(vliw_index < 0 ? what : "vliw " + std::to_string(vliw_index) + ": " + what),
        vliw_index_(vliw_index) {}
  int vliw_index() const { return vliw_index_; }  // -1 for image-level problems

 private:
  int vliw_index_;
};

// Canonical text; assemble(disassemble(p)) reproduces p bit for bit.
std::string disassemble(const ProgramImage& image);

}  // namespace refab
