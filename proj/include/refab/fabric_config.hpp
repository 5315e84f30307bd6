#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "refab/controller.hpp"
#include "refab/fabric.hpp"

namespace refab {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FabricConfig {
  FabricSetup setup;
  ControllerConfig controller;
};

// key = value lines, `#` comments. Keys:
//   slots, slot.N, memory_words, stall_threshold, max_cycles, trap_on_nan,
//   latency.KIND.MNEMONIC
FabricConfig parse_fabric_config(std::string_view text);
FabricConfig read_fabric_config(const std::filesystem::path& path);
std::string format_fabric_config(const FabricConfig& cfg);

}  // namespace refab
