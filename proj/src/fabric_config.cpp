#include "refab/fabric_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace refab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

uint64_t to_u64(std::string_view v, int line, std::string_view key) {
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("line " + std::to_string(line) + ": " + std::string(key) + " expects an unsigned integer");
  }
  return out;
}

KernelKind to_kind(std::string_view v, int line) {
  auto k = kind_from_name(v);
  if (!k) throw ConfigError("line " + std::to_string(line) + ": unknown kernel kind '" + std::string(v) + "'");
  return *k;
}

}  // namespace

FabricConfig parse_fabric_config(std::string_view text) {
  FabricConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (auto h = s.find('#'); h != std::string_view::npos) s = s.substr(0, h);
    s = trim(s);
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    std::string_view key = trim(s.substr(0, eq));
    std::string_view val = trim(s.substr(eq + 1));
    if (val.size() >= 2 && val.front() == '"' && val.back() == '"') val = val.substr(1, val.size() - 2);

    if (key == "slots") {
      auto n = to_u64(val, line, key);
      if (n < 1 || n > kSlotCount) throw ConfigError("line " + std::to_string(line) + ": slots must be 1..5");
      cfg.setup.slot_count = static_cast<int>(n);
    } else if (key.substr(0, 5) == "slot.") {
      auto idx = to_u64(key.substr(5), line, key);
      if (idx >= kSlotCount) throw ConfigError("line " + std::to_string(line) + ": slot index out of range");
      cfg.setup.slots[idx] = to_kind(val, line);
    } else if (key == "memory_words") {
      auto n = to_u64(val, line, key);
      if (n == 0 || n > (uint64_t{1} << 28)) throw ConfigError("line " + std::to_string(line) + ": memory_words out of range");
      cfg.setup.memory_words = static_cast<uint32_t>(n);
    } else if (key == "stall_threshold") {
      auto n = to_u64(val, line, key);
      if (n < 1 || n > UINT32_MAX) throw ConfigError("line " + std::to_string(line) + ": stall_threshold must be >= 1");
      cfg.controller.stall_threshold = static_cast<uint32_t>(n);
    } else if (key == "max_cycles") {
      cfg.controller.max_cycles = to_u64(val, line, key);
    } else if (key == "trap_on_nan") {
      if (val == "true" || val == "1" || val == "on") {
        cfg.controller.trap_on_nan = true;
      } else if (val == "false" || val == "0" || val == "off") {
        cfg.controller.trap_on_nan = false;
      } else {
        throw ConfigError("line " + std::to_string(line) + ": trap_on_nan expects true or false");
      }
    } else if (key.substr(0, 8) == "latency.") {
      std::string_view rest = key.substr(8);
      auto dot = rest.find('.');
      if (dot == std::string_view::npos) throw ConfigError("line " + std::to_string(line) + ": expected latency.KIND.OP");
      KernelKind kind = to_kind(rest.substr(0, dot), line);
      const OpcodeInfo* op = find_opcode(kind, rest.substr(dot + 1));
      if (!op || op->code == 0) {
        throw ConfigError("line " + std::to_string(line) + ": unknown opcode '" + std::string(rest.substr(dot + 1)) + "'");
      }
      auto n = to_u64(val, line, key);
      if (n < 1 || n > 1'000'000) throw ConfigError("line " + std::to_string(line) + ": latency must be >= 1");
      cfg.setup.latencies.set(kind, op->code, static_cast<uint32_t>(n));
    } else {
      throw ConfigError("line " + std::to_string(line) + ": unknown key '" + std::string(key) + "'");
    }
  }
  for (int i = cfg.setup.slot_count; i < kSlotCount; ++i) {
    if (cfg.setup.slots[static_cast<std::size_t>(i)] != KernelKind::None) {
      throw ConfigError("slot." + std::to_string(i) + " is beyond the configured slot count");
    }
  }
  return cfg;
}

FabricConfig read_fabric_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open fabric config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_fabric_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_fabric_config(const FabricConfig& cfg) {
  std::ostringstream os;
  os << "slots = " << cfg.setup.slot_count << '\n';
  for (int i = 0; i < cfg.setup.slot_count; ++i) {
    os << "slot." << i << " = " << kind_name(cfg.setup.slots[static_cast<std::size_t>(i)]) << '\n';
  }
  os << "memory_words = " << cfg.setup.memory_words << '\n';
  os << "stall_threshold = " << cfg.controller.stall_threshold << '\n';
  os << "max_cycles = " << cfg.controller.max_cycles << '\n';
  os << "trap_on_nan = " << (cfg.controller.trap_on_nan ? "true" : "false") << '\n';
  for (uint8_t k = 1; k < kKernelKindCount; ++k) {
    auto kind = static_cast<KernelKind>(k);
    for (const auto& info : opcode_table(kind)) {
      if (info.code == 0) continue;
      uint32_t l = cfg.setup.latencies.get(kind, info.code);
      if (l != info.latency) os << "latency." << kind_name(kind) << '.' << info.mnemonic << " = " << l << '\n';
    }
  }
  return os.str();
}

}  // namespace refab
