#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "refab/bench/reference.hpp"
#include "refab/fabric_config.hpp"
#include "refab/isa.hpp"

namespace refab::bench {

class GenerationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StreamPayload {
  int slot = 0;
  int channel = 0;
  std::vector<uint32_t> words;
};

struct GeneratedProgram {
  std::string source;
  ProgramImage image;
  std::map<std::string, uint16_t> labels;
  std::vector<StreamPayload> streams;

  uint16_t label(const std::string& name) const;
};

// Assembles generator output; any diagnostic error becomes a GenerationError.
GeneratedProgram build_program(std::string source, std::vector<StreamPayload> streams = {});

// ---- SIFT: slots 0-3 FMAV ----
inline constexpr uint32_t kSiftResultAddr = 8;
inline constexpr uint32_t kSiftDataBase = 16;
GeneratedProgram gen_sift(const SiftProblem& p);
FabricConfig sift_fabric();

// ---- SWE: FMAV, FMAV, DIV, SQRT, UTIL ----
// Inputs h_l, h_r, hu_l, hu_r, b_l, b_r at words 0..5; outputs h_upd_l,
// h_upd_r, hu_upd_l, hu_upd_r, max_speed at words 8..12.
inline constexpr uint32_t kSweInputBase = 0;
inline constexpr uint32_t kSweOutputBase = 8;
GeneratedProgram gen_swe(const RiemannProblem& p);
FabricConfig swe_fabric();

// Label pairs delimiting each solver body, [begin, end).
struct PcRange {
  uint16_t begin = 0, end = 0;
  bool contains(uint16_t pc) const { return pc >= begin && pc < end; }
};
struct SweBodies {
  PcRange fwave, hlle_right_dry, hlle_left_dry;
};
SweBodies swe_bodies(const GeneratedProgram& g);

// ---- CNN: two MAC + two SUM slots, or one MAC + one SUM ----
enum class CnnVariant { TwoMac, OneMac };
GeneratedProgram gen_cnn(const ConvLayerProblem& p, CnnVariant variant = CnnVariant::TwoMac);
uint32_t cnn_output_base(const ConvLayerProblem& p);
FabricConfig cnn_fabric(CnnVariant variant = CnnVariant::TwoMac);
// The VLIW that issues the channel MAC of the first window of each output column.
inline constexpr const char* kCnnInnerLabel = "loop_a";

// ---- SHA3-256: BUFF, COMP, BUFF, COMP ----
inline constexpr uint32_t kShaDigestA = 0;
inline constexpr uint32_t kShaDigestB = 8;
GeneratedProgram gen_sha3(std::span<const uint8_t> msg);
// Two independent messages hashed concurrently on the two BUFF/COMP pairs.
GeneratedProgram gen_sha3_dual(std::span<const uint8_t> a, std::span<const uint8_t> b);
FabricConfig sha3_fabric();

}  // namespace refab::bench
