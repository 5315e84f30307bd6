#pragma once

// Test-side reference models. Nothing here calls into the library's encoders,
// comparators or kernels; they are rebuilt from the format and math definitions.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "refab/isa.hpp"

namespace oracle {

// ---- VLIW bit packing, straight from the field table --------------------

inline void put(std::array<uint8_t, 24>& w, unsigned off, unsigned width, uint64_t v) {
  for (unsigned i = 0; i < width; ++i) {
    if ((v >> i) & 1u) w[(off + i) / 8] |= static_cast<uint8_t>(1u << ((off + i) % 8));
  }
}

inline std::array<uint8_t, 24> pack(const refab::Vliw& v) {
  std::array<uint8_t, 24> w{};
  for (unsigned i = 0; i < 5; ++i) {
    const auto& s = v.slots[i];
    unsigned b = 28 * i;
    put(w, b, 6, s.op);
    put(w, b + 6, 2, static_cast<uint8_t>(s.src_a.kind));
    put(w, b + 8, 4, s.src_a.index);
    put(w, b + 12, 2, static_cast<uint8_t>(s.src_b.kind));
    put(w, b + 14, 4, s.src_b.index);
    put(w, b + 18, 2, static_cast<uint8_t>(s.dst.kind));
    put(w, b + 20, 3, s.dst.index);
    put(w, b + 23, 4, s.imm_nibble);
  }
  put(w, 140, 4, static_cast<uint8_t>(v.flow.opcode));
  put(w, 144, 2, v.flow.param_set);
  put(w, 146, 12, v.flow.operand);
  put(w, 158, 5, v.flow.acc_mask);
  put(w, 163, 3, v.flow.trap_value);
  put(w, 166, 3, static_cast<uint8_t>(v.aux.opcode));
  put(w, 169, 3, v.aux.target);
  put(w, 172, 12, v.aux.operand);
  return w;
}

// Random VLIW honouring every range and "unused field is zero" rule.
inline refab::Vliw random_vliw(std::mt19937_64& rng) {
  using namespace refab;
  auto pick = [&](uint64_t n) { return static_cast<uint32_t>(rng() % n); };
  Vliw v;
  for (auto& s : v.slots) {
    if (pick(4) == 0) continue;  // NOP
    s.op = static_cast<uint8_t>(1 + pick(63));
    bool imm = false;
    for (SrcSel* src : {&s.src_a, &s.src_b}) {
      switch (pick(4)) {
        case 0: break;
        case 1: *src = {SrcKind::MemAgu, static_cast<uint8_t>(pick(8))}; break;
        case 2: *src = {SrcKind::SlotOut, static_cast<uint8_t>(pick(5))}; break;
        default: *src = {SrcKind::Imm, static_cast<uint8_t>(pick(16))}; imm = true;
      }
    }
    if (imm) s.imm_nibble = static_cast<uint8_t>(pick(16));
    switch (pick(3)) {
      case 0: break;
      case 1: s.dst = {DstKind::OutOnly, 0}; break;
      default: s.dst = {DstKind::MemAgu, static_cast<uint8_t>(pick(8))};
    }
  }
  static constexpr uint8_t kFlow[] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 11, 12, 13, 14, 15};
  const uint8_t fo = kFlow[pick(15)];
  v.flow.opcode = static_cast<FlowOpcode>(fo);
  const bool acc = (fo >= 6 && fo <= 9) || fo >= 12;
  if (fo >= 1 && fo <= 9) v.flow.param_set = static_cast<uint8_t>(pick(4));
  if (fo >= 2 && fo != 11) v.flow.operand = static_cast<uint16_t>(pick(4096));
  if (acc) v.flow.acc_mask = static_cast<uint8_t>(1 + pick(31));
  if (fo >= 11) v.flow.trap_value = static_cast<uint8_t>(pick(8));

  const uint8_t ao = static_cast<uint8_t>(pick(7));
  v.aux.opcode = static_cast<AuxOpcode>(ao);
  if (ao >= 1 && ao <= 4) v.aux.target = static_cast<uint8_t>(pick(4));
  if (ao >= 5) v.aux.target = static_cast<uint8_t>(pick(8));
  if (ao == 1 || ao == 2 || ao >= 5) v.aux.operand = static_cast<uint16_t>(pick(4096));
  return v;
}

// ---- comparators --------------------------------------------------------

// Comparator by mnemonic suffix; plain integer relations.
inline bool holds(const std::string& cmp, uint32_t lhs, uint32_t rhs) {
  if (cmp == "EQ") return lhs == rhs;
  if (cmp == "NEQ") return lhs != rhs;
  if (cmp == "LT") return lhs < rhs;
  if (cmp == "GT") return lhs > rhs;
  throw std::invalid_argument(cmp);
}

// ---- binary32 ----------------------------------------------------------

inline uint32_t bits(float f) { return std::bit_cast<uint32_t>(f); }
inline float flt(uint32_t b) { return std::bit_cast<float>(b); }

// Double carries more than 2*24+2 bits, so rounding its sqrt to float is
// correctly rounded.
inline float sqrt_rn(float x) { return static_cast<float>(std::sqrt(static_cast<double>(x))); }

// acc + (a-b)^2 with a rounding after every operation.
inline float subsq_step(float acc, float a, float b) {
  volatile float d = a - b;
  volatile float p = d * d;
  volatile float r = acc + p;
  return r;
}

// ---- frozen vectors ----------------------------------------------------

inline std::vector<uint8_t> unhex(const std::string& s) {
  std::vector<uint8_t> out;
  for (std::size_t i = 0; i + 1 < s.size(); i += 2) out.push_back(static_cast<uint8_t>(std::stoul(s.substr(i, 2), nullptr, 16)));
  return out;
}

// "key hexdigest" lines.
inline std::map<std::string, std::string> read_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing vector file " + path);
  std::map<std::string, std::string> out;
  std::string k, v;
  while (in >> k >> v) out[k] = v;
  return out;
}

inline std::vector<uint8_t> counting_message(std::size_t n) {
  std::vector<uint8_t> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = static_cast<uint8_t>(i & 0xFF);
  return m;
}

}  // namespace oracle
