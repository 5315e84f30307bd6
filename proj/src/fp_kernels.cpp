#include "refab/fp_kernels.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace refab {

bool fp_error(float out, std::initializer_list<float> inputs) {
  if (std::isnan(out)) return true;
  if (!std::isinf(out)) return false;
  for (float x : inputs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

uint8_t fp_ctrl(float out, bool error) {
  return static_cast<uint8_t>((error ? 2u : 0u) | (out == 0.0f ? 1u : 0u));
}

namespace {

FpResult finish(float out, std::initializer_list<float> inputs) {
  bool err = fp_error(out, inputs);
  return {out, fp_ctrl(out, err), err};
}

KernelResult to_bits(const FpResult& r) { return {std::bit_cast<uint32_t>(r.out), r.ctrl, r.error}; }

}  // namespace

FpResult fmav_exec(uint8_t op, float a, float b, FmavState& st) {
  st.saved_a = a;
  st.saved_b = b;
  switch (op) {
    case opc::fmav::kAdd: return finish(a + b, {a, b});
    case opc::fmav::kSub: return finish(a - b, {a, b});
    case opc::fmav::kMul: return finish(a * b, {a, b});
    case opc::fmav::kSubSqAcc: {
      const float acc0 = st.acc;
      const float d = a - b;
      const float p = d * d;
      st.acc = acc0 + p;
      return finish(st.acc, {a, b, acc0});
    }
    case opc::fmav::kMac: {
      const float acc0 = st.acc;
      const float p = a * b;
      st.acc = acc0 + p;
      return finish(st.acc, {a, b, acc0});
    }
    case opc::fmav::kClrAcc:
      st.acc = 0.0f;
      return finish(0.0f, {});
    case opc::fmav::kRdAcc: return finish(st.acc, {st.acc});
    default: throw SimulationFault("FMAV opcode " + std::to_string(op) + " undefined");
  }
}

FpResult div_exec(float a, float b) { return finish(a / b, {a, b}); }

FpResult sqrt_exec(float a) { return finish(std::sqrt(a), {a}); }

uint8_t util_classify(float a, float b) {
  if (std::isnan(a) || std::isnan(b)) return 3;
  if (a == b) return 0;
  return a < b ? 1 : 2;
}

FpResult util_exec(uint8_t op, float a, float b) {
  const float qnan = std::numeric_limits<float>::quiet_NaN();
  uint8_t c = 0;
  float out = 0.0f;
  switch (op) {
    case opc::util::kMin:
      c = util_classify(a, b);
      out = c == 3 ? qnan : (c == 2 ? b : a);
      break;
    case opc::util::kMax:
      c = util_classify(a, b);
      out = c == 3 ? qnan : (c == 1 ? b : a);
      break;
    case opc::util::kAbs:
      c = util_classify(a, 0.0f);
      out = std::fabs(a);
      break;
    case opc::util::kCmp:
      c = util_classify(a, b);
      out = c == 3 ? qnan : a;
      break;
    default: throw SimulationFault("UTIL opcode " + std::to_string(op) + " undefined");
  }
  return {out, c, c == 3};
}

KernelResult FmavKernel::execute(uint8_t op, uint32_t a, uint32_t b, StreamBank&) {
  return to_bits(fmav_exec(op, std::bit_cast<float>(a), std::bit_cast<float>(b), state_));
}

KernelResult DivKernel::execute(uint8_t op, uint32_t a, uint32_t b, StreamBank&) {
  if (op != opc::div::kDiv) throw SimulationFault("DIV opcode " + std::to_string(op) + " undefined");
  return to_bits(div_exec(std::bit_cast<float>(a), std::bit_cast<float>(b)));
}

KernelResult SqrtKernel::execute(uint8_t op, uint32_t a, uint32_t, StreamBank&) {
  if (op != opc::sqrt::kSqrt) throw SimulationFault("SQRT opcode " + std::to_string(op) + " undefined");
  return to_bits(sqrt_exec(std::bit_cast<float>(a)));
}

KernelResult UtilKernel::execute(uint8_t op, uint32_t a, uint32_t b, StreamBank&) {
  return to_bits(util_exec(op, std::bit_cast<float>(a), std::bit_cast<float>(b)));
}

}  // namespace refab
