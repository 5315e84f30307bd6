#pragma once

#include <cstdint>
#include <initializer_list>

#include "refab/fabric.hpp"

namespace refab {

struct FpResult {
  float out = 0.0f;
  uint8_t ctrl = 0;
  bool error = false;
};

struct FmavState {
  float acc = 0.0f;
  float saved_a = 0.0f;
  float saved_b = 0.0f;
};

// Error line: NaN result, or an infinity produced from finite inputs.
bool fp_error(float out, std::initializer_list<float> inputs);
// bit1 = error, bit0 = result is a signed zero.
uint8_t fp_ctrl(float out, bool error);

FpResult fmav_exec(uint8_t op, float a, float b, FmavState& st);
FpResult div_exec(float a, float b);
FpResult sqrt_exec(float a);

// 00 equal, 01 a < b, 10 a > b, 11 unordered.
uint8_t util_classify(float a, float b);
FpResult util_exec(uint8_t op, float a, float b);

class FmavKernel final : public Kernel {
 public:
  KernelKind kind() const override { return KernelKind::Fmav; }
  KernelResult execute(uint8_t op, uint32_t a, uint32_t b, StreamBank&) override;
  void reset() override { state_ = {}; }
  const FmavState& state() const { return state_; }

 private:
  FmavState state_;
};

class DivKernel final : public Kernel {
 public:
  KernelKind kind() const override { return KernelKind::Div; }
  KernelResult execute(uint8_t op, uint32_t a, uint32_t b, StreamBank&) override;
  void reset() override {}
};

class SqrtKernel final : public Kernel {
 public:
  KernelKind kind() const override { return KernelKind::Sqrt; }
  KernelResult execute(uint8_t op, uint32_t a, uint32_t b, StreamBank&) override;
  void reset() override {}
};

class UtilKernel final : public Kernel {
 public:
  KernelKind kind() const override { return KernelKind::Util; }
  KernelResult execute(uint8_t op, uint32_t a, uint32_t b, StreamBank&) override;
  void reset() override {}
};

}  // namespace refab
