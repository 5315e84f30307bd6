#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "refab/fabric.hpp"

namespace refab {

inline constexpr uint32_t kMaxRowPixels = 2048;

// Three streaming row buffers. With C interleaved channels a row holds W*C
// pixels and column x of channel ch sits at x*C + ch.
class LineBufferBank {
 public:
  explicit LineBufferBank(uint32_t row_len = 0) { configure(row_len); }
  void configure(uint32_t row_len);
  uint32_t row_len() const { return row_len_; }
  void push(int row, int8_t px);
  std::size_t filled(int row) const { return rows_.at(static_cast<std::size_t>(row)).size(); }
  bool window_ready(uint32_t x, uint32_t channels = 1) const;
  int8_t at(int row, std::size_t idx) const { return rows_.at(static_cast<std::size_t>(row)).at(idx); }
  void clear();

 private:
  uint32_t row_len_ = 0;
  std::array<std::vector<int8_t>, 3> rows_;
};

// acc + sum over the 3x3 window of channel ch at column x. weights is the
// row-major 3x3 kernel for that channel.
int32_t mac_window(int32_t acc, std::span<const int8_t, 9> weights, const LineBufferBank& bank, uint32_t x,
                   uint32_t ch = 0, uint32_t channels = 1);

struct QuantParams {
  float scale = 1.0f;
  int8_t zero_point = 0;
};

int8_t quantize(int32_t value, const QuantParams& q);
// ReLU, 2x2 max pool, quantize.
int8_t sum_step(const std::array<int32_t, 4>& pool_window, const QuantParams& q);

class CnnMacKernel final : public Kernel {
 public:
  KernelKind kind() const override { return KernelKind::CnnMac; }
  bool ready(uint8_t op, const StreamBank& streams) const override;
  KernelResult execute(uint8_t op, uint32_t a, uint32_t b, StreamBank& streams) override;
  void reset() override;

  uint32_t windows_done() const { return windows_; }

 private:
  uint32_t need(uint8_t op) const;
  void pull(StreamBank& streams, uint32_t upto);

  uint32_t width_ = 0, channels_ = 0;
  std::vector<int8_t> weights_;
  LineBufferBank bank_;
  uint32_t x_ = 0, ch_ = 0;
  uint32_t acc_ = 0;
  uint32_t windows_ = 0;
};

class CnnSumKernel final : public Kernel {
 public:
  KernelKind kind() const override { return KernelKind::CnnSum; }
  KernelResult execute(uint8_t op, uint32_t a, uint32_t b, StreamBank& streams) override;
  void reset() override;

 private:
  QuantParams q_;
  int32_t partial_ = 0;
};

// "RFNN" | H | W | C (u32 LE) followed by C*H*W signed bytes, channel planes
// in row-major order.
struct RfnnTensor {
  uint32_t h = 0, w = 0, c = 0;
  std::vector<int8_t> data;
  int8_t at(uint32_t ch, uint32_t y, uint32_t x) const { return data[(std::size_t{ch} * h + y) * w + x]; }
};

RfnnTensor parse_rfnn(std::span<const uint8_t> bytes);
std::vector<uint8_t> serialize_rfnn(const RfnnTensor& t);
RfnnTensor read_rfnn_file(const std::filesystem::path& path);
void write_rfnn_file(const std::filesystem::path& path, const RfnnTensor& t);

}  // namespace refab
