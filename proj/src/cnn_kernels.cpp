#include "refab/cnn_kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace refab {

void LineBufferBank::configure(uint32_t row_len) {
  if (row_len > kMaxRowPixels) throw SimulationFault("line buffer row of " + std::to_string(row_len) + " pixels exceeds 2048");
  row_len_ = row_len;
  clear();
}

void LineBufferBank::push(int row, int8_t px) {
  auto& r = rows_.at(static_cast<std::size_t>(row));
  if (r.size() >= row_len_) throw SimulationFault("line buffer row " + std::to_string(row) + " overflow");
  r.push_back(px);
}

bool LineBufferBank::window_ready(uint32_t x, uint32_t channels) const {
  const std::size_t need = std::size_t{x + 3} * channels;
  return std::all_of(rows_.begin(), rows_.end(), [&](const auto& r) { return r.size() >= need; });
}

void LineBufferBank::clear() {
  for (auto& r : rows_) r.clear();
}

int32_t mac_window(int32_t acc, std::span<const int8_t, 9> weights, const LineBufferBank& bank, uint32_t x,
                   uint32_t ch, uint32_t channels) {
  uint32_t sum = static_cast<uint32_t>(acc);
  for (int i = 0; i < 3; ++i) {
    for (uint32_t j = 0; j < 3; ++j) {
      int32_t w = weights[static_cast<std::size_t>(i * 3) + j];
      int32_t p = bank.at(i, std::size_t{x + j} * channels + ch);
      sum += static_cast<uint32_t>(w * p);
    }
  }
  return static_cast<int32_t>(sum);
}

int8_t quantize(int32_t value, const QuantParams& q) {
  const float scaled = std::nearbyint(static_cast<float>(value) * q.scale);
  const double shifted = static_cast<double>(scaled) + q.zero_point;
  return static_cast<int8_t>(std::clamp(shifted, -128.0, 127.0));
}

int8_t sum_step(const std::array<int32_t, 4>& pool_window, const QuantParams& q) {
  int32_t m = 0;
  for (int32_t v : pool_window) m = std::max(m, v);
  return quantize(m, q);
}

uint32_t CnnMacKernel::need(uint8_t op) const {
  if (op == opc::mac::kMac) return (x_ + 3) * channels_;
  if (op == opc::mac::kNextRow) return width_ * channels_;
  return 0;
}

bool CnnMacKernel::ready(uint8_t op, const StreamBank& streams) const {
  const uint32_t n = need(op);
  if (n == 0 || n > bank_.row_len()) return true;  // faults at execute
  for (int r = 0; r < 3; ++r) {
    if (bank_.filled(r) + streams.size(r) < n) return false;
  }
  return true;
}

void CnnMacKernel::pull(StreamBank& streams, uint32_t upto) {
  for (int r = 0; r < 3; ++r) {
    while (bank_.filled(r) < upto) bank_.push(r, static_cast<int8_t>(streams.pop(r) & 0xFF));
  }
}

KernelResult CnnMacKernel::execute(uint8_t op, uint32_t a, uint32_t b, StreamBank& streams) {
  switch (op) {
    case opc::mac::kSetGeom:
      if (a < 3 || b < 1 || std::size_t{a} * b > kMaxRowPixels) {
        throw SimulationFault("CNN_MAC geometry W=" + std::to_string(a) + " C=" + std::to_string(b) + " unsupported");
      }
      width_ = a;
      channels_ = b;
      weights_.clear();
      bank_.configure(a * b);
      x_ = ch_ = 0;
      acc_ = 0;
      return {};
    case opc::mac::kLoadWeights:
      if (weights_.size() + 4 > std::size_t{9} * channels_ + 3) throw SimulationFault("CNN_MAC weight RAM overflow");
      for (int i = 0; i < 4; ++i) weights_.push_back(static_cast<int8_t>((a >> (8 * i)) & 0xFF));
      return {};
    case opc::mac::kClear:
      acc_ = 0;
      return {};
    case opc::mac::kMac: {
      if (channels_ == 0) throw SimulationFault("CNN_MAC used before SET_GEOM");
      if (weights_.size() < std::size_t{9} * channels_) throw SimulationFault("CNN_MAC weights incomplete");
      if (x_ + 3 > width_) throw SimulationFault("CNN_MAC window past end of row");
      pull(streams, need(op));
      std::span<const int8_t, 9> w(weights_.data() + std::size_t{9} * ch_, 9);
      acc_ = static_cast<uint32_t>(mac_window(static_cast<int32_t>(acc_), w, bank_, x_, ch_, channels_));
      ++windows_;
      if (++ch_ == channels_) {
        ch_ = 0;
        ++x_;
      }
      return {acc_, 0, false};
    }
    case opc::mac::kNextRow:
      pull(streams, need(op));
      bank_.clear();
      x_ = ch_ = 0;
      return {};
    case opc::mac::kRead: return {acc_, 0, false};
    default: throw SimulationFault("CNN_MAC opcode " + std::to_string(op) + " undefined");
  }
}

void CnnMacKernel::reset() {
  width_ = channels_ = 0;
  weights_.clear();
  bank_.configure(0);
  x_ = ch_ = 0;
  acc_ = 0;
  windows_ = 0;
}

KernelResult CnnSumKernel::execute(uint8_t op, uint32_t a, uint32_t b, StreamBank&) {
  const int32_t v = std::max(0, static_cast<int32_t>(a));
  switch (op) {
    case opc::sum::kSetQuant: {
      float scale = std::bit_cast<float>(a);
      if (!(scale > 0.0f) || !std::isfinite(scale)) throw SimulationFault("CNN_SUM scale must be positive and finite");
      q_ = {scale, static_cast<int8_t>(b & 0xFF)};
      partial_ = 0;
      return {};
    }
    case opc::sum::kAccumulate:
      partial_ = std::max(partial_, v);
      return {static_cast<uint32_t>(partial_), 0, false};
    case opc::sum::kQuantize: {
      int8_t r = quantize(std::max(partial_, v), q_);
      partial_ = 0;
      return {static_cast<uint32_t>(static_cast<int32_t>(r)), 0, false};
    }
    case opc::sum::kTake: {
      uint32_t out = static_cast<uint32_t>(partial_);
      partial_ = 0;
      return {out, 0, false};
    }
    case opc::sum::kClear: partial_ = 0; return {};
    default: throw SimulationFault("CNN_SUM opcode " + std::to_string(op) + " undefined");
  }
}

void CnnSumKernel::reset() {
  q_ = {};
  partial_ = 0;
}

RfnnTensor parse_rfnn(std::span<const uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "RFNN", 4) != 0) throw std::runtime_error("not an RFNN file");
  auto u32 = [&](std::size_t pos) {
    return uint32_t{bytes[pos]} | uint32_t{bytes[pos + 1]} << 8 | uint32_t{bytes[pos + 2]} << 16 |
           uint32_t{bytes[pos + 3]} << 24;
  };
  RfnnTensor t{u32(4), u32(8), u32(12), {}};
  const uint64_t n = uint64_t{t.h} * t.w * t.c;
  if (bytes.size() != 16 + n) throw std::runtime_error("RFNN payload size mismatch");
  t.data.resize(n);
  std::memcpy(t.data.data(), bytes.data() + 16, n);
  return t;
}

std::vector<uint8_t> serialize_rfnn(const RfnnTensor& t) {
  std::vector<uint8_t> out = {'R', 'F', 'N', 'N'};
  for (uint32_t v : {t.h, t.w, t.c}) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  for (int8_t px : t.data) out.push_back(static_cast<uint8_t>(px));
  return out;
}

RfnnTensor read_rfnn_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_rfnn(bytes);
}

void write_rfnn_file(const std::filesystem::path& path, const RfnnTensor& t) {
  auto bytes = serialize_rfnn(t);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace refab
