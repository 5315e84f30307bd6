#include "doctest.h"

#include <cmath>
#include <random>

#include "refab/bench/generators.hpp"
#include "refab/bench/harness.hpp"
#include "refab/cnn_kernels.hpp"

using namespace refab;

namespace {

LineBufferBank filled_bank(uint32_t len, std::mt19937_64& rng) {
  LineBufferBank b(len);
  for (int r = 0; r < 3; ++r) {
    for (uint32_t i = 0; i < len; ++i) b.push(r, static_cast<int8_t>(rng()));
  }
  return b;
}

// Quantize with explicit ties-to-even on the binary32 product.
int8_t quant_oracle(int32_t v, float scale, int8_t zp) {
  volatile float p = static_cast<float>(v) * scale;
  double f = std::floor(static_cast<double>(p));
  double diff = static_cast<double>(p) - f;
  double r = diff > 0.5 ? f + 1 : diff < 0.5 ? f : (std::fmod(f, 2.0) == 0 ? f : f + 1);
  r += zp;
  if (r < -128) r = -128;
  if (r > 127) r = 127;
  return static_cast<int8_t>(r);
}

}  // namespace

TEST_CASE("window readiness") {
  LineBufferBank b(8);
  for (int r = 0; r < 3; ++r) {
    for (int i = 0; i < 3; ++i) b.push(r, 1);
  }
  CHECK(b.window_ready(0));
  CHECK_FALSE(b.window_ready(1));

  LineBufferBank two(8);
  for (int r = 0; r < 2; ++r) {
    for (int i = 0; i < 8; ++i) two.push(r, 1);
  }
  CHECK_FALSE(two.window_ready(0));

  LineBufferBank tiny(3);
  for (int i = 0; i < 3; ++i) tiny.push(0, 0);
  CHECK_THROWS_AS(tiny.push(0, 0), SimulationFault);
  CHECK_THROWS_AS(LineBufferBank(4096), SimulationFault);
}

TEST_CASE("mac_window examples") {
  LineBufferBank b(3);
  for (int r = 0; r < 3; ++r) {
    for (int i = 0; i < 3; ++i) b.push(r, 1);
  }
  std::array<int8_t, 9> ones;
  ones.fill(1);
  CHECK(mac_window(0, ones, b, 0) == 9);

  std::mt19937_64 rng(5);
  auto rb = filled_bank(10, rng);
  std::array<int8_t, 9> center{};
  center[4] = 1;
  for (uint32_t x = 0; x + 3 <= 10; ++x) CHECK(mac_window(100, center, rb, x) == 100 + rb.at(1, x + 1));
}

TEST_CASE("mac_window against the nine-term sum") {
  std::mt19937_64 rng(6);
  for (uint32_t channels : {1u, 2u, 5u}) {
    const uint32_t w = 12;
    auto bank = filled_bank(w * channels, rng);
    for (int trial = 0; trial < 200; ++trial) {
      std::array<int8_t, 9> wt;
      for (auto& v : wt) v = static_cast<int8_t>(rng());
      uint32_t x = static_cast<uint32_t>(rng() % (w - 2));
      uint32_t ch = static_cast<uint32_t>(rng() % channels);
      int32_t acc = static_cast<int32_t>(rng() % 100000) - 50000;
      int64_t want = acc;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) want += int64_t{wt[static_cast<std::size_t>(i * 3 + j)]} * bank.at(i, (x + static_cast<uint32_t>(j)) * channels + ch);
      }
      REQUIRE(mac_window(acc, wt, bank, x, ch, channels) == want);
    }
  }
}

TEST_CASE("sum_step examples") {
  QuantParams q{0.37f, 12};
  CHECK(sum_step({-5, -1, -9, -2}, q) == 12);
  CHECK(sum_step({0, 10, 3, 7}, QuantParams{1.0f, 0}) == 10);
  CHECK(sum_step({1000, 0, 0, 0}, QuantParams{1.0f, 0}) == 127);
  CHECK(quantize(-1000, QuantParams{1.0f, 0}) == -128);
  CHECK(quantize(5, QuantParams{0.5f, 0}) == 2);  // 2.5 ties to even
  CHECK(quantize(7, QuantParams{0.5f, 0}) == 4);  // 3.5 ties to even
}

TEST_CASE("sum_step against the scalar pipeline") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50000; ++i) {
    std::array<int32_t, 4> win;
    for (auto& v : win) v = static_cast<int32_t>(rng() % 200001) - 100000;
    float scale = std::ldexp(static_cast<float>(rng() % 1000 + 1), -static_cast<int>(rng() % 16));
    int8_t zp = static_cast<int8_t>(rng());
    int32_t m = 0;
    for (int32_t v : win) m = v > m ? v : m;
    REQUIRE(sum_step(win, QuantParams{scale, zp}) == quant_oracle(m, scale, zp));
  }
}

TEST_CASE("reference layer examples") {
  bench::ConvLayerProblem p;
  p.h = 8;
  p.w = 6;
  p.c = 1;
  p.zero_point = -3;
  p.pixels.resize(48);
  std::mt19937_64 rng(8);
  for (auto& v : p.pixels) v = static_cast<int8_t>(rng());
  p.weights.assign(9, 0);
  for (int8_t v : bench::ref_conv_layer(p)) CHECK(v == -3);

  p.weights[4] = 1;
  p.zero_point = 0;
  auto out = bench::ref_conv_layer(p);
  REQUIRE(out.size() == p.pooled_h() * p.pooled_w());
  for (uint32_t y = 0; y < p.pooled_h(); ++y) {
    for (uint32_t x = 0; x < p.pooled_w(); ++x) {
      int m = 0;
      for (uint32_t dy = 0; dy < 2; ++dy) {
        for (uint32_t dx = 0; dx < 2; ++dx) m = std::max<int>(m, p.px(0, 2 * y + dy + 1, 2 * x + dx + 1));
      }
      CHECK(out[y * p.pooled_w() + x] == m);
    }
  }
}

TEST_CASE("SI matches the oracle for every channel count up to 8") {
  for (uint32_t c = 1; c <= 8; ++c) {
    auto r = bench::compare_cnn(bench::random_cnn(8, 10, c, 100 + c), bench::cnn_fabric());
    CHECK_MESSAGE(r.matched, "C=", c, " ", r.detail);
    CHECK(r.stalled_cycles == 0);
  }
}

TEST_CASE("single-MAC fabric gives the same output") {
  auto p = bench::random_cnn(10, 9, 3, 77);
  auto r = bench::compare_cnn(p, bench::cnn_fabric(bench::CnnVariant::OneMac));
  CHECK(r.matched);
  CHECK(r.stalled_cycles == 0);
}

TEST_CASE("a starved line buffer stalls and resumes") {
  auto p = bench::random_cnn(8, 8, 2, 9);
  auto g = bench::gen_cnn(p);
  Fabric f(bench::cnn_fabric().setup);
  Machine m(g.image, {}, f);
  // hold back the tail of every MAC0 row stream
  std::vector<bench::StreamPayload> rest;
  for (const auto& s : g.streams) {
    if (s.slot == 0) {
      std::size_t keep = s.words.size() / 2;
      f.stream_push(s.slot, s.channel, std::span(s.words.data(), keep));
      rest.push_back({s.slot, s.channel, {s.words.begin() + static_cast<std::ptrdiff_t>(keep), s.words.end()}});
    } else {
      f.stream_push(s.slot, s.channel, s.words);
    }
  }
  int stalled = 0;
  for (int i = 0; i < 5000 && stalled < 20; ++i) stalled += m.step().kind == StepKind::Stalled;
  REQUIRE(stalled == 20);
  for (const auto& s : rest) f.stream_push(s.slot, s.channel, s.words);
  auto out = m.run();
  REQUIRE(out.halted);
  auto want = bench::ref_conv_layer(p);
  const uint32_t base = bench::cnn_output_base(p);
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(static_cast<int8_t>(f.mem_read(base + static_cast<uint32_t>(i)) & 0xFF) == want[i]);
  }
}

TEST_CASE("RFNN files") {
  RfnnTensor t{2, 3, 2, {1, -2, 3, -4, 5, -6, 7, -8, 9, -10, 11, -12}};
  auto bytes = serialize_rfnn(t);
  REQUIRE(bytes.size() == 16 + 12);
  CHECK(bytes[4] == 2);
  CHECK(bytes[8] == 3);
  auto back = parse_rfnn(bytes);
  CHECK(back.data == t.data);
  CHECK(back.at(1, 0, 2) == 9);
  bytes.pop_back();
  CHECK_THROWS(parse_rfnn(bytes));
}
