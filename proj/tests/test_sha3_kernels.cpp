#include "doctest.h"

#include <bit>
#include <random>
#include <set>

#include "oracles/oracles.hpp"
#include "refab/bench/generators.hpp"
#include "refab/bench/harness.hpp"
#include "refab/sha3_kernels.hpp"

using namespace refab;

namespace {

std::string data_file(const char* name) { return std::string(REFAB_TEST_DATA) + "/" + name; }

std::string hex_of(std::span<const uint8_t> m) { return to_hex(sha3_256(m)); }

// Standard rho offsets, written out.
constexpr unsigned kRho[25] = {0, 1, 62, 28, 27, 36, 44, 6, 55, 20, 3, 10, 43, 25, 39, 41, 45, 15, 21, 8, 18, 2, 61, 56, 14};

}  // namespace

TEST_CASE("padding") {
  auto e = pad10x1({});
  REQUIRE(e.size() == 1);
  CHECK(e[0][0] == 0x06);
  CHECK(e[0][135] == 0x80);
  for (std::size_t i = 1; i < 135; ++i) CHECK(e[0][i] == 0);

  auto m135 = oracle::counting_message(135);
  auto p = pad10x1(m135);
  REQUIRE(p.size() == 1);
  CHECK(p[0][135] == 0x86);
  CHECK(pad10x1(oracle::counting_message(136)).size() == 2);
  CHECK(pad10x1(oracle::counting_message(271)).size() == 2);
  CHECK(pad10x1(oracle::counting_message(272)).size() == 3);
}

TEST_CASE("round 0 on the zero state injects only the constant") {
  KeccakState z{};
  auto s = keccak_round(z, 0);
  CHECK(s[0] == 0x0000000000000001ull);
  for (int i = 1; i < 25; ++i) CHECK(s[static_cast<std::size_t>(i)] == 0);
  CHECK(keccak_round_constant(23) == 0x8000000080008008ull);
}

TEST_CASE("Keccak-f on the zero state") {
  KeccakState s{};
  keccak_f1600(s);
  CHECK(s[0] == 0xF1258F7940E1DDE7ull);
  CHECK(s[1] == 0x84D5CCF933C0478Aull);
  KeccakState r{};
  for (int i = 0; i < 24; ++i) r = keccak_round(r, i);
  CHECK(r == s);
}

TEST_CASE("theta column parity") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    KeccakState a;
    for (auto& l : a) l = rng();
    auto par = [](const KeccakState& s, int x) {
      uint64_t p = 0;
      for (int y = 0; y < 5; ++y) p ^= s[static_cast<std::size_t>(x + 5 * y)];
      return p;
    };
    // theta alone: a[x,y] ^= C[x-1] ^ rot(C[x+1], 1)
    KeccakState th = a;
    for (int x = 0; x < 5; ++x) {
      uint64_t d = par(a, (x + 4) % 5) ^ std::rotl(par(a, (x + 1) % 5), 1);
      for (int y = 0; y < 5; ++y) th[static_cast<std::size_t>(x + 5 * y)] ^= d;
    }
    for (int x = 0; x < 5; ++x) {
      // five copies of D cancel to one
      uint64_t want = par(a, x) ^ par(a, (x + 4) % 5) ^ std::rotl(par(a, (x + 1) % 5), 1);
      CHECK(par(th, x) == want);
    }
    // the library round equals theta, rho, pi, chi, iota built on that theta
    KeccakState b{};
    for (int x = 0; x < 5; ++x) {
      for (int y = 0; y < 5; ++y) {
        b[static_cast<std::size_t>(y + 5 * ((2 * x + 3 * y) % 5))] = std::rotl(th[static_cast<std::size_t>(x + 5 * y)], static_cast<int>(kRho[x + 5 * y]));
      }
    }
    KeccakState want{};
    for (int x = 0; x < 5; ++x) {
      for (int y = 0; y < 5; ++y) {
        want[static_cast<std::size_t>(x + 5 * y)] = b[static_cast<std::size_t>(x + 5 * y)] ^
            (~b[static_cast<std::size_t>((x + 1) % 5 + 5 * y)] & b[static_cast<std::size_t>((x + 2) % 5 + 5 * y)]);
      }
    }
    want[0] ^= keccak_round_constant(t % 24);
    CHECK(keccak_round(a, t % 24) == want);
  }
}

TEST_CASE("rho buffer") {
  for (int i = 0; i < 25; ++i) CHECK(keccak_rho_offset(i) == kRho[i]);
  RhoBuffer rb;
  std::array<uint64_t, 4> in = {0xABCDEF, 1, 1, 1};
  std::array<int, 4> ids = {0, 1, 2, 3};
  auto out = rb.apply(in, ids);
  CHECK(out[0] == 0xABCDEF);
  CHECK(out[1] == 2);

  std::mt19937_64 rng(13);
  for (int base = 0; base < 25; base += 4) {
    std::array<uint64_t, 4> lanes;
    std::array<int, 4> lid;
    for (int k = 0; k < 4; ++k) {
      lanes[static_cast<std::size_t>(k)] = rng();
      lid[static_cast<std::size_t>(k)] = (base + k) % 25;
    }
    auto r = rb.apply(lanes, lid);
    for (int k = 0; k < 4; ++k) {
      auto ku = static_cast<std::size_t>(k);
      CHECK(r[ku] == std::rotl(lanes[ku], static_cast<int>(kRho[lid[ku]])));
      CHECK(std::rotr(r[ku], static_cast<int>(kRho[lid[ku]])) == lanes[ku]);
    }
  }
  for (unsigned off = 0; off < 64; ++off) {
    unsigned sum = 0;
    for (int st : RhoBuffer::stages_for(off)) sum += RhoBuffer::kStageShift[static_cast<std::size_t>(st)];
    CHECK(sum == off);
  }
}

TEST_CASE("permutation is injective on random states") {
  std::mt19937_64 rng(14);
  std::set<uint64_t> seen;
  for (int i = 0; i < 500; ++i) {
    KeccakState s;
    for (auto& l : s) l = rng();
    keccak_f1600(s);
    CHECK(seen.insert(s[0] ^ s[7] ^ s[24]).second);
  }
}

TEST_CASE("digests match the frozen vectors") {
  auto named = oracle::read_vectors(data_file("sha3_256_named.txt"));
  CHECK(hex_of({}) == named.at("empty"));
  CHECK(hex_of({}).rfind("a7ffc6f8", 0) == 0);
  const std::string abc = "abc";
  CHECK(hex_of(std::span(reinterpret_cast<const uint8_t*>(abc.data()), abc.size())) == named.at("abc"));

  auto lens = oracle::read_vectors(data_file("sha3_256_lengths.txt"));
  REQUIRE(lens.size() == 301);
  for (int n = 0; n <= 300; ++n) {
    auto m = oracle::counting_message(static_cast<std::size_t>(n));
    REQUIRE_MESSAGE(hex_of(m) == lens.at(std::to_string(n)), "length ", n);
    REQUIRE(to_hex(bench::ref_sha3_256(m)) == lens.at(std::to_string(n)));
  }
}

TEST_CASE("stream words are the padded message, little endian") {
  auto w = sha3_stream_words(std::vector<uint8_t>{0x61, 0x62, 0x63});
  REQUIRE(w.size() == kSha3RateWords);
  CHECK(w[0] == 0x06636261u);
  CHECK(w.back() == 0x80000000u);
}

TEST_CASE("SI absorbs with zero stalls and counts 24 rounds per block") {
  for (std::size_t n : {0u, 135u, 136u, 300u}) {
    auto m = oracle::counting_message(n);
    auto g = bench::gen_sha3(m);
    auto r = bench::run_generated(g, bench::sha3_fabric());
    REQUIRE(r.clean());
    CHECK(r.outcome.stalled_cycles == 0);
    auto* comp = static_cast<const ShaCompKernel*>(r.fabric->kernel(1));
    CHECK(comp->rounds_done() == 24 * pad10x1(m).size());
    CHECK(bench::sha3_result(r) == sha3_256(m));
  }
}

TEST_CASE("starved SHA-Buff stalls, then resumes") {
  auto m = oracle::counting_message(200);
  auto g = bench::gen_sha3(m);
  Fabric f(bench::sha3_fabric().setup);
  Machine mach(g.image, {}, f);
  const auto& words = g.streams.at(0).words;
  const std::size_t half = 50;
  f.stream_push(g.streams[0].slot, g.streams[0].channel, std::span(words.data(), half));
  int stalled = 0;
  for (int i = 0; i < 2000 && stalled < 30; ++i) stalled += mach.step().kind == StepKind::Stalled;
  REQUIRE(stalled == 30);
  f.stream_push(g.streams[0].slot, g.streams[0].channel, std::span(words.data() + half, words.size() - half));
  REQUIRE(mach.run().halted);
  std::array<uint8_t, 32> d{};
  for (uint32_t i = 0; i < 8; ++i) {
    for (uint32_t b = 0; b < 4; ++b) d[4 * i + b] = static_cast<uint8_t>(f.mem_read(i) >> (8 * b));
  }
  CHECK(d == sha3_256(m));
}

TEST_CASE("starved past the threshold traps") {
  auto g = bench::gen_sha3(oracle::counting_message(10));
  Fabric f(bench::sha3_fabric().setup);
  ControllerConfig cfg;
  cfg.stall_threshold = 64;
  Machine mach(g.image, cfg, f);
  auto out = mach.run();
  REQUIRE(out.trap);
  CHECK(out.trap->kind == TrapKind::StallTimeout);
}

TEST_CASE("dual configuration equals sequential runs") {
  auto a = oracle::counting_message(290), b = oracle::counting_message(17);
  auto r = bench::compare_sha3_dual(a, b, bench::sha3_fabric());
  CHECK(r.matched);
  auto g = bench::gen_sha3_dual(a, b);
  auto run = bench::run_generated(g, bench::sha3_fabric());
  REQUIRE(run.clean());
  CHECK(bench::sha3_result(run, bench::kShaDigestA) == bench::sha3_result(bench::run_generated(bench::gen_sha3(a), bench::sha3_fabric())));
  CHECK(bench::sha3_result(run, bench::kShaDigestB) == bench::sha3_result(bench::run_generated(bench::gen_sha3(b), bench::sha3_fabric())));
}
