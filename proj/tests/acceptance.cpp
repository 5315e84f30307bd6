// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <bit>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "oracles/oracles.hpp"
#include "oracles/testkit.hpp"
#include "refab/assembler.hpp"
#include "refab/bench/generators.hpp"
#include "refab/bench/harness.hpp"
#include "refab/controller.hpp"
#include "refab/isa.hpp"
#include "refab/sha3_kernels.hpp"

using namespace refab;
using namespace refab::bench;

namespace {

// Collects the first few failure messages of one criterion.
struct Check {
  int failures = 0;
  std::ostringstream first;

  void operator()(bool ok, const std::string& what) {
    if (ok) return;
    if (failures++ < 3) first << (failures > 1 ? "; " : "") << what;
  }
};

int g_failed = 0;

void criterion(int n, const char* title, double limit_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c(false, std::string("exception: ") + e.what());
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && s >= limit_s) c(false, "took " + std::to_string(s) + " s, limit " + std::to_string(limit_s));
  const bool ok = c.failures == 0;
  g_failed += !ok;
  std::printf("%s %2d  %-58s %7.2f s", ok ? "PASS" : "FAIL", n, title, s);
  if (!ok) std::printf("  [%d failure(s): %s]", c.failures, c.first.str().c_str());
  std::printf("\n");
  std::fflush(stdout);
}

bool round_trips(const ProgramImage& img) {
  auto r = assemble(disassemble(img));
  return r.ok() && *r.image == img;
}

RunOutcome run_src(const std::string& src, ControllerConfig cfg = {}) {
  kit::Rig rig(src, cfg);
  return rig.run();
}

std::vector<uint8_t> as_bytes(const std::string& s) { return {s.begin(), s.end()}; }

RiemannProblem lake(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> eta(16, 160), bed(-230, 230);
  const float surface = static_cast<float>(eta(rng)) / 16.0f;
  RiemannProblem p;
  p.b_l = static_cast<float>(bed(rng)) / 256.0f;
  p.b_r = static_cast<float>(bed(rng)) / 256.0f;
  p.h_l = surface - p.b_l;
  p.h_r = surface - p.b_r;
  return p;
}

}  // namespace

int main() {
  criterion(1, "ISA round-trip of 10,000 random VLIWs", 5.0, [](Check& c) {
    c(decode_vliw(VliwWord{}) == Vliw{}, "zero word is not the NOP VLIW");
    c(encode_vliw(Vliw{}) == VliwWord{}, "NOP VLIW does not encode to zero");
    std::mt19937_64 rng(1001);
    for (int i = 0; i < 10000; ++i) {
      const Vliw v = oracle::random_vliw(rng);
      const VliwWord w = encode_vliw(v);
      c(w == oracle::pack(v), "encoding differs from the bit packer at " + std::to_string(i));
      c(decode_vliw(w) == v, "decode mismatch at " + std::to_string(i));
      c(encode_vliw(decode_vliw(w)) == w, "re-encode mismatch at " + std::to_string(i));
    }
  });

  criterion(2, "disassemble/assemble is identity on generated images", 5.0, [](Check& c) {
    std::vector<std::pair<std::string, ProgramImage>> imgs;
    for (std::size_t n : {1u, 8u, 64u, 1000u}) imgs.emplace_back("sift", gen_sift(random_sift(n, n)).image);
    imgs.emplace_back("swe", gen_swe(random_swe(1, 2).front()).image);
    for (uint32_t ch : {1u, 3u, 8u}) {
      imgs.emplace_back("cnn", gen_cnn(random_cnn(16, 16, ch, ch)).image);
      imgs.emplace_back("cnn1", gen_cnn(random_cnn(16, 16, ch, ch), CnnVariant::OneMac).image);
    }
    for (std::size_t n : {0u, 3u, 135u, 136u, 300u}) imgs.emplace_back("sha3", gen_sha3(oracle::counting_message(n)).image);
    imgs.emplace_back("sha3dual", gen_sha3_dual(oracle::counting_message(5), oracle::counting_message(200)).image);
    for (const auto& [name, img] : imgs) c(round_trips(img), name + " image changed");
  });

  criterion(3, "CNT and ACC jump semantics vs brute force", 0, [](Check& c) {
    const char* names[] = {"EQ", "NEQ", "LT", "GT"};
    for (int k = 0; k < 4; ++k) {
      for (uint16_t opnd : {0, 1, 2, 7, 100, 2048, 4094, 4095}) {
        std::set<uint16_t> pts;
        for (int v : {0, 1, opnd - 1, int(opnd), opnd + 1, 4095}) {
          if (v >= 0 && v <= 4095) pts.insert(static_cast<uint16_t>(v));
        }
        for (uint16_t cnt : pts) {
          std::array<ParamSet, 4> sets{};
          sets[2] = {77, cnt};
          FlowOp f{static_cast<FlowOpcode>(2 + k), 2, opnd, 0, 0};
          const auto d = eval_flow(f, sets, {});
          const bool want = oracle::holds(names[k], cnt, opnd);
          c((d.kind == FlowDecisionKind::Jump) == want && (!want || d.destination == 77),
            std::string("CNT ") + names[k] + " " + std::to_string(cnt) + " vs " + std::to_string(opnd));
        }
      }
    }
    std::vector<uint8_t> masks;
    for (uint8_t m = 1; m < 32; ++m) {
      const int size = std::popcount(m);
      if (size == 1 || size == 2 || size == 5) masks.push_back(m);
    }
    for (int k = 0; k < 4; ++k) {
      for (bool trap : {false, true}) {
        const auto op = static_cast<FlowOpcode>((trap ? 12 : 6) + k);
        for (uint32_t sig = 0; sig < 1024; ++sig) {
          std::array<uint8_t, 5> s{};
          for (int i = 0; i < 5; ++i) s[static_cast<std::size_t>(i)] = static_cast<uint8_t>((sig >> (2 * i)) & 3);
          for (uint16_t v = 0; v < 4; ++v) {
            for (uint8_t m : masks) {
              bool want = true;
              for (int i = 0; i < 5; ++i) {
                if ((m >> i) & 1) want = want && oracle::holds(names[k], s[static_cast<std::size_t>(i)], v);
              }
              FlowOp f{op, 1, v, m, 6};
              const auto d = eval_flow(f, {}, s);
              const auto hit = trap ? FlowDecisionKind::Trap : FlowDecisionKind::Jump;
              c((d.kind == hit) == want && (d.kind == hit || d.kind == FlowDecisionKind::Fallthrough) &&
                    (!trap || !want || d.trap_value == 6),
                std::string("ACC ") + names[k] + " sig " + std::to_string(sig) + " v " + std::to_string(v) +
                    " mask " + std::to_string(m));
            }
          }
        }
      }
    }
    // the same table holds on the machine: counted loops run operand times
    for (uint16_t n : {1, 2, 9, 4095}) {
      kit::Rig rig("ctrl: PS_SET_DEST p1, l\nl: ctrl: PS_CNT_INC p1 ; JMP_IF_CNT_LT p1, " + std::to_string(n) + "\n");
      rig.run();
      c(rig.retired_at(1) == n, "loop of " + std::to_string(n));
    }
  });

  criterion(4, "trap suite", 0, [](Check& c) {
    // (a) destination outside the program
    ProgramImage img = kit::assemble_ok("ctrl: PS_SET_DEST p0, 0\nctrl: ALW_JMP p0\nctrl: NO_JMP\n");
    write_bits(img.words[0], 172, 12, 4095);
    {
      kit::Rig rig(img);
      auto o = rig.run();
      c(o.trap && o.trap->kind == TrapKind::InvalidJumpTarget && o.trap->target == 4095 && o.trap->pc == 1,
        "out-of-range destination");
    }
    // (b) starved stream at the default and an override
    const std::string starve = ".slotbind 2 SHA_BUFF\nslot2: POP -> out\n";
    for (uint32_t th : {512u, 8u}) {
      ControllerConfig cfg;
      cfg.stall_threshold = th;
      kit::Rig rig(starve, cfg);
      auto o = rig.run();
      c(o.trap && o.trap->kind == TrapKind::StallTimeout && o.trap->cycle == th && o.trap->pc == 0 &&
            o.stalled_cycles == th && o.retired_vliws == 0,
        "stall timeout at threshold " + std::to_string(th));
    }
    c(ControllerConfig{}.stall_threshold == 512, "default threshold");
    // (c) NaN from each FP kernel kind in every slot
    const std::pair<const char*, const char*> nan_ops[] = {
        {"FMAV", "ADD m0, m0 -> out"}, {"DIV", "DIV m1, m1 -> out"}, {"SQRT", "SQRT m2 -> out"}, {"UTIL", "CMP m3, m3"}};
    for (int slot = 0; slot < 5; ++slot) {
      for (const auto& [kind, op] : nan_ops) {
        // m0 holds +inf then -inf, m1 zero twice, m2 -1.0, m3 NaN
        std::ostringstream src;
        src << ".slotbind " << slot << ' ' << kind << "\n"
            << ".word 0x7f800000 0xff800000 0 0 0xbf800000 0x7fc00000\n"
            << "ctrl: AGU_SET a1, 2\n"
            << "ctrl: AGU_SET a2, 4\n"
            << "ctrl: AGU_SET a3, 5\n"
            << "slot" << slot << ": " << op << "\n";
        auto o = run_src(src.str());
        c(o.trap && o.trap->kind == TrapKind::AcceleratorError && o.trap->slot == slot,
          std::string(kind) + " NaN in slot " + std::to_string(slot));
      }
    }
    // (d) every user trap value
    for (int v = 0; v < 8; ++v) {
      ProgramImage t = kit::assemble_ok("ctrl: NO_JMP\nctrl: TRAP_ALW " + std::to_string(v) + "\nctrl: NO_JMP\n");
      c(decode_vliw(t.words[1]).flow.trap_value == v, "trap value field " + std::to_string(v));
      c(round_trips(t), "trap value text " + std::to_string(v));
      kit::Rig rig(t);
      auto o = rig.run();
      c(o.trap && o.trap->kind == TrapKind::User && o.trap->value == v && o.trap->pc == 1,
        "user trap " + std::to_string(v));
    }
  });

  criterion(5, "four-deep nest (2,3,5,7) retires the body 210 times", 0, [](Check& c) {
    kit::Rig rig(
        ".slotbind 0 FMAV\n"
        ".word 0x3f800000\n"
        "ctrl: PS_SET_DEST p0, l0\n"
        "ctrl: PS_SET_DEST p1, l1\n"
        "ctrl: PS_SET_DEST p2, l2\n"
        "ctrl: PS_SET_DEST p3, body\n"
        "ctrl: AGU_SET a1, 4\n"
        "l0: ctrl: PS_CNT_RESET p1\n"
        "l1: ctrl: PS_CNT_RESET p2\n"
        "l2: ctrl: PS_CNT_RESET p3\n"
        "body: slot0: ADD s0, m0 -> out | ctrl: AGU_SET a0, 0\n"
        "ctrl: PS_CNT_INC p3 ; JMP_IF_CNT_LT p3, 7\n"
        "ctrl: PS_CNT_INC p2 ; JMP_IF_CNT_LT p2, 5\n"
        "ctrl: PS_CNT_INC p1 ; JMP_IF_CNT_LT p1, 3\n"
        "ctrl: PS_CNT_INC p0 ; JMP_IF_CNT_LT p0, 2\n"
        "slot0: ADD s0, $0 -> m1\n");
    auto o = rig.run();
    c(o.halted && !o.trap, "did not halt cleanly");
    c(rig.retired_at(8) == 210, "body retired " + std::to_string(rig.retired_at(8)) + " times");
    c(rig.retired_at(9) == 210 && rig.retired_at(10) == 30 && rig.retired_at(11) == 6 && rig.retired_at(12) == 2,
      "back-edge counts");
    c(oracle::flt(rig.fabric->mem_read(4)) == 210.0f, "accumulated " + std::to_string(oracle::flt(rig.fabric->mem_read(4))));
  });

  criterion(6, "SIFT bit-equals the partitioned-sum oracle", 30.0, [](Check& c) {
    std::vector<std::size_t> ns;
    for (std::size_t n = 1; n <= 64; ++n) ns.push_back(n);
    ns.push_back(128);
    ns.push_back(1000);
    for (std::size_t n : ns) {
      auto p = random_sift(n, 600 + n);
      auto r = compare_sift(p, sift_fabric());
      c(r.matched && !r.trap, "n=" + std::to_string(n) + " " + r.detail);
      p.b = p.a;
      auto same = run_generated(gen_sift(p), sift_fabric());
      c(same.clean() && oracle::bits(sift_result(same)) == 0u, "a = b not exactly 0 at n=" + std::to_string(n));
    }
  });

  criterion(7, "SWE accuracy, lake at rest and dispatch", 60.0, [](Check& c) {
    auto wet = random_swe(1000, 700);
    auto r = compare_swe(wet, swe_fabric());
    c(r.matched && r.max_abs_rel_error <= 1e-6, "wet-wet: " + r.detail);
    std::mt19937_64 rng(701);
    for (int i = 0; i < 50; ++i) {
      auto run = run_generated(gen_swe(lake(rng)), swe_fabric());
      auto u = run.clean() ? swe_result(run) : NetUpdates<float>{1, 1, 1, 1, 1};
      c(u.h_upd_l == 0.0f && u.h_upd_r == 0.0f && u.hu_upd_l == 0.0f && u.hu_upd_r == 0.0f,
        "lake at rest " + std::to_string(i));
    }
    for (auto kind : {WetDry::WetWet, WetDry::LeftDry, WetDry::RightDry, WetDry::DryDry}) {
      for (const auto& p : random_swe(10, 702, kind)) {
        auto g = gen_swe(p);
        const auto b = swe_bodies(g);
        auto run = run_generated(g, swe_fabric(), true);
        bool fw = false, hr = false, hl = false;
        for (const auto& t : run.trace) {
          if (t.event != StepKind::Retired) continue;
          fw |= b.fwave.contains(t.pc);
          hr |= b.hlle_right_dry.contains(t.pc);
          hl |= b.hlle_left_dry.contains(t.pc);
        }
        const auto k = classify(p);
        c(run.clean() && fw == (k == WetDry::WetWet) && hr == (k == WetDry::RightDry) && hl == (k == WetDry::LeftDry),
          "dispatch for class " + std::to_string(static_cast<int>(kind)));
      }
      auto cls = random_swe(20, 703, kind);
      auto cr = compare_swe(cls, swe_fabric());
      c(cr.matched, "class " + std::to_string(static_cast<int>(kind)) + " vs oracle: " + cr.detail);
    }
  });

  criterion(8, "CNN 16x16, C in {1,3,8}: exact output, C MACs per window", 60.0, [](Check& c) {
    for (uint32_t ch : {1u, 3u, 8u}) {
      const auto p = random_cnn(16, 16, ch, 800 + ch);
      const auto g = gen_cnn(p);
      auto run = run_generated(g, cnn_fabric(), true);
      c(run.clean(), "C=" + std::to_string(ch) + " did not finish");
      if (!run.clean()) continue;
      c(cnn_result(run, p) == ref_conv_layer(p), "C=" + std::to_string(ch) + " output differs");
      const uint16_t inner = g.label(kCnnInnerLabel), col = g.label("col");
      // retirements of the inner VLIW between consecutive column starts
      std::vector<std::size_t> per;
      for (const auto& t : run.trace) {
        if (t.event != StepKind::Retired) continue;
        if (t.pc == col) per.push_back(0);
        if (t.pc == inner && !per.empty()) ++per.back();
      }
      const std::size_t windows = std::size_t{p.pooled_h()} * p.pooled_w();
      c(per.size() == windows, "C=" + std::to_string(ch) + " saw " + std::to_string(per.size()) + " columns");
      for (std::size_t n : per) c(n == ch, "C=" + std::to_string(ch) + " inner count " + std::to_string(n));
      auto one = compare_cnn(p, cnn_fabric(CnnVariant::OneMac));
      c(one.matched, "C=" + std::to_string(ch) + " single-MAC: " + one.detail);
    }
  });

  criterion(9, "SHA3-256 lengths 0..300, FIPS vectors, dual configuration", 60.0, [](Check& c) {
    const std::string dir = REFAB_TEST_DATA;
    auto lens = oracle::read_vectors(dir + "/sha3_256_lengths.txt");
    auto named = oracle::read_vectors(dir + "/sha3_256_named.txt");
    c(lens.size() == 301, "vector file incomplete");
    for (std::size_t n = 0; n <= 300; ++n) {
      const auto m = oracle::counting_message(n);
      auto r = compare_sha3(m, sha3_fabric());
      c(r.matched && !r.trap, "length " + std::to_string(n) + ": " + r.detail);
      c(r.output == lens.at(std::to_string(n)), "length " + std::to_string(n) + " differs from the frozen vector");
    }
    c(compare_sha3({}, sha3_fabric()).output == named.at("empty"), "empty-string vector");
    c(compare_sha3(as_bytes("abc"), sha3_fabric()).output == named.at("abc"), "abc vector");
    std::mt19937_64 rng(900);
    for (int i = 0; i < 20; ++i) {
      auto a = oracle::counting_message(rng() % 301), b = oracle::counting_message(rng() % 301);
      for (auto& x : b) x ^= 0x5A;
      auto run = run_generated(gen_sha3_dual(a, b), sha3_fabric());
      const auto sa = run_generated(gen_sha3(a), sha3_fabric());
      const auto sb = run_generated(gen_sha3(b), sha3_fabric());
      c(run.clean() && sha3_result(run, kShaDigestA) == sha3_result(sa) &&
            sha3_result(run, kShaDigestB) == sha3_result(sb),
        "dual pair " + std::to_string(i));
    }
  });

  criterion(10, "1000 repeats give identical reports and cycles", 0, [](Check& c) {
    auto doc = nlohmann::json::parse(R"([
      {"app": "sift", "name": "sift", "n": 100, "seed": 3},
      {"app": "swe", "name": "swe", "problems": [{"h_l": 2.0, "h_r": 1.5, "hu_l": 0.3, "hu_r": -0.2}]},
      {"app": "cnn", "name": "cnn", "h": 8, "w": 8, "c": 3, "seed": 4},
      {"app": "sha3", "name": "sha3", "text": "abc"}
    ])");
    const auto cases = parse_bench(doc);
    const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const auto res = run_bench(cases, std::nullopt, jobs, 1000);
    c(res.size() == 4000, "result count");
    for (std::size_t k = 0; k < cases.size(); ++k) {
      const std::string first = report_json({res[k * 1000]});
      c(res[k * 1000].matched, cases[k].name + " did not match");
      for (std::size_t i = 1; i < 1000; ++i) {
        const auto& r = res[k * 1000 + i];
        c(r.si_cycles == res[k * 1000].si_cycles, cases[k].name + " cycles vary");
        c(report_json({r}) == first, cases[k].name + " report varies at repeat " + std::to_string(i));
      }
    }
  });

  criterion(11, "slot scaling: 2-MAC CNN fewer cycles than 1-MAC", 0, [](Check& c) {
    for (uint32_t ch : {1u, 3u, 8u}) {
      const auto p = random_cnn(16, 16, ch, 1100 + ch);
      auto two = compare_cnn(p, cnn_fabric(CnnVariant::TwoMac));
      auto one = compare_cnn(p, cnn_fabric(CnnVariant::OneMac));
      c(two.matched && one.matched, "C=" + std::to_string(ch) + " mismatch");
      c(two.si_cycles < one.si_cycles, "C=" + std::to_string(ch) + ": " + std::to_string(two.si_cycles) +
                                           " vs " + std::to_string(one.si_cycles));
    }
  });

  std::printf("%s: %d of 11 criteria failed\n", g_failed ? "FAIL" : "PASS", g_failed);
  return g_failed ? 1 : 0;
}
