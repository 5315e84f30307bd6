#include "refab/bench/generators.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "refab/assembler.hpp"
#include "refab/cnn_kernels.hpp"
#include "refab/sha3_kernels.hpp"

namespace refab::bench {

uint16_t GeneratedProgram::label(const std::string& name) const {
  auto it = labels.find(name);
  if (it == labels.end()) throw GenerationError("generated program has no label '" + name + "'");
  return it->second;
}

GeneratedProgram build_program(std::string source, std::vector<StreamPayload> streams) {
  AssemblyResult r = assemble(source);
  if (!r.ok()) {
    std::string msg = "generated program failed to assemble";
    for (const auto& d : r.diagnostics) {
      if (d.severity == Severity::Error) msg += "\n  " + format_diagnostic(d, "<generated>");
    }
    throw GenerationError(msg);
  }
  GeneratedProgram g;
  g.source = std::move(source);
  g.image = std::move(*r.image);
  g.labels = std::move(r.labels);
  g.streams = std::move(streams);
  return g;
}

namespace {

std::string hex(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

void emit_words(std::ostringstream& os, const std::vector<uint32_t>& words) {
  for (std::size_t i = 0; i < words.size(); i += 8) {
    os << ".word";
    for (std::size_t j = i; j < words.size() && j < i + 8; ++j) os << ' ' << hex(words[j]);
    os << '\n';
  }
}

void emit_bindings(std::ostringstream& os, const std::array<KernelKind, kSlotCount>& kinds) {
  for (int i = 0; i < kSlotCount; ++i) os << ".slotbind " << i << ' ' << kind_name(kinds[static_cast<std::size_t>(i)]) << '\n';
}

FabricConfig fabric_of(const std::array<KernelKind, kSlotCount>& kinds) {
  FabricConfig cfg;
  cfg.setup.slot_count = kSlotCount;
  cfg.setup.slots = kinds;
  return cfg;
}

void check_count(uint64_t n, const char* what) {
  if (n > kMax12) throw GenerationError(std::string(what) + " " + std::to_string(n) + " exceeds the 12-bit loop counter");
}

constexpr std::array<KernelKind, kSlotCount> kSiftKinds = {KernelKind::Fmav, KernelKind::Fmav, KernelKind::Fmav,
                                                           KernelKind::Fmav, KernelKind::None};
constexpr std::array<KernelKind, kSlotCount> kSweKinds = {KernelKind::Fmav, KernelKind::Fmav, KernelKind::Div,
                                                          KernelKind::Sqrt, KernelKind::Util};
constexpr std::array<KernelKind, kSlotCount> kCnnKinds = {KernelKind::CnnMac, KernelKind::CnnMac, KernelKind::CnnSum,
                                                          KernelKind::CnnSum, KernelKind::None};
constexpr std::array<KernelKind, kSlotCount> kCnn1Kinds = {KernelKind::CnnMac, KernelKind::None, KernelKind::CnnSum,
                                                           KernelKind::None, KernelKind::None};
constexpr std::array<KernelKind, kSlotCount> kShaKinds = {KernelKind::ShaBuff, KernelKind::ShaComp,
                                                          KernelKind::ShaBuff, KernelKind::ShaComp, KernelKind::None};

}  // namespace

// ---------------------------------------------------------------------------
// SIFT

GeneratedProgram gen_sift(const SiftProblem& p) {
  if (p.a.size() != p.b.size()) throw GenerationError("SIFT vectors differ in length");
  const std::size_t n = p.a.size();
  const std::size_t iters = std::max<std::size_t>(1, (n + 3) / 4);
  check_count(iters, "SIFT iteration count");

  std::ostringstream os;
  emit_bindings(os, kSiftKinds);
  os << ".entry start\n"
        "start:\n"
        "    slot0: CLR_ACC | slot1: CLR_ACC | slot2: CLR_ACC | slot3: CLR_ACC | ctrl: AGU_SET a0, "
     << kSiftDataBase << "\n"
        "    ctrl: PS_SET_DEST p0, loop\n"
        "loop:\n"
        "    slot0: SUBSQ_ACC m0, m0 | slot1: SUBSQ_ACC m0, m0 | slot2: SUBSQ_ACC m0, m0 | slot3: SUBSQ_ACC m0, m0"
        " | ctrl: PS_CNT_INC p0 ; JMP_IF_CNT_LT p0, "
     << iters << "\n"
        "    slot0: RD_ACC -> out | slot1: RD_ACC -> out | slot2: RD_ACC -> out | slot3: RD_ACC -> out"
        " | ctrl: AGU_SET a1, "
     << kSiftResultAddr << "\n"
        "    slot0: ADD s0, s1 -> out | slot1: ADD s2, s3 -> out\n"
        "    slot0: ADD s0, s1 -> m1\n";

  std::vector<uint32_t> mem(kSiftDataBase + 8 * iters, 0);
  for (std::size_t i = 0; i < n; ++i) {
    mem[kSiftDataBase + 2 * i] = std::bit_cast<uint32_t>(p.a[i]);
    mem[kSiftDataBase + 2 * i + 1] = std::bit_cast<uint32_t>(p.b[i]);
  }
  emit_words(os, mem);
  return build_program(os.str());
}

FabricConfig sift_fabric() { return fabric_of(kSiftKinds); }

// ---------------------------------------------------------------------------
// SWE

namespace {

constexpr uint32_t kSweConstBase = 16;
constexpr uint32_t kSweVarBase = 32;

// Straight-line builder over three-address float ops. Every operand lives in
// memory; a0/a1 address the sources and a2 the destination, and AGU_SETs are
// elided when the register already holds the address.
class SweScript {
 public:
  SweScript() {
    const char* in[] = {"h_l", "h_r", "hu_l", "hu_r", "b_l", "b_r"};
    for (uint32_t i = 0; i < 6; ++i) addr_[in[i]] = kSweInputBase + i;
    const char* out[] = {"o_h_l", "o_h_r", "o_hu_l", "o_hu_r", "o_max"};
    for (uint32_t i = 0; i < 5; ++i) addr_[out[i]] = kSweOutputBase + i;
    const float g = kGravity;
    const float half_g = 0.5f * g;
    const std::pair<const char*, float> consts[] = {
        {"g", g},
        {"half_g", half_g},
        {"dry_tol", kDryTolerance},
        {"zero_tol", kZeroTolerance},
        {"neg_zero_tol", -kZeroTolerance},
        {"zero", 0.0f},
        {"half", 0.5f},
        {"one", 1.0f},
    };
    uint32_t a = kSweConstBase;
    for (const auto& [name, v] : consts) {
      addr_[name] = a;
      const_words_.emplace_back(a++, std::bit_cast<uint32_t>(v));
    }
  }

  uint32_t addr(const std::string& name) {
    auto [it, fresh] = addr_.try_emplace(name, next_var_);
    if (fresh) ++next_var_;
    return it->second;
  }

  void fmav(const std::string& mnem, const std::string& dst, const std::string& a, const std::string& b) {
    issue(fmav_slot_, mnem, dst, a, b);
    fmav_slot_ ^= 1;
  }
  void div(const std::string& dst, const std::string& a, const std::string& b) { issue(2, "DIV", dst, a, b); }
  void sqrt(const std::string& dst, const std::string& a) { issue(3, "SQRT", dst, a, ""); }
  void util(const std::string& mnem, const std::string& dst, const std::string& a, const std::string& b) {
    issue(4, mnem, dst, a, b);
  }
  // UTIL CMP with no destination, only ctrl matters.
  void cmp(const std::string& a, const std::string& b) { issue(4, "CMP", "", a, b); }
  void copy(const std::string& dst, const std::string& src) { issue(4, "CMP", dst, src, ""); }

  void label(const std::string& name) {
    pending_labels_.push_back(name);
    agu_.fill(std::nullopt);
  }
  void branch_acc(const std::string& target, const char* cond, int value) {
    push("", "PS_SET_DEST p1, " + target, std::string("JMP_IF_ACC_") + cond + " p1, " + std::to_string(value) + ", {4}");
  }
  void jump(const std::string& target) { push("", "PS_SET_DEST p1, " + target, "ALW_JMP p1"); }
  void nop() { push("", "", "NO_JMP"); }

  std::string text() const {
    std::ostringstream os;
    emit_bindings(os, kSweKinds);
    os << ".entry " << entry_ << '\n';
    for (const auto& s : stmts_) {
      for (const auto& l : s.labels) os << l << ":\n";
      std::string line;
      if (!s.slot.empty()) line = s.slot;
      std::string ctrl;
      if (!s.aux.empty()) ctrl = s.aux;
      if (!s.flow.empty()) ctrl += (ctrl.empty() ? "" : " ; ") + s.flow;
      if (!ctrl.empty()) line += (line.empty() ? "" : " | ") + std::string("ctrl: ") + ctrl;
      os << "    " << line << '\n';
    }
    std::vector<uint32_t> mem(next_var_, 0);
    for (const auto& [a, v] : const_words_) mem[a] = v;
    emit_words(os, mem);
    return os.str();
  }

  void set_entry(const std::string& l) { entry_ = l; }

 private:
  struct Stmt {
    std::string slot, aux, flow;
    std::vector<std::string> labels;
  };

  void push(std::string slot, std::string aux, std::string flow) {
    Stmt s{std::move(slot), std::move(aux), std::move(flow), std::move(pending_labels_)};
    pending_labels_.clear();
    stmts_.push_back(std::move(s));
  }

  void set_agu(int r, uint32_t a) {
    auto& known = agu_[static_cast<std::size_t>(r)];
    if (known == a) return;
    std::string aux = "AGU_SET a" + std::to_string(r) + ", " + std::to_string(a);
    // The aux op runs after the previous VLIW's operand reads, so it can ride along.
    if (pending_labels_.empty() && !stmts_.empty() && stmts_.back().aux.empty() && stmts_.back().flow.empty()) {
      stmts_.back().aux = aux;
    } else {
      push("", aux, "");
    }
    known = a;
  }

  void issue(int slot, const std::string& mnem, const std::string& dst, const std::string& a, const std::string& b) {
    std::string text = "slot" + std::to_string(slot) + ": " + mnem;
    std::string srcs;
    if (!a.empty()) {
      set_agu(0, addr(a));
      srcs = " m0";
    }
    if (!b.empty()) {
      set_agu(1, addr(b));
      srcs += ", m1";
    }
    if (!dst.empty()) set_agu(2, addr(dst));
    text += srcs;
    if (!dst.empty()) text += " -> m2";
    push(text, "", "");
    if (!a.empty()) agu_[0] = addr(a) + 1;
    if (!b.empty()) agu_[1] = addr(b) + 1;
    if (!dst.empty()) agu_[2] = addr(dst) + 1;
  }

  std::map<std::string, uint32_t> addr_;
  std::vector<std::pair<uint32_t, uint32_t>> const_words_;
  uint32_t next_var_ = kSweVarBase;
  std::vector<Stmt> stmts_;
  std::vector<std::string> pending_labels_;
  std::array<std::optional<uint32_t>, kAguCount> agu_{};
  int fmav_slot_ = 0;
  std::string entry_ = "0";
};

struct SweNames {
  std::string hl, hr, hul, hur, bl, br;
  std::string o_hl, o_hr, o_hul, o_hur;
};

void swe_add_wave(SweScript& s, const std::string& px, const SweNames& n, const std::string& wh,
                  const std::string& whu, const std::string& sp) {
  const std::string left = px + "_left", right = px + "_right", done = px + "_done";
  s.cmp(sp, "neg_zero_tol");
  s.branch_acc(left, "EQ", 1);
  s.cmp(sp, "zero_tol");
  s.branch_acc(right, "EQ", 2);
  s.fmav("MUL", px + ".hh", "half", wh);
  s.fmav("MUL", px + ".hhu", "half", whu);
  s.fmav("ADD", n.o_hl, n.o_hl, px + ".hh");
  s.fmav("ADD", n.o_hr, n.o_hr, px + ".hh");
  s.fmav("ADD", n.o_hul, n.o_hul, px + ".hhu");
  s.fmav("ADD", n.o_hur, n.o_hur, px + ".hhu");
  s.jump(done);
  s.label(left);
  s.fmav("ADD", n.o_hl, n.o_hl, wh);
  s.fmav("ADD", n.o_hul, n.o_hul, whu);
  s.jump(done);
  s.label(right);
  s.fmav("ADD", n.o_hr, n.o_hr, wh);
  s.fmav("ADD", n.o_hur, n.o_hur, whu);
  s.label(done);
}

// One solver body; the operation sequence matches the float oracle exactly.
void swe_body(SweScript& s, const std::string& px, const SweNames& n, bool hlle) {
  auto v = [&](const char* name) { return px + "." + name; };
  s.div(v("ul"), n.hul, n.hl);
  s.div(v("ur"), n.hur, n.hr);
  s.sqrt(v("sql"), n.hl);
  s.sqrt(v("sqr"), n.hr);
  s.fmav("ADD", v("hsum"), n.hl, n.hr);
  s.fmav("MUL", v("hroe"), "half", v("hsum"));
  s.fmav("MUL", v("ta"), v("ul"), v("sql"));
  s.fmav("MUL", v("tb"), v("ur"), v("sqr"));
  s.fmav("ADD", v("num"), v("ta"), v("tb"));
  s.fmav("ADD", v("den"), v("sql"), v("sqr"));
  s.div(v("uroe"), v("num"), v("den"));
  s.fmav("MUL", v("gh"), "g", v("hroe"));
  s.sqrt(v("croe"), v("gh"));
  const std::string roe1 = hlle ? v("roe1") : v("s1");
  const std::string roe2 = hlle ? v("roe2") : v("s2");
  s.fmav("SUB", roe1, v("uroe"), v("croe"));
  s.fmav("ADD", roe2, v("uroe"), v("croe"));
  if (hlle) {
    s.fmav("MUL", v("ghl"), "g", n.hl);
    s.sqrt(v("cl"), v("ghl"));
    s.fmav("MUL", v("ghr"), "g", n.hr);
    s.sqrt(v("cr"), v("ghr"));
    s.fmav("SUB", v("el"), v("ul"), v("cl"));
    s.util("MIN", v("s1"), v("el"), roe1);
    s.fmav("ADD", v("er"), v("ur"), v("cr"));
    s.util("MAX", v("s2"), v("er"), roe2);
  }

  s.fmav("SUB", v("dl"), v("s2"), v("s1"));
  s.div(v("inv"), "one", v("dl"));
  s.fmav("SUB", v("fdif0"), n.hur, n.hul);
  s.fmav("MUL", v("t1"), n.hur, v("ur"));
  s.fmav("MUL", v("t3"), n.hul, v("ul"));
  s.fmav("SUB", v("mom"), v("t1"), v("t3"));
  s.fmav("SUB", v("dh"), n.hr, n.hl);
  s.fmav("SUB", v("db"), n.br, n.bl);
  s.fmav("ADD", v("deta"), v("dh"), v("db"));
  s.fmav("ADD", v("hs"), n.hr, n.hl);
  s.fmav("MUL", v("hyd0"), "half_g", v("hs"));
  s.fmav("MUL", v("hyd"), v("hyd0"), v("deta"));
  s.fmav("ADD", v("fdif1s"), v("mom"), v("hyd"));
  s.fmav("MUL", v("inv_f1"), v("inv"), v("fdif1s"));
  s.fmav("MUL", v("a1"), v("inv"), v("s2"));
  s.fmav("MUL", v("a1b"), v("a1"), v("fdif0"));
  s.fmav("SUB", v("beta1"), v("a1b"), v("inv_f1"));
  s.fmav("MUL", v("c1"), v("inv"), v("s1"));
  s.fmav("MUL", v("c1b"), v("c1"), v("fdif0"));
  s.fmav("SUB", v("beta2"), v("inv_f1"), v("c1b"));
  s.fmav("MUL", v("w1hu"), v("beta1"), v("s1"));
  s.fmav("MUL", v("w2hu"), v("beta2"), v("s2"));
  swe_add_wave(s, px + "_w1", n, v("beta1"), v("w1hu"), v("s1"));
  swe_add_wave(s, px + "_w2", n, v("beta2"), v("w2hu"), v("s2"));
  s.util("ABS", v("as1"), v("s1"), "");
  s.util("ABS", v("as2"), v("s2"), "");
  s.util("MAX", "o_max", v("as1"), v("as2"));
}

const GeneratedProgram& swe_base() {
  static const GeneratedProgram base = [] {
    SweScript s;
    s.set_entry("start");
    s.label("start");
    s.cmp("h_l", "dry_tol");
    s.branch_acc("left_dry", "LT", 2);
    s.cmp("h_r", "dry_tol");
    s.branch_acc("hlle_r_begin", "LT", 2);

    s.label("fwave_begin");
    swe_body(s, "fw", {"h_l", "h_r", "hu_l", "hu_r", "b_l", "b_r", "o_h_l", "o_h_r", "o_hu_l", "o_hu_r"}, false);
    s.jump("end");

    // Right cell dry: mirror the left state into a reflecting wall.
    s.label("fwave_end");
    s.label("hlle_r_begin");
    s.copy("hr.h_r", "h_l");
    s.fmav("SUB", "hr.hu_r", "zero", "hu_l");
    s.copy("hr.b_r", "b_l");
    swe_body(s, "hr", {"h_l", "hr.h_r", "hu_l", "hr.hu_r", "b_l", "hr.b_r", "o_h_l", "hr.sink_h", "o_hu_l", "hr.sink_hu"},
             true);
    s.jump("end");

    s.label("hlle_r_end");
    s.label("left_dry");
    s.cmp("h_r", "dry_tol");
    s.branch_acc("end", "LT", 2);
    s.label("hlle_l_begin");
    s.copy("hl.h_l", "h_r");
    s.fmav("SUB", "hl.hu_l", "zero", "hu_r");
    s.copy("hl.b_l", "b_r");
    swe_body(s, "hl", {"hl.h_l", "h_r", "hl.hu_l", "hu_r", "hl.b_l", "b_r", "hl.sink_h", "o_h_r", "hl.sink_hu", "o_hu_r"},
             true);

    s.label("hlle_l_end");
    s.label("end");
    s.nop();
    return build_program(s.text());
  }();
  return base;
}

}  // namespace

GeneratedProgram gen_swe(const RiemannProblem& p) {
  GeneratedProgram g = swe_base();
  const float in[] = {p.h_l, p.h_r, p.hu_l, p.hu_r, p.b_l, p.b_r};
  for (uint32_t i = 0; i < 6; ++i) g.image.memory[kSweInputBase + i] = std::bit_cast<uint32_t>(in[i]);
  return g;
}

SweBodies swe_bodies(const GeneratedProgram& g) {
  return {{g.label("fwave_begin"), g.label("fwave_end")},
          {g.label("hlle_r_begin"), g.label("hlle_r_end")},
          {g.label("hlle_l_begin"), g.label("hlle_l_end")}};
}

FabricConfig swe_fabric() { return fabric_of(kSweKinds); }

// ---------------------------------------------------------------------------
// CNN

namespace {

constexpr uint32_t kCnnWeightBase = 16;

uint32_t weight_words(const ConvLayerProblem& p) { return (9 * p.c + 3) / 4; }

void check_cnn(const ConvLayerProblem& p) {
  if (p.h < 4 || p.w < 4) throw GenerationError("CNN image must be at least 4x4");
  if (p.c < 1) throw GenerationError("CNN needs at least one channel");
  if (std::size_t{p.w} * p.c > kMaxRowPixels) throw GenerationError("CNN row exceeds the line buffer");
  if (p.pixels.size() != std::size_t{p.h} * p.w * p.c) throw GenerationError("CNN pixel count mismatch");
  if (p.weights.size() != std::size_t{9} * p.c) throw GenerationError("CNN weight count mismatch");
  if (!(p.scale > 0.0f) || !std::isfinite(p.scale)) throw GenerationError("CNN scale must be positive and finite");
  check_count(p.c, "channel count");
  check_count(p.pooled_w(), "pooled width");
  check_count(p.pooled_h(), "pooled height");
  check_count(weight_words(p), "weight word count");
}

// One image row, pixels interleaved over channels.
std::vector<uint32_t> hwc_row(const ConvLayerProblem& p, uint32_t y) {
  std::vector<uint32_t> out;
  out.reserve(std::size_t{p.w} * p.c);
  for (uint32_t x = 0; x < p.w; ++x) {
    for (uint32_t c = 0; c < p.c; ++c) out.push_back(static_cast<uint8_t>(p.px(c, y, x)));
  }
  return out;
}

std::vector<uint32_t> cnn_memory(const ConvLayerProblem& p, uint32_t extra) {
  std::vector<uint32_t> mem(cnn_output_base(p) + extra, 0);
  mem[0] = std::bit_cast<uint32_t>(p.scale);
  mem[1] = static_cast<uint32_t>(int32_t{p.zero_point});
  mem[2] = p.w;
  mem[3] = p.c;
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    mem[kCnnWeightBase + k / 4] |= uint32_t{static_cast<uint8_t>(p.weights[k])} << (8 * (k % 4));
  }
  return mem;
}

// Rows r0, r0+1, r0+2 for each output row onto one MAC's three channels.
void append_rows(std::vector<StreamPayload>& s, const ConvLayerProblem& p, int slot, uint32_t first) {
  for (int ch = 0; ch < 3; ++ch) {
    auto& dst = s[static_cast<std::size_t>(slot * 3 + ch)];
    auto row = hwc_row(p, first + static_cast<uint32_t>(ch));
    dst.words.insert(dst.words.end(), row.begin(), row.end());
  }
}

// A CNN_MAC/CNN_SUM column schedule: loop over channels for window 2c, fold
// into SUM, loop for window 2c+1, fold, then pool and quantize. MAC issues
// every other cycle so its two-cycle latency never stalls the loop.
GeneratedProgram gen_cnn_two(const ConvLayerProblem& p) {
  const uint32_t nw = weight_words(p), ob = cnn_output_base(p);
  std::ostringstream os;
  emit_bindings(os, kCnnKinds);
  os << ".entry start\n"
        "start:\n"
        "    ctrl: AGU_SET a0, 2\n"
        "    ctrl: AGU_SET a1, 2\n"
        "    slot0: SET_GEOM m0, m0 | slot1: SET_GEOM m1, m1 | slot2: SETQ m2, m2 | slot3: SETQ m3, m3 | ctrl: AGU_SET a0, "
     << kCnnWeightBase << "\n"
     << "    ctrl: AGU_SET a1, " << kCnnWeightBase << "\n"
     << "    ctrl: PS_SET_DEST p3, wload\n"
        "wload:\n"
        "    slot0: LDW m0 | slot1: LDW m1 | ctrl: PS_CNT_INC p3 ; JMP_IF_CNT_LT p3, "
     << nw << "\n"
     << "    ctrl: AGU_SET a2, " << ob << "\n"
     << "    ctrl: PS_SET_DEST p0, row\n"
        "    ctrl: PS_SET_DEST p1, col\n"
        "    ctrl: PS_SET_DEST p2, loop_a\n"
        "    ctrl: PS_SET_DEST p3, loop_b\n"
        "row:\n"
        "col:\n"
        "    slot0: CLR | slot1: CLR | ctrl: PS_CNT_RESET p2\n"
        "loop_a:\n"
        "    slot0: MAC -> out | slot1: MAC -> out\n"
        "    ctrl: PS_CNT_INC p2 ; JMP_IF_CNT_LT p2, "
     << p.c << "\n"
     << "    slot0: CLR | slot1: CLR | slot2: ACC s0 | slot3: ACC s1 -> out | ctrl: PS_CNT_RESET p3\n"
        "loop_b:\n"
        "    slot0: MAC -> out | slot1: MAC -> out\n"
        "    ctrl: PS_CNT_INC p3 ; JMP_IF_CNT_LT p3, "
     << p.c << "\n"
     << "    slot2: ACC s0 | slot3: ACC s1 -> out\n"
        "    ctrl: PS_CNT_INC p1\n"
        "    slot2: QUANT s3 -> m2 | slot3: CLR | ctrl: JMP_IF_CNT_LT p1, "
     << p.pooled_w() << "\n"
     << "    slot0: NEXT_ROW | slot1: NEXT_ROW | ctrl: PS_CNT_RESET p1\n"
        "    ctrl: PS_CNT_INC p0 ; JMP_IF_CNT_LT p0, "
     << p.pooled_h() << "\n";
  emit_words(os, cnn_memory(p, p.pooled_h() * p.pooled_w()));

  std::vector<StreamPayload> s;
  for (int slot = 0; slot < 2; ++slot) {
    for (int ch = 0; ch < 3; ++ch) s.push_back({slot, ch, {}});
  }
  for (uint32_t r = 0; r < p.pooled_h(); ++r) {
    append_rows(s, p, 0, 2 * r);
    append_rows(s, p, 1, 2 * r + 1);
  }
  return build_program(os.str(), std::move(s));
}

// Single MAC/SUM pair: each output row takes two passes, the first parks
// the column maxima in scratch and the second folds them in and quantizes.
GeneratedProgram gen_cnn_one(const ConvLayerProblem& p) {
  const uint32_t nw = weight_words(p), ob = cnn_output_base(p);
  const uint32_t scratch = ob + p.pooled_h() * p.pooled_w();
  std::ostringstream os;
  emit_bindings(os, kCnn1Kinds);
  os << ".entry start\n"
        "start:\n"
        "    ctrl: AGU_SET a0, 2\n"
        "    slot0: SET_GEOM m0, m0 | slot2: SETQ m2, m2 | ctrl: AGU_SET a0, "
     << kCnnWeightBase << "\n"
     << "    ctrl: PS_SET_DEST p3, wload\n"
        "wload:\n"
        "    slot0: LDW m0 | ctrl: PS_CNT_INC p3 ; JMP_IF_CNT_LT p3, "
     << nw << "\n"
     << "    ctrl: AGU_SET a2, " << ob << "\n"
     << "    ctrl: PS_SET_DEST p0, row\n";
  for (int pass = 1; pass <= 2; ++pass) {
    const std::string sfx = pass == 1 ? "" : "2";
    if (pass == 1) os << "row:\n";
    os << "    ctrl: PS_SET_DEST p1, col" << sfx << "\n"
       << "    ctrl: PS_SET_DEST p2, loop_a" << sfx << "\n"
       << "    ctrl: PS_SET_DEST p3, loop_b" << sfx << "\n"
       << "    ctrl: AGU_SET a3, " << scratch << "\n"
       << "col" << sfx << ":\n"
       << "    slot0: CLR | ctrl: PS_CNT_RESET p2\n"
       << "loop_a" << sfx << ":\n"
       << "    slot0: MAC -> out\n"
       << "    ctrl: PS_CNT_INC p2 ; JMP_IF_CNT_LT p2, " << p.c << "\n"
       << "    slot0: CLR | slot2: ACC s0 | ctrl: PS_CNT_RESET p3\n"
       << "loop_b" << sfx << ":\n"
       << "    slot0: MAC -> out\n"
       << "    ctrl: PS_CNT_INC p3 ; JMP_IF_CNT_LT p3, " << p.c << "\n"
       << "    slot2: ACC s0\n"
       << "    ctrl: PS_CNT_INC p1\n";
    if (pass == 1) {
      os << "    slot2: TAKE -> m3 | ctrl: JMP_IF_CNT_LT p1, " << p.pooled_w() << "\n";
    } else {
      os << "    slot2: QUANT m3 -> m2 | ctrl: JMP_IF_CNT_LT p1, " << p.pooled_w() << "\n";
    }
    os << "    slot0: NEXT_ROW | ctrl: PS_CNT_RESET p1\n";
  }
  os << "    ctrl: PS_CNT_INC p0 ; JMP_IF_CNT_LT p0, " << p.pooled_h() << "\n";
  emit_words(os, cnn_memory(p, p.pooled_h() * p.pooled_w() + p.pooled_w()));

  std::vector<StreamPayload> s = {{0, 0, {}}, {0, 1, {}}, {0, 2, {}}};
  for (uint32_t r = 0; r < p.pooled_h(); ++r) {
    append_rows(s, p, 0, 2 * r);
    append_rows(s, p, 0, 2 * r + 1);
  }
  return build_program(os.str(), std::move(s));
}

}  // namespace

uint32_t cnn_output_base(const ConvLayerProblem& p) { return kCnnWeightBase + weight_words(p); }

GeneratedProgram gen_cnn(const ConvLayerProblem& p, CnnVariant variant) {
  check_cnn(p);
  return variant == CnnVariant::TwoMac ? gen_cnn_two(p) : gen_cnn_one(p);
}

FabricConfig cnn_fabric(CnnVariant variant) { return fabric_of(variant == CnnVariant::TwoMac ? kCnnKinds : kCnn1Kinds); }

// ---------------------------------------------------------------------------
// SHA3-256

namespace {

uint32_t block_count(std::size_t len) { return static_cast<uint32_t>(len / kSha3Rate + 1); }

// Absorb/permute loop for the given BUFF/COMP pairs (pair k uses slots 2k, 2k+1).
void sha_blocks(std::ostringstream& os, const std::vector<int>& pairs, uint32_t blocks, const std::string& px) {
  auto clause = [&](const char* fmt_buff, const char* fmt_comp) {
    std::string out;
    for (int k : pairs) {
      const int b = 2 * k, c = 2 * k + 1;
      std::string sb = fmt_buff, sc = fmt_comp;
      if (!sb.empty()) out += (out.empty() ? "" : " | ") + ("slot" + std::to_string(b) + ": " + sb);
      if (!sc.empty()) {
        auto pos = sc.find("s#");
        if (pos != std::string::npos) sc.replace(pos, 2, "s" + std::to_string(b));
        out += (out.empty() ? "" : " | ") + ("slot" + std::to_string(c) + ": " + sc);
      }
    }
    return out;
  };
  os << "    ctrl: PS_SET_DEST p0, " << px << "block\n"
     << "    ctrl: PS_SET_DEST p1, " << px << "absorb\n"
     << "    ctrl: PS_SET_DEST p2, " << px << "rounds\n"
     << "    ctrl: PS_CNT_RESET p0\n"
     << px << "block:\n"
     << "    " << clause("POP -> out", "") << " | ctrl: PS_CNT_RESET p1\n"
     << px << "absorb:\n"
     << "    " << clause("POP -> out", "ABSORB s#") << " | ctrl: PS_CNT_INC p1 ; JMP_IF_CNT_LT p1, "
     << kSha3RateWords - 1 << "\n"
     << "    " << clause("", "ABSORB s#") << " | ctrl: PS_CNT_RESET p2\n"
     << px << "rounds:\n"
     << "    " << clause("", "ROUND") << "\n"
     << "    ctrl: PS_CNT_INC p2 ; JMP_IF_CNT_LT p2, " << kKeccakRounds << "\n"
     << "    ctrl: PS_CNT_INC p0 ; JMP_IF_CNT_LT p0, " << blocks << "\n";
}

GeneratedProgram gen_sha(const std::vector<std::span<const uint8_t>>& msgs) {
  std::vector<uint32_t> blocks;
  for (auto m : msgs) {
    blocks.push_back(block_count(m.size()));
    check_count(blocks.back(), "SHA-3 block count");
  }
  std::ostringstream os;
  emit_bindings(os, kShaKinds);
  os << ".entry start\n"
        "start:\n"
        "    ctrl: AGU_SET a1, "
     << kShaDigestB << "\n";
  std::vector<int> pairs;
  for (std::size_t k = 0; k < msgs.size(); ++k) pairs.push_back(static_cast<int>(k));
  os << "    slot1: INIT" << (msgs.size() > 1 ? " | slot3: INIT" : "") << '\n';

  const uint32_t common = *std::min_element(blocks.begin(), blocks.end());
  sha_blocks(os, pairs, common, "");
  if (msgs.size() > 1 && blocks[0] != blocks[1]) {
    const int longer = blocks[0] > blocks[1] ? 0 : 1;
    sha_blocks(os, {longer}, blocks[static_cast<std::size_t>(longer)] - common, "tail_");
  }
  for (int i = 0; i < 8; ++i) {
    os << "    slot1: SQUEEZE -> m0" << (msgs.size() > 1 ? " | slot3: SQUEEZE -> m1" : "") << '\n';
  }
  emit_words(os, std::vector<uint32_t>(16, 0));

  std::vector<StreamPayload> s;
  for (std::size_t k = 0; k < msgs.size(); ++k) s.push_back({static_cast<int>(2 * k), 0, sha3_stream_words(msgs[k])});
  return build_program(os.str(), std::move(s));
}

}  // namespace

GeneratedProgram gen_sha3(std::span<const uint8_t> msg) { return gen_sha({msg}); }

GeneratedProgram gen_sha3_dual(std::span<const uint8_t> a, std::span<const uint8_t> b) { return gen_sha({a, b}); }

FabricConfig sha3_fabric() { return fabric_of(kShaKinds); }

}  // namespace refab::bench
