#include "doctest.h"

#include <algorithm>

#include "oracles/testkit.hpp"
#include "refab/assembler.hpp"
#include "refab/bench/generators.hpp"
#include "refab/bench/harness.hpp"

using namespace refab;

namespace {

bool has_diag(const AssemblyResult& r, Severity sev, const std::string& text, int line = 0) {
  return std::any_of(r.diagnostics.begin(), r.diagnostics.end(), [&](const Diagnostic& d) {
    return d.severity == sev && d.message.find(text) != std::string::npos && (line == 0 || d.line == line);
  });
}

}  // namespace

TEST_CASE("one NO_JMP statement") {
  auto r = assemble("ctrl: NO_JMP\n");
  REQUIRE(r.ok());
  REQUIRE(r.image->vliw_count() == 1);
  CHECK(r.image->words[0] == VliwWord{});
  CHECK(r.diagnostics.empty());
}

TEST_CASE("labels resolve to statement indices") {
  auto r = assemble(
      "ctrl: NO_JMP\n"
      "ctrl: NO_JMP\n"
      "L0: ctrl: NO_JMP\n"
      "ctrl: PS_SET_DEST p0, L0 ; ALW_JMP p0\n");
  REQUIRE(r.ok());
  Vliw v = decode_vliw(r.image->words[3]);
  CHECK(v.aux.opcode == AuxOpcode::PsSetDest);
  CHECK(v.aux.operand == 2);
  CHECK(*r.label("L0") == 2);
}

TEST_CASE("label on its own line binds to the next statement") {
  auto r = assemble("ctrl: NO_JMP\nhere:\n\n  ctrl: PS_SET_DEST p1, here\n");
  REQUIRE(r.ok());
  CHECK(*r.label("here") == 1);
}

TEST_CASE("jumping through an unset parameter set warns") {
  auto r = assemble("ctrl: NO_JMP\nctrl: ALW_JMP p0\n");
  REQUIRE(r.ok());
  CHECK(has_diag(r, Severity::Warning, "parameter set 0 destination never initialized", 2));
}

TEST_CASE("errors carry the offending line") {
  auto undefined = assemble("ctrl: NO_JMP\nctrl: PS_SET_DEST p0, nowhere\n");
  CHECK_FALSE(undefined.ok());
  CHECK(has_diag(undefined, Severity::Error, "undefined label", 2));

  auto dup = assemble("a: ctrl: NO_JMP\na: ctrl: NO_JMP\n");
  CHECK(has_diag(dup, Severity::Error, "duplicate label", 2));

  auto mnem = assemble(".slotbind 0 FMAV\nslot0: FROB m0\n");
  CHECK(has_diag(mnem, Severity::Error, "unknown mnemonic", 2));

  auto ps = assemble("ctrl: PS_CNT_INC p5\n");
  CHECK(has_diag(ps, Severity::Error, "max 3", 1));

  auto range = assemble("ctrl: JMP_IF_CNT_EQ p0, 4096\n");
  CHECK(has_diag(range, Severity::Error, "exceeds 12 bits", 1));

  auto mask = assemble("ctrl: JMP_IF_ACC_EQ p0, 1, {}\n");
  CHECK_FALSE(mask.ok());

  auto ctrl = assemble("# header\n\nctrl: HALT\n");
  CHECK(has_diag(ctrl, Severity::Error, "unknown controller mnemonic", 3));
}

TEST_CASE("static destination out of range") {
  auto r = assemble("ctrl: PS_SET_DEST p0, 7\nctrl: NO_JMP\nctrl: NO_JMP\n");
  CHECK(has_diag(r, Severity::Error, "static jump destination out of range", 1));
}

TEST_CASE("CRLF input and hex literals") {
  auto r = assemble("ctrl: AGU_SET a3, 0x10\r\nctrl: NO_JMP\r\n");
  REQUIRE(r.ok());
  CHECK(decode_vliw(r.image->words[0]).aux.operand == 16);
}

TEST_CASE("slot clauses, immediates and data directives") {
  auto r = assemble(
      ".slotbind 0 FMAV\n.slotbind 4 UTIL\n"
      ".word 5 0x10\n.org 4\n.float 1.5\n"
      "slot0: ADD m1, $0x23 -> m2 | slot4: CMP s0, s1 | ctrl: AGU_SET a1, 0\n");
  REQUIRE(r.ok());
  const ProgramImage& img = *r.image;
  CHECK(img.memory == std::vector<uint32_t>{5, 16, 0, 0, 0x3FC00000});
  Vliw v = decode_vliw(img.words[0]);
  CHECK(v.slots[0].op == opc::fmav::kAdd);
  CHECK(v.slots[0].src_a == SrcSel{SrcKind::MemAgu, 1});
  CHECK(immediate_value(v.slots[0].src_b, v.slots[0].imm_nibble) == 0x23);
  CHECK(v.slots[0].dst == DstSel{DstKind::MemAgu, 2});
  CHECK(v.slots[4].op == opc::util::kCmp);
  CHECK(v.slots[4].dst.kind == DstKind::None);
}

TEST_CASE("identical source yields identical bytes") {
  auto g = bench::gen_sift(bench::random_sift(20, 4));
  auto a = assemble(g.source), b = assemble(g.source);
  CHECK(serialize_image(*a.image) == serialize_image(*b.image));
}

TEST_CASE("disassembly of a single NOP is one statement") {
  ProgramImage img;
  img.words.push_back(VliwWord{});
  std::string text = disassemble(img);
  int statements = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.find("ctrl:") != std::string::npos || line.find("slot") == 4) ++statements;
  }
  CHECK(statements == 1);
  CHECK(assemble(text).image->words == img.words);
}

TEST_CASE("disassembly rejects bad words with the vliw index") {
  ProgramImage img;
  img.words.resize(3);
  write_bits(img.words[2], 166, 3, 7);
  try {
    disassemble(img);
    FAIL("disassembled");
  } catch (const DisassemblyError& e) {
    CHECK(e.vliw_index() == 2);
  }
}

TEST_CASE("disassemble then assemble is bit identical") {
  using namespace bench;
  std::vector<GeneratedProgram> progs = {
      gen_sift(random_sift(9, 1)), gen_swe(random_swe(1, 1)[0]), gen_cnn(random_cnn(6, 10, 3, 1)),
      gen_cnn(random_cnn(6, 6, 2, 2), CnnVariant::OneMac), gen_sha3(std::vector<uint8_t>{1, 2, 3}),
  };
  for (const auto& g : progs) {
    auto again = assemble(disassemble(g.image));
    REQUIRE(again.ok());
    CHECK(serialize_image(*again.image) == serialize_image(g.image));
  }
}
