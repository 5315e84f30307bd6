#include "refab/assembler.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <iomanip>
#include <set>
#include <sstream>

namespace refab {

std::optional<uint16_t> AssemblyResult::label(const std::string& name) const {
  auto it = labels.find(name);
  if (it == labels.end()) return std::nullopt;
  return it->second;
}

std::string format_diagnostic(const Diagnostic& d, std::string_view file) {
  std::ostringstream os;
  os << file << ':' << d.line << ": " << (d.severity == Severity::Error ? "error" : "warning") << ": "
     << d.message;
  return os.str();
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

bool is_clause_head(std::string_view name) {
  return name == "ctrl" || (name.size() == 5 && name.substr(0, 4) == "slot" && name[4] >= '0' && name[4] <= '4');
}

std::optional<int64_t> parse_int(std::string_view s) {
  s = trim(s);
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  if (s.empty()) return std::nullopt;
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || p != s.data() + s.size() || v > (uint64_t{1} << 40)) return std::nullopt;
  return neg ? -static_cast<int64_t>(v) : static_cast<int64_t>(v);
}

// Splits on `sep` outside of braces.
std::vector<std::string_view> split_args(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '{') ++depth;
    if (s[i] == '}') --depth;
    if (s[i] == sep && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

struct Clause {
  std::string head;
  std::string_view body;
};

// Finds `slotN:` / `ctrl:` heads at token boundaries and slices the text between them.
std::vector<Clause> split_clauses(std::string_view text, std::string& error) {
  struct Head {
    std::size_t begin, body;
    std::string name;
  };
  std::vector<Head> heads;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i > 0 && is_ident_char(text[i - 1])) continue;
    if (!is_ident_start(text[i])) continue;
    std::size_t j = i;
    while (j < text.size() && is_ident_char(text[j])) ++j;
    std::string_view name = text.substr(i, j - i);
    std::size_t k = j;
    while (k < text.size() && text[k] == ' ') ++k;
    if (k < text.size() && text[k] == ':' && is_clause_head(name)) {
      heads.push_back({i, k + 1, std::string(name)});
    }
    i = j;
  }
  std::vector<Clause> out;
  if (heads.empty() || !trim(text.substr(0, heads[0].begin)).empty()) {
    error = "expected a slotN: or ctrl: clause";
    return {};
  }
  for (std::size_t h = 0; h < heads.size(); ++h) {
    std::size_t end = h + 1 < heads.size() ? heads[h + 1].begin : text.size();
    std::string_view body = trim(text.substr(heads[h].body, end - heads[h].body));
    while (!body.empty() && body.back() == '|') body = trim(body.substr(0, body.size() - 1));
    out.push_back({heads[h].name, body});
  }
  return out;
}

struct PendingStatement {
  int line;
  std::string text;
};

struct FlowSpec {
  FlowOpcode opcode;
  std::string_view name;
};

constexpr FlowSpec kFlowOps[] = {
    {FlowOpcode::NoJmp, "NO_JMP"},
    {FlowOpcode::AlwJmp, "ALW_JMP"},
    {FlowOpcode::JmpIfCntEq, "JMP_IF_CNT_EQ"},
    {FlowOpcode::JmpIfCntNeq, "JMP_IF_CNT_NEQ"},
    {FlowOpcode::JmpIfCntLt, "JMP_IF_CNT_LT"},
    {FlowOpcode::JmpIfCntGt, "JMP_IF_CNT_GT"},
    {FlowOpcode::JmpIfAccEq, "JMP_IF_ACC_EQ"},
    {FlowOpcode::JmpIfAccNeq, "JMP_IF_ACC_NEQ"},
    {FlowOpcode::JmpIfAccLt, "JMP_IF_ACC_LT"},
    {FlowOpcode::JmpIfAccGt, "JMP_IF_ACC_GT"},
    {FlowOpcode::TrapAlw, "TRAP_ALW"},
    {FlowOpcode::TrapIfAccEq, "TRAP_IF_ACC_EQ"},
    {FlowOpcode::TrapIfAccNeq, "TRAP_IF_ACC_NEQ"},
    {FlowOpcode::TrapIfAccLt, "TRAP_IF_ACC_LT"},
    {FlowOpcode::TrapIfAccGt, "TRAP_IF_ACC_GT"},
};

constexpr AuxOpcode kAuxOps[] = {AuxOpcode::Nop,        AuxOpcode::PsSetDest, AuxOpcode::PsCntSet,
                                 AuxOpcode::PsCntInc,   AuxOpcode::PsCntReset, AuxOpcode::AguSet,
                                 AuxOpcode::AguAdd};

class Assembler {
 public:
  explicit Assembler(std::string_view src) : src_(src) {}

  AssemblyResult run() {
    first_pass();
    if (statements_.size() > kMaxVliws) {
      error(statements_[kMaxVliws].line, "program exceeds 4096 VLIWs");
    }
    for (auto& [name, index] : labels_) {
      if (index >= kMaxVliws) error(label_lines_[name], "label '" + name + "' index exceeds 4095");
    }
    std::vector<Vliw> vliws;
    vliws.reserve(statements_.size());
    for (std::size_t i = 0; i < statements_.size(); ++i) vliws.push_back(parse_statement(statements_[i]));
    resolve_entry();
    check_uninitialized_sets();

    result_.labels = labels_;
    for (const auto& st : statements_) result_.vliw_lines.push_back(st.line);
    if (has_error_) return std::move(result_);

    ProgramImage image;
    image.slot_bindings = bindings_;
    image.entry_pc = entry_;
    image.memory = memory_;
    for (std::size_t i = 0; i < vliws.size(); ++i) {
      try {
        image.words.push_back(encode_vliw(vliws[i]));
      } catch (const EncodeError& e) {
        error(statements_[i].line, std::string("encoding: ") + e.what());
      }
    }
    if (!has_error_) {
      for (const auto& msg : validate_program(image)) error(line_for(msg), msg);
    }
    if (!has_error_) result_.image = std::move(image);
    return std::move(result_);
  }

 private:
  void error(int line, std::string msg) {
    has_error_ = true;
    result_.diagnostics.push_back({Severity::Error, line, std::move(msg)});
  }
  void warning(int line, std::string msg) {
    result_.diagnostics.push_back({Severity::Warning, line, std::move(msg)});
  }

  int line_for(const std::string& validator_msg) const {
    unsigned idx = 0;
    if (std::sscanf(validator_msg.c_str(), "vliw %u:", &idx) == 1 && idx < statements_.size()) {
      return statements_[idx].line;
    }
    return entry_line_ > 0 ? entry_line_ : 1;
  }

  void first_pass() {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= src_.size()) {
      std::size_t nl = src_.find('\n', pos);
      if (nl == std::string_view::npos) nl = src_.size();
      std::string_view raw = src_.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
      std::string_view text = trim(raw);
      if (text.empty()) {
        if (nl == src_.size()) break;
        continue;
      }
      if (text[0] == '.') {
        directive(line_no, text);
      } else {
        // leading labels
        while (true) {
          std::size_t j = 0;
          while (j < text.size() && is_ident_char(text[j])) ++j;
          std::size_t k = j;
          while (k < text.size() && text[k] == ' ') ++k;
          if (j == 0 || k >= text.size() || text[k] != ':') break;
          std::string name(text.substr(0, j));
          if (is_clause_head(name)) break;
          if (!is_identifier(name)) {
            error(line_no, "invalid label '" + name + "'");
          } else if (labels_.count(name)) {
            error(line_no, "duplicate label '" + name + "'");
          } else {
            labels_[name] = static_cast<uint16_t>(std::min<std::size_t>(statements_.size(), 0xFFFF));
            label_lines_[name] = line_no;
          }
          text = trim(text.substr(k + 1));
        }
        if (!text.empty()) statements_.push_back({line_no, std::string(text)});
      }
      if (nl == src_.size()) break;
    }
    for (auto& [name, index] : labels_) {
      if (index >= statements_.size() && index < kMaxVliws) {
        error(label_lines_[name], "label '" + name + "' does not precede a statement");
      }
    }
  }

  void directive(int line, std::string_view text) {
    auto toks = split_ws(text);
    std::string_view name = toks[0];
    if (name == ".slotbind") {
      if (toks.size() != 3) return error(line, ".slotbind expects a slot index and a kernel kind");
      auto idx = parse_int(toks[1]);
      if (!idx || *idx < 0 || *idx >= kSlotCount) return error(line, "slot index out of range in .slotbind");
      auto kind = kind_from_name(toks[2]);
      if (!kind) return error(line, "unknown kernel kind '" + std::string(toks[2]) + "'");
      if (bound_[static_cast<std::size_t>(*idx)]) warning(line, "slot " + std::to_string(*idx) + " rebound");
      bound_[static_cast<std::size_t>(*idx)] = true;
      bindings_[static_cast<std::size_t>(*idx)] = *kind;
    } else if (name == ".entry") {
      if (toks.size() != 2) return error(line, ".entry expects one label or index");
      entry_text_ = std::string(toks[1]);
      entry_line_ = line;
    } else if (name == ".word") {
      if (toks.size() < 2) return error(line, ".word expects at least one value");
      for (std::size_t i = 1; i < toks.size(); ++i) {
        auto v = parse_int(toks[i]);
        if (!v || *v < INT32_MIN || *v > UINT32_MAX) return error(line, "bad .word value '" + std::string(toks[i]) + "'");
        memory_.push_back(static_cast<uint32_t>(*v));
      }
    } else if (name == ".float") {
      if (toks.size() < 2) return error(line, ".float expects at least one value");
      for (std::size_t i = 1; i < toks.size(); ++i) {
        std::string tok(toks[i]);
        char* end = nullptr;
        float f = std::strtof(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0') return error(line, "bad .float value '" + tok + "'");
        memory_.push_back(std::bit_cast<uint32_t>(f));
      }
    } else if (name == ".org") {
      auto v = toks.size() == 2 ? parse_int(toks[1]) : std::nullopt;
      if (!v || *v < 0 || *v > (1 << 26)) return error(line, ".org expects a word address");
      if (static_cast<std::size_t>(*v) < memory_.size()) return error(line, ".org moves backwards");
      memory_.resize(static_cast<std::size_t>(*v), 0);
    } else {
      error(line, "unknown directive '" + std::string(name) + "'");
    }
  }

  void resolve_entry() {
    if (statements_.empty()) {
      error(1, "program contains no statements");
      return;
    }
    if (entry_text_.empty()) return;
    if (auto n = parse_int(entry_text_)) {
      if (*n < 0 || static_cast<std::size_t>(*n) >= statements_.size()) {
        return error(entry_line_, "entry out of range");
      }
      entry_ = static_cast<uint16_t>(*n);
    } else if (auto it = labels_.find(entry_text_); it != labels_.end()) {
      entry_ = it->second;
    } else {
      error(entry_line_, "undefined label '" + entry_text_ + "'");
    }
  }

  void check_uninitialized_sets() {
    for (const auto& [set, line] : jump_uses_) {
      if (!dest_sets_.count(set)) {
        warning(line, "parameter set " + std::to_string(set) + " destination never initialized");
      }
    }
  }

  Vliw parse_statement(const PendingStatement& st) {
    Vliw v;
    std::string err;
    std::string text = st.text;
    auto clauses = split_clauses(text, err);
    if (!err.empty()) {
      error(st.line, err);
      return v;
    }
    std::set<std::string> seen;
    for (const auto& c : clauses) {
      if (!seen.insert(c.head).second) {
        error(st.line, "duplicate " + c.head + " clause");
        continue;
      }
      if (c.head == "ctrl") {
        parse_ctrl(st.line, c.body, v);
      } else {
        int slot = c.head[4] - '0';
        parse_slot(st.line, slot, c.body, v.slots[static_cast<std::size_t>(slot)]);
      }
    }
    return v;
  }

  bool parse_src(int line, std::string_view tok, SrcSel& sel, std::optional<uint8_t>& imm_low) {
    if (tok == "_") {
      sel = {};
      return true;
    }
    if (tok.size() >= 2 && (tok[0] == 'm' || tok[0] == 's')) {
      auto idx = parse_int(tok.substr(1));
      int limit = tok[0] == 'm' ? kAguCount : kSlotCount;
      if (idx && *idx >= 0 && *idx < limit) {
        sel = {tok[0] == 'm' ? SrcKind::MemAgu : SrcKind::SlotOut, static_cast<uint8_t>(*idx)};
        return true;
      }
    }
    if (tok.size() >= 2 && tok[0] == '$') {
      auto val = parse_int(tok.substr(1));
      if (!val || *val < 0 || *val > 255) {
        error(line, "immediate '" + std::string(tok) + "' outside 0..255");
        return false;
      }
      uint8_t low = static_cast<uint8_t>(*val & 0xF);
      if (imm_low && *imm_low != low) {
        error(line, "immediates in one slot must share their low nibble");
        return false;
      }
      imm_low = low;
      sel = {SrcKind::Imm, static_cast<uint8_t>(*val >> 4)};
      return true;
    }
    error(line, "bad operand '" + std::string(tok) + "'");
    return false;
  }

  void parse_slot(int line, int slot, std::string_view body, SlotInstr& out) {
    const std::string where = "slot" + std::to_string(slot) + ": ";
    std::string_view lhs = body;
    std::string_view dst_text;
    if (auto arrow = body.find("->"); arrow != std::string_view::npos) {
      lhs = trim(body.substr(0, arrow));
      dst_text = trim(body.substr(arrow + 2));
      if (dst_text.empty()) return error(line, where + "missing destination after '->'");
    }
    std::size_t sp = 0;
    while (sp < lhs.size() && !std::isspace(static_cast<unsigned char>(lhs[sp]))) ++sp;
    std::string_view mnem = lhs.substr(0, sp);
    auto args = split_args(trim(lhs.substr(sp)), ',');
    if (mnem.empty()) return error(line, where + "missing mnemonic");

    const KernelKind kind = bindings_[static_cast<std::size_t>(slot)];
    const OpcodeInfo* info = find_opcode(kind, mnem);
    if (!info) {
      return error(line, where + "unknown mnemonic '" + std::string(mnem) + "' for " + std::string(kind_name(kind)));
    }
    out.op = info->code;
    if (out.op == 0) {
      if (!args.empty() || !dst_text.empty()) error(line, where + "NOP takes no operands");
      return;
    }
    if (args.size() > 2) return error(line, where + "at most two source operands");
    std::optional<uint8_t> imm_low;
    if (args.size() >= 1 && !parse_src(line, args[0], out.src_a, imm_low)) return;
    if (args.size() == 2 && !parse_src(line, args[1], out.src_b, imm_low)) return;
    out.imm_nibble = imm_low.value_or(0);
    if (!dst_text.empty()) {
      if (dst_text == "out") {
        out.dst = {DstKind::OutOnly, 0};
      } else if (dst_text.size() >= 2 && dst_text[0] == 'm') {
        auto idx = parse_int(dst_text.substr(1));
        if (!idx || *idx < 0 || *idx >= kAguCount) return error(line, where + "bad destination '" + std::string(dst_text) + "'");
        out.dst = {DstKind::MemAgu, static_cast<uint8_t>(*idx)};
      } else {
        return error(line, where + "bad destination '" + std::string(dst_text) + "'");
      }
    }
  }

  std::optional<uint8_t> parse_reg(int line, std::string_view tok, char prefix, int limit, const std::string& what) {
    if (tok.size() >= 2 && tok[0] == prefix) {
      auto idx = parse_int(tok.substr(1));
      if (idx && *idx >= 0 && *idx < limit) return static_cast<uint8_t>(*idx);
    }
    error(line, "expected " + what + ", got '" + std::string(tok) + "'");
    return std::nullopt;
  }

  std::optional<uint16_t> parse_u12(int line, std::string_view tok, const std::string& what) {
    auto v = parse_int(tok);
    if (!v) {
      error(line, "expected a number for " + what + ", got '" + std::string(tok) + "'");
      return std::nullopt;
    }
    if (*v < 0 || *v > kMax12) {
      error(line, what + " " + std::to_string(*v) + " exceeds 12 bits");
      return std::nullopt;
    }
    return static_cast<uint16_t>(*v);
  }

  std::optional<uint8_t> parse_mask(int line, std::string_view tok) {
    if (tok.size() < 2 || tok.front() != '{' || tok.back() != '}') {
      error(line, "expected slot mask like {0,2}, got '" + std::string(tok) + "'");
      return std::nullopt;
    }
    uint8_t mask = 0;
    for (auto part : split_args(tok.substr(1, tok.size() - 2), ',')) {
      auto s = parse_int(part);
      if (!s || *s < 0 || *s >= kSlotCount) {
        error(line, "bad slot in mask '" + std::string(part) + "'");
        return std::nullopt;
      }
      mask = static_cast<uint8_t>(mask | (1u << *s));
    }
    if (mask == 0) {
      error(line, "ACC-conditioned op needs a nonempty slot mask");
      return std::nullopt;
    }
    return mask;
  }

  void parse_ctrl(int line, std::string_view body, Vliw& v) {
    bool have_aux = false, have_flow = false;
    for (auto part : split_args(body, ';')) {
      if (part.empty()) continue;
      std::size_t sp = 0;
      while (sp < part.size() && !std::isspace(static_cast<unsigned char>(part[sp]))) ++sp;
      std::string_view mnem = part.substr(0, sp);
      auto args = split_args(trim(part.substr(sp)), ',');

      const FlowSpec* flow = nullptr;
      for (const auto& f : kFlowOps) {
        if (f.name == mnem) flow = &f;
      }
      if (flow) {
        if (have_flow) return error(line, "more than one flow op in ctrl clause");
        have_flow = true;
        parse_flow(line, flow->opcode, args, v.flow);
        continue;
      }
      std::optional<AuxOpcode> aux;
      for (auto a : kAuxOps) {
        if (aux_mnemonic(a) == mnem) aux = a;
      }
      if (!aux) return error(line, "unknown controller mnemonic '" + std::string(mnem) + "'");
      if (have_aux) return error(line, "more than one aux op in ctrl clause");
      have_aux = true;
      parse_aux(line, *aux, args, v.aux);
    }
  }

  bool expect_args(int line, std::string_view mnem, const std::vector<std::string_view>& args, std::size_t n) {
    if (args.size() == n) return true;
    error(line, std::string(mnem) + " expects " + std::to_string(n) + " operand(s)");
    return false;
  }

  void parse_flow(int line, FlowOpcode op, const std::vector<std::string_view>& args, FlowOp& f) {
    f.opcode = op;
    std::string_view mnem = flow_mnemonic(op);
    auto set_of = [&](std::string_view tok) -> bool {
      auto set = parse_reg(line, tok, 'p', kParamSetCount, "parameter set p0..p3");
      if (!set) return false;
      f.param_set = *set;
      jump_uses_.emplace_back(*set, line);
      return true;
    };
    if (op == FlowOpcode::NoJmp) {
      expect_args(line, mnem, args, 0);
    } else if (op == FlowOpcode::AlwJmp) {
      if (expect_args(line, mnem, args, 1)) set_of(args[0]);
    } else if (is_cnt_conditioned(op)) {
      if (!expect_args(line, mnem, args, 2) || !set_of(args[0])) return;
      if (auto n = parse_u12(line, args[1], "operand")) f.operand = *n;
    } else if (is_jump(op)) {
      if (!expect_args(line, mnem, args, 3) || !set_of(args[0])) return;
      if (auto n = parse_u12(line, args[1], "operand")) f.operand = *n;
      if (auto m = parse_mask(line, args[2])) f.acc_mask = *m;
    } else if (op == FlowOpcode::TrapAlw) {
      if (!expect_args(line, mnem, args, 1)) return;
      auto t = parse_int(args[0]);
      if (!t || *t < 0 || *t > 7) return error(line, "trap value must be 0..7");
      f.trap_value = static_cast<uint8_t>(*t);
    } else {
      if (!expect_args(line, mnem, args, 3)) return;
      if (auto n = parse_u12(line, args[0], "operand")) f.operand = *n;
      if (auto m = parse_mask(line, args[1])) f.acc_mask = *m;
      auto t = parse_int(args[2]);
      if (!t || *t < 0 || *t > 7) return error(line, "trap value must be 0..7");
      f.trap_value = static_cast<uint8_t>(*t);
    }
  }

  void parse_aux(int line, AuxOpcode op, const std::vector<std::string_view>& args, AuxOp& a) {
    a.opcode = op;
    std::string_view mnem = aux_mnemonic(op);
    if (op == AuxOpcode::Nop) {
      expect_args(line, mnem, args, 0);
      return;
    }
    const bool ps = is_param_set_op(op);
    const bool takes_operand = op != AuxOpcode::PsCntInc && op != AuxOpcode::PsCntReset;
    if (!expect_args(line, mnem, args, takes_operand ? 2 : 1)) return;
    if (ps) {
      // p4..p7 parse so the range error below can name them
      auto t = parse_reg(line, args[0], 'p', 8, "parameter set");
      if (!t) return;
      if (*t >= kParamSetCount) return error(line, std::string(mnem) + " targets parameter set " + std::to_string(*t) + " (max 3)");
      a.target = *t;
    } else {
      auto t = parse_reg(line, args[0], 'a', kAguCount, "AGU register a0..a7");
      if (!t) return;
      a.target = *t;
    }
    if (!takes_operand) return;
    if (op == AuxOpcode::PsSetDest) {
      dest_sets_.insert(a.target);
      if (is_identifier(args[1])) {
        auto it = labels_.find(std::string(args[1]));
        if (it == labels_.end()) return error(line, "undefined label '" + std::string(args[1]) + "'");
        a.operand = it->second;
        return;
      }
      auto n = parse_u12(line, args[1], "destination");
      if (!n) return;
      if (*n >= statements_.size()) return error(line, "static jump destination out of range");
      a.operand = *n;
      return;
    }
    if (auto n = parse_u12(line, args[1], "operand")) a.operand = *n;
  }

  std::string_view src_;
  AssemblyResult result_;
  bool has_error_ = false;
  std::vector<PendingStatement> statements_;
  std::map<std::string, uint16_t> labels_;
  std::map<std::string, int> label_lines_;
  std::array<KernelKind, kSlotCount> bindings_{};
  std::array<bool, kSlotCount> bound_{};
  std::vector<uint32_t> memory_;
  std::string entry_text_;
  int entry_line_ = 0;
  uint16_t entry_ = 0;
  std::vector<std::pair<int, int>> jump_uses_;
  std::set<int> dest_sets_;
};

std::string src_text(SrcSel s, uint8_t nibble) {
  switch (s.kind) {
    case SrcKind::None: return "_";
    case SrcKind::MemAgu: return "m" + std::to_string(s.index);
    case SrcKind::SlotOut: return "s" + std::to_string(s.index);
    case SrcKind::Imm: return "$" + std::to_string(immediate_value(s, nibble));
  }
  return "?";
}

std::string mask_text(uint8_t mask) {
  std::string out = "{";
  for (int i = 0; i < kSlotCount; ++i) {
    if (mask & (1u << i)) {
      if (out.size() > 1) out += ',';
      out += std::to_string(i);
    }
  }
  return out + "}";
}

}  // namespace

AssemblyResult assemble(std::string_view source) { return Assembler(source).run(); }

std::string disassemble(const ProgramImage& image) {
  const uint32_t count = image.vliw_count();
  if (count == 0) throw DisassemblyError(-1, "image has no VLIWs");
  if (count > kMaxVliws) throw DisassemblyError(-1, "image exceeds 4096 VLIWs");
  if (image.entry_pc >= count) throw DisassemblyError(-1, "entry out of range");

  std::vector<Vliw> vliws;
  vliws.reserve(count);
  std::set<uint16_t> targets{image.entry_pc};
  for (uint32_t i = 0; i < count; ++i) {
    Vliw v;
    try {
      v = decode_vliw(image.words[i]);
    } catch (const DecodeError& e) {
      throw DisassemblyError(static_cast<int>(i), e.what());
    }
    if (v.aux.opcode == AuxOpcode::PsSetDest) {
      if (v.aux.operand >= count) throw DisassemblyError(static_cast<int>(i), "static jump destination out of range");
      targets.insert(v.aux.operand);
    }
    if (is_param_set_op(v.aux.opcode) && v.aux.target >= kParamSetCount) {
      throw DisassemblyError(static_cast<int>(i), "parameter-set op targets set > 3");
    }
    if (is_acc_conditioned(v.flow.opcode) && v.flow.acc_mask == 0) {
      throw DisassemblyError(static_cast<int>(i), "ACC-conditioned op with empty mask");
    }
    for (std::size_t s = 0; s < kSlotCount; ++s) {
      if (!find_opcode(image.slot_bindings[s], v.slots[s].op)) {
        throw DisassemblyError(static_cast<int>(i), "slot" + std::to_string(s) + " opcode " +
                                                        std::to_string(v.slots[s].op) + " undefined for " +
                                                        std::string(kind_name(image.slot_bindings[s])));
      }
    }
    vliws.push_back(v);
  }

  std::ostringstream os;
  for (std::size_t s = 0; s < kSlotCount; ++s) {
    os << ".slotbind " << s << ' ' << kind_name(image.slot_bindings[s]) << '\n';
  }
  os << ".entry L" << image.entry_pc << '\n';
  for (uint32_t i = 0; i < count; ++i) {
    const Vliw& v = vliws[i];
    if (targets.count(static_cast<uint16_t>(i))) os << 'L' << i << ":\n";
    std::vector<std::string> clauses;
    for (std::size_t s = 0; s < kSlotCount; ++s) {
      const SlotInstr& si = v.slots[s];
      if (si.op == 0) continue;
      std::string c = "slot" + std::to_string(s) + ": " +
                      std::string(find_opcode(image.slot_bindings[s], si.op)->mnemonic);
      if (si.src_a.kind != SrcKind::None || si.src_b.kind != SrcKind::None) {
        c += ' ' + src_text(si.src_a, si.imm_nibble);
        if (si.src_b.kind != SrcKind::None) c += ", " + src_text(si.src_b, si.imm_nibble);
      }
      if (si.dst.kind == DstKind::OutOnly) c += " -> out";
      if (si.dst.kind == DstKind::MemAgu) c += " -> m" + std::to_string(si.dst.index);
      clauses.push_back(std::move(c));
    }
    std::string aux, flow;
    const AuxOp& a = v.aux;
    if (a.opcode != AuxOpcode::Nop) {
      aux = std::string(aux_mnemonic(a.opcode)) + ' ';
      aux += (is_param_set_op(a.opcode) ? 'p' : 'a') + std::to_string(a.target);
      if (a.opcode == AuxOpcode::PsSetDest) aux += ", L" + std::to_string(a.operand);
      if (a.opcode == AuxOpcode::PsCntSet || a.opcode == AuxOpcode::AguSet || a.opcode == AuxOpcode::AguAdd) {
        aux += ", " + std::to_string(a.operand);
      }
    }
    const FlowOp& f = v.flow;
    if (f.opcode != FlowOpcode::NoJmp) {
      flow = std::string(flow_mnemonic(f.opcode));
      if (f.opcode == FlowOpcode::AlwJmp) {
        flow += " p" + std::to_string(f.param_set);
      } else if (is_cnt_conditioned(f.opcode)) {
        flow += " p" + std::to_string(f.param_set) + ", " + std::to_string(f.operand);
      } else if (is_jump(f.opcode)) {
        flow += " p" + std::to_string(f.param_set) + ", " + std::to_string(f.operand) + ", " + mask_text(f.acc_mask);
      } else if (f.opcode == FlowOpcode::TrapAlw) {
        flow += ' ' + std::to_string(f.trap_value);
      } else {
        flow += ' ' + std::to_string(f.operand) + ", " + mask_text(f.acc_mask) + ", " + std::to_string(f.trap_value);
      }
    }
    if (!aux.empty() || !flow.empty()) {
      std::string c = "ctrl: " + aux;
      if (!aux.empty() && !flow.empty()) c += " ; ";
      c += flow;
      clauses.push_back(std::move(c));
    }
    if (clauses.empty()) clauses.push_back("ctrl: NO_JMP");
    os << "    ";
    for (std::size_t c = 0; c < clauses.size(); ++c) os << (c ? " | " : "") << clauses[c];
    os << '\n';
  }
  for (std::size_t i = 0; i < image.memory.size(); i += 8) {
    os << ".word";
    for (std::size_t j = i; j < std::min(image.memory.size(), i + 8); ++j) {
      os << " 0x" << std::hex << std::setw(8) << std::setfill('0') << image.memory[j] << std::dec;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace refab
