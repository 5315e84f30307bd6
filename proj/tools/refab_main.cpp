// refab: assemble, inspect and simulate programs for the reconfigurable fabric.
//
// Exit status: 0 success, 1 diagnostics / fault / benchmark mismatch,
// 2 usage error, 3 the program trapped.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "refab/assembler.hpp"
#include "refab/bench/harness.hpp"
#include "refab/controller.hpp"
#include "refab/fabric_config.hpp"
#include "refab/isa.hpp"
#include "refab/trace.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitTrap = 3;

struct UsageFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageFailure("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageFailure("cannot write " + path);
  out << text;
}

// Fabric precedence: --fabric, then $REFAB_FABRIC, then the image's own bindings.
refab::FabricConfig load_fabric(const std::string& path, const refab::ProgramImage* image) {
  std::string p = path;
  if (p.empty()) {
    if (const char* env = std::getenv("REFAB_FABRIC"); env && *env) p = env;
  }
  if (!p.empty()) return refab::read_fabric_config(p);
  refab::FabricConfig cfg;
  if (image) cfg.setup.slots = image->slot_bindings;
  return cfg;
}

struct StreamSpec {
  int slot = 0, channel = 0;
  std::vector<uint32_t> words;
};

// SLOT:CHAN:FILE, FILE holding raw little-endian 32-bit words.
StreamSpec parse_stream(const std::string& spec) {
  auto c1 = spec.find(':');
  auto c2 = c1 == std::string::npos ? c1 : spec.find(':', c1 + 1);
  if (c2 == std::string::npos) throw UsageFailure("--stream expects SLOT:CHAN:FILE, got '" + spec + "'");
  StreamSpec s;
  try {
    s.slot = std::stoi(spec.substr(0, c1));
    s.channel = std::stoi(spec.substr(c1 + 1, c2 - c1 - 1));
  } catch (const std::exception&) {
    throw UsageFailure("--stream expects SLOT:CHAN:FILE, got '" + spec + "'");
  }
  const std::string file = spec.substr(c2 + 1);
  const std::string data = slurp(file);
  if (data.size() % 4 != 0) throw UsageFailure(file + ": size is not a multiple of 4");
  for (std::size_t i = 0; i < data.size(); i += 4) {
    s.words.push_back(uint32_t{uint8_t(data[i])} | uint32_t{uint8_t(data[i + 1])} << 8 |
                      uint32_t{uint8_t(data[i + 2])} << 16 | uint32_t{uint8_t(data[i + 3])} << 24);
  }
  return s;
}

struct SimOptions {
  std::string image, fabric;
  std::vector<std::string> streams;
  std::vector<uint64_t> mem_dump;
  uint64_t max_cycles = 0;
  uint32_t stall_threshold = 0;
  std::string format = "json";
  std::string output;
};

void add_sim_options(CLI::App* cmd, SimOptions& o) {
  cmd->add_option("image", o.image, "Program image")->required();
  cmd->add_option("--fabric", o.fabric, "Fabric config (default: $REFAB_FABRIC, else the image bindings)");
  cmd->add_option("--stream", o.streams, "Preload a stream: SLOT:CHAN:FILE");
  cmd->add_option("--mem-dump", o.mem_dump, "Print LEN memory words from ADDR after the run")
      ->expected(2)
      ->type_name("ADDR LEN");
  cmd->add_option("--max-cycles", o.max_cycles, "Cycle limit");
  cmd->add_option("--stall-threshold", o.stall_threshold, "Consecutive stall cycles before STALL_TIMEOUT")
      ->check(CLI::PositiveNumber);
}

int simulate(const SimOptions& o, bool trace) {
  const refab::ProgramImage image = refab::read_image_file(o.image);
  refab::FabricConfig cfg = load_fabric(o.fabric, &image);
  if (o.max_cycles) cfg.controller.max_cycles = o.max_cycles;
  if (o.stall_threshold) cfg.controller.stall_threshold = o.stall_threshold;
  std::vector<StreamSpec> streams;
  for (const auto& s : o.streams) streams.push_back(parse_stream(s));

  refab::Fabric fabric(cfg.setup);
  refab::Machine m(image, cfg.controller, fabric);
  for (const auto& s : streams) {
    if (s.slot < 0 || s.slot >= fabric.slot_count() || s.channel < 0 || s.channel >= 4) {
      throw UsageFailure("stream slot/channel out of range");
    }
    fabric.stream_push(s.slot, s.channel, s.words);
  }

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (trace && !o.output.empty() && o.output != "-") {
    file.open(o.output);
    if (!file) throw UsageFailure("cannot write " + o.output);
    out = &file;
  }
  const bool csv = o.format == "csv";
  refab::TraceSink sink;
  if (trace) {
    if (csv) *out << refab::trace_csv_header() << '\n';
    sink = [&](const refab::TraceRecord& r) { *out << (csv ? refab::trace_csv_line(r) : refab::trace_json_line(r)) << '\n'; };
  }

  refab::RunOutcome res;
  try {
    res = m.run(sink);
  } catch (const refab::ResourceLimit& e) {
    std::cerr << "refab: " << e.what() << '\n';
    return kExitFail;
  } catch (const refab::SimulationFault& e) {
    std::cerr << "refab: fault: " << e.what() << '\n';
    return kExitFail;
  }

  if (res.trap) {
    std::cerr << "refab: trap: " << res.trap->describe() << '\n';
  } else {
    std::cerr << "refab: halted after " << res.cycles << " cycles (" << res.retired_vliws << " retired, "
              << res.stalled_cycles << " stalled)\n";
  }

  if (!o.mem_dump.empty()) {
    const uint64_t start = o.mem_dump[0], count = o.mem_dump[1];
    if (start + count > fabric.memory_words()) throw UsageFailure("--mem-dump range outside memory");
    char buf[40];
    for (uint64_t a = start; a < start + count; ++a) {
      std::snprintf(buf, sizeof buf, "0x%06llx: 0x%08x\n", static_cast<unsigned long long>(a),
                    fabric.mem_read(static_cast<uint32_t>(a)));
      (trace && out == &std::cout ? std::cerr : std::cout) << buf;
    }
  }
  return res.trap ? kExitTrap : 0;
}

int cmd_asm(const std::string& in, const std::string& out) {
  const std::string src = slurp(in);
  const refab::AssemblyResult r = refab::assemble(src);
  for (const auto& d : r.diagnostics) std::cerr << refab::format_diagnostic(d, in) << '\n';
  if (!r.ok()) return kExitFail;
  refab::write_image_file(out, *r.image);
  return 0;
}

int cmd_disasm(const std::string& in, const std::string& out) {
  const refab::ProgramImage image = refab::read_image_file(in);
  write_text(out, refab::disassemble(image));
  return 0;
}

int cmd_validate(const std::string& in, const std::string& fabric_path) {
  const refab::ProgramImage image = refab::read_image_file(in);
  int rc = 0;
  for (const auto& msg : refab::validate_program(image)) {
    std::cerr << in << ": " << msg << '\n';
    rc = kExitFail;
  }
  if (!fabric_path.empty() || std::getenv("REFAB_FABRIC")) {
    const refab::FabricConfig cfg = load_fabric(fabric_path, &image);
    for (int i = 0; i < refab::kSlotCount; ++i) {
      const auto want = image.slot_bindings[static_cast<std::size_t>(i)];
      const auto have = i < cfg.setup.slot_count ? cfg.setup.slots[static_cast<std::size_t>(i)] : refab::KernelKind::None;
      if (want != have) {
        std::cerr << in << ": slot " << i << " expects " << refab::kind_name(want) << ", fabric has "
                  << refab::kind_name(have) << '\n';
        rc = kExitFail;
      }
    }
  }
  if (rc == 0) std::cerr << in << ": ok, " << image.vliw_count() << " VLIWs, " << image.memory.size() << " data words\n";
  return rc;
}

struct BenchOptions {
  std::string app, input, fabric, format = "json", report;
  int jobs = 1, repeat = 1;
};

int cmd_bench(const BenchOptions& o) {
  std::optional<refab::bench::App> app;
  if (o.app != "suite") app = refab::bench::app_from_name(o.app);
  const auto cases = refab::bench::read_bench_file(o.input, app);
  std::optional<refab::FabricConfig> fabric;
  std::string fabric_path = o.fabric;
  if (fabric_path.empty()) {
    if (const char* env = std::getenv("REFAB_FABRIC"); env && *env) fabric_path = env;
  }
  if (!fabric_path.empty()) fabric = refab::read_fabric_config(fabric_path);
  const auto results = refab::bench::run_bench(cases, fabric, o.jobs, o.repeat);
  const std::string text = o.format == "csv"     ? refab::bench::report_csv(results)
                           : o.format == "table" ? refab::bench::report_table(results)
                                                 : refab::bench::report_json(results);
  int rc = 0;
  for (const auto& r : results) {
    if (!r.matched) {
      std::cerr << "refab: " << r.name << " mismatch" << (r.detail.empty() ? "" : ": " + r.detail) << '\n';
      rc = kExitFail;
    }
  }
  if (o.report.empty()) {
    std::cout << text;
  } else {
    write_text(o.report, text);
    std::cout << o.report << '\n';
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconfigurable fabric toolchain and simulator"};
  app.require_subcommand(1);

  std::string asm_in, asm_out = "a.img";
  auto* c_asm = app.add_subcommand("asm", "Assemble a source file into a program image");
  c_asm->add_option("source", asm_in, "Assembly source")->required();
  c_asm->add_option("-o,--output", asm_out, "Output image");

  std::string dis_in, dis_out;
  auto* c_dis = app.add_subcommand("disasm", "Print canonical assembly for an image");
  c_dis->add_option("image", dis_in, "Program image")->required();
  c_dis->add_option("-o,--output", dis_out, "Output file (default stdout)");

  std::string val_in, val_fabric;
  auto* c_val = app.add_subcommand("validate", "Check an image, optionally against a fabric config");
  c_val->add_option("image", val_in, "Program image")->required();
  c_val->add_option("--fabric", val_fabric, "Fabric config");

  SimOptions run_opts;
  auto* c_run = app.add_subcommand("run", "Simulate an image to completion");
  add_sim_options(c_run, run_opts);

  SimOptions trace_opts;
  auto* c_trace = app.add_subcommand("trace", "Simulate and emit one record per cycle");
  add_sim_options(c_trace, trace_opts);
  c_trace->add_option("--format", trace_opts.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  c_trace->add_option("-o,--output", trace_opts.output, "Trace file (default stdout)");

  BenchOptions bench;
  auto* c_bench = app.add_subcommand("bench", "Run an SI against its software reference");
  c_bench->add_option("app", bench.app, "sift, swe, cnn, sha3, or suite for a mixed case file")
      ->required()
      ->check(CLI::IsMember({"sift", "swe", "cnn", "sha3", "suite"}));
  c_bench->add_option("--input", bench.input, "JSON descriptor file (sha3 also takes a raw message file)")
      ->required();
  c_bench->add_option("--fabric", bench.fabric, "Fabric config for every case (default: $REFAB_FABRIC, else per app)");
  c_bench->add_option("--repeat", bench.repeat, "Runs per case")->check(CLI::PositiveNumber);
  c_bench->add_option("--report", bench.report, "Write the report here and print its path");
  c_bench->add_option("--format", bench.format, "json, csv or table")->check(CLI::IsMember({"json", "csv", "table"}));
  c_bench->add_option("--jobs", bench.jobs, "Parallel workers")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc == 0) return 0;
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return kExitUsage;
  }

  try {
    if (*c_asm) return cmd_asm(asm_in, asm_out);
    if (*c_dis) return cmd_disasm(dis_in, dis_out);
    if (*c_val) return cmd_validate(val_in, val_fabric);
    if (*c_run) return simulate(run_opts, false);
    if (*c_trace) return simulate(trace_opts, true);
    if (*c_bench) return cmd_bench(bench);
  } catch (const UsageFailure& e) {
    std::cerr << "refab: " << e.what() << '\n';
    return kExitUsage;
  } catch (const refab::DisassemblyError& e) {
    std::cerr << "refab: " << e.what() << '\n';
    return kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "refab: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}
