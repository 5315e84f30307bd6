#include "refab/bench/harness.hpp"

#include <atomic>
#include <bit>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "refab/cnn_kernels.hpp"

namespace refab::bench {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view app_name(App app) {
  switch (app) {
    case App::Sift: return "sift";
    case App::Swe: return "swe";
    case App::Cnn: return "cnn";
    case App::Sha3: return "sha3";
  }
  return "?";
}

std::optional<App> app_from_name(std::string_view name) {
  for (App a : {App::Sift, App::Swe, App::Cnn, App::Sha3}) {
    if (app_name(a) == name) return a;
  }
  return std::nullopt;
}

FabricConfig default_fabric(App app) {
  switch (app) {
    case App::Sift: return sift_fabric();
    case App::Swe: return swe_fabric();
    case App::Cnn: return cnn_fabric();
    case App::Sha3: return sha3_fabric();
  }
  return {};
}

SiRun run_generated(const GeneratedProgram& g, const FabricConfig& cfg, bool want_trace) {
  SiRun r;
  r.fabric = std::make_unique<Fabric>(cfg.setup);
  try {
    Machine m(g.image, cfg.controller, *r.fabric);
    for (const auto& s : g.streams) {
      if (s.slot >= r.fabric->slot_count()) throw SetupError("stream targets slot " + std::to_string(s.slot) + " beyond the fabric");
      r.fabric->stream_push(s.slot, s.channel, s.words);
    }
    TraceSink sink;
    if (want_trace) sink = [&r](const TraceRecord& rec) { r.trace.push_back(rec); };
    r.outcome = m.run(sink);
  } catch (const std::exception& e) {
    r.fault = e.what();
  }
  return r;
}

float sift_result(const SiRun& r) { return std::bit_cast<float>(r.word(kSiftResultAddr)); }

NetUpdates<float> swe_result(const SiRun& r) {
  auto f = [&](uint32_t i) { return std::bit_cast<float>(r.word(kSweOutputBase + i)); };
  return {f(0), f(1), f(2), f(3), f(4)};
}

std::vector<int8_t> cnn_result(const SiRun& r, const ConvLayerProblem& p) {
  std::vector<int8_t> out;
  const uint32_t base = cnn_output_base(p);
  for (uint32_t i = 0; i < p.pooled_h() * p.pooled_w(); ++i) out.push_back(static_cast<int8_t>(r.word(base + i) & 0xFF));
  return out;
}

std::array<uint8_t, 32> sha3_result(const SiRun& r, uint32_t base) {
  std::array<uint8_t, 32> d{};
  for (uint32_t i = 0; i < 8; ++i) {
    const uint32_t w = r.word(base + i);
    for (uint32_t b = 0; b < 4; ++b) d[4 * i + b] = static_cast<uint8_t>(w >> (8 * b));
  }
  return d;
}

double rel_error(double si, double ref) {
  if (std::isnan(si) && std::isnan(ref)) return 0.0;
  if (std::isnan(si) || std::isnan(ref)) return INFINITY;
  if (si == ref) return 0.0;
  return std::fabs(si - ref) / std::max(std::fabs(ref), double{FLT_MIN});
}

namespace {

Comparison start(App app, const SiRun& r) {
  Comparison c;
  c.app = std::string(app_name(app));
  c.si_cycles = r.outcome.cycles;
  c.stalled_cycles = r.outcome.stalled_cycles;
  c.retired_vliws = r.outcome.retired_vliws;
  c.trap = r.outcome.trap;
  if (!r.fault.empty()) {
    c.detail = r.fault;
  } else if (r.outcome.trap) {
    c.detail = "trap: " + r.outcome.trap->describe();
  }
  return c;
}

std::string hex_digest(const std::array<uint8_t, 32>& d) {
  std::string s;
  char buf[3];
  for (uint8_t b : d) {
    std::snprintf(buf, sizeof buf, "%02x", b);
    s += buf;
  }
  return s;
}

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

Comparison compare_sift(const SiftProblem& p, const FabricConfig& cfg) {
  const SiRun r = run_generated(gen_sift(p), cfg);
  Comparison c = start(App::Sift, r);
  if (!r.clean()) return c;
  const float si = sift_result(r), ref = ref_sift_match(p);
  c.max_abs_rel_error = rel_error(si, ref);
  c.output = fmt_g(si);
  c.matched = std::bit_cast<uint32_t>(si) == std::bit_cast<uint32_t>(ref);
  if (!c.matched) c.detail = "si " + fmt_g(si) + " ref " + fmt_g(ref);
  return c;
}

Comparison compare_swe(std::span<const RiemannProblem> problems, const FabricConfig& cfg) {
  Comparison c;
  c.app = "swe";
  c.matched = true;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const RiemannProblem& p = problems[i];
    const SiRun r = run_generated(gen_swe(p), cfg);
    Comparison one = start(App::Swe, r);
    c.si_cycles += one.si_cycles;
    c.stalled_cycles += one.stalled_cycles;
    c.retired_vliws += one.retired_vliws;
    if (!r.clean()) {
      if (c.matched) {
        c.trap = one.trap;
        c.detail = "problem " + std::to_string(i) + ": " + one.detail;
      }
      c.matched = false;
      continue;
    }
    const NetUpdates<float> si = swe_result(r);
    const NetUpdates<float> ref = classify(p) == WetDry::WetWet ? ref_swe_fwave<float>(p) : ref_swe_hlle<float>(p);
    const float s[] = {si.h_upd_l, si.h_upd_r, si.hu_upd_l, si.hu_upd_r, si.max_speed};
    const float e[] = {ref.h_upd_l, ref.h_upd_r, ref.hu_upd_l, ref.hu_upd_r, ref.max_speed};
    for (int k = 0; k < 5; ++k) {
      const double err = rel_error(s[k], e[k]);
      c.max_abs_rel_error = std::max(c.max_abs_rel_error, err);
      if (!(err <= kSweRelTolerance) && c.matched) {
        c.matched = false;
        c.detail = "problem " + std::to_string(i) + " output " + std::to_string(k) + ": si " + fmt_g(s[k]) + " ref " +
                   fmt_g(e[k]);
      }
    }
  }
  return c;
}

Comparison compare_cnn(const ConvLayerProblem& p, const FabricConfig& cfg) {
  const auto variant = cfg.setup.slots[1] == KernelKind::CnnMac ? CnnVariant::TwoMac : CnnVariant::OneMac;
  const SiRun r = run_generated(gen_cnn(p, variant), cfg);
  Comparison c = start(App::Cnn, r);
  if (!r.clean()) return c;
  const auto si = cnn_result(r, p);
  const auto ref = ref_conv_layer(p);
  c.matched = si == ref;
  for (std::size_t i = 0; i < si.size(); ++i) {
    c.max_abs_rel_error = std::max(c.max_abs_rel_error, rel_error(si[i], ref[i]));
    if (si[i] != ref[i] && c.detail.empty()) {
      c.detail = "output " + std::to_string(i) + ": si " + std::to_string(si[i]) + " ref " + std::to_string(ref[i]);
    }
  }
  return c;
}

Comparison compare_sha3(std::span<const uint8_t> msg, const FabricConfig& cfg) {
  const SiRun r = run_generated(gen_sha3(msg), cfg);
  Comparison c = start(App::Sha3, r);
  if (!r.clean()) return c;
  const auto si = sha3_result(r), ref = ref_sha3_256(msg);
  c.output = hex_digest(si);
  c.matched = si == ref;
  if (!c.matched) c.detail = "si " + hex_digest(si) + " ref " + hex_digest(ref);
  return c;
}

Comparison compare_sha3_dual(std::span<const uint8_t> a, std::span<const uint8_t> b, const FabricConfig& cfg) {
  const SiRun r = run_generated(gen_sha3_dual(a, b), cfg);
  Comparison c = start(App::Sha3, r);
  if (!r.clean()) return c;
  const auto sa = sha3_result(r, kShaDigestA), sb = sha3_result(r, kShaDigestB);
  const auto ra = ref_sha3_256(a), rb = ref_sha3_256(b);
  c.output = hex_digest(sa) + " " + hex_digest(sb);
  c.matched = sa == ra && sb == rb;
  if (sa != ra) c.detail = "first digest si " + hex_digest(sa) + " ref " + hex_digest(ra);
  if (sb != rb) c.detail += (c.detail.empty() ? "" : "; ") + ("second digest si " + hex_digest(sb) + " ref " + hex_digest(rb));
  return c;
}

// ---------------------------------------------------------------------------
// random workloads

namespace {

// Uniform in [lo, hi) from the top 24 bits, so results do not depend on the
// standard library's distribution implementations.
float uniform(std::mt19937_64& rng, float lo, float hi) {
  const double u = double(rng() >> 40) / double(1u << 24);
  return static_cast<float>(lo + (double(hi) - lo) * u);
}

int8_t uniform_i8(std::mt19937_64& rng, int lo, int hi) {
  return static_cast<int8_t>(lo + static_cast<int>(rng() % static_cast<uint64_t>(hi - lo + 1)));
}

}  // namespace

SiftProblem random_sift(std::size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  SiftProblem p;
  for (std::size_t i = 0; i < n; ++i) {
    p.a.push_back(uniform(rng, 0.0f, 1.0f));
    p.b.push_back(uniform(rng, 0.0f, 1.0f));
  }
  return p;
}

std::vector<RiemannProblem> random_swe(std::size_t count, uint64_t seed, WetDry kind) {
  std::mt19937_64 rng(seed);
  std::vector<RiemannProblem> out;
  for (std::size_t i = 0; i < count; ++i) {
    RiemannProblem p;
    p.h_l = uniform(rng, 0.5f, 10.0f);
    p.h_r = uniform(rng, 0.5f, 10.0f);
    p.hu_l = uniform(rng, -5.0f, 5.0f);
    p.hu_r = uniform(rng, -5.0f, 5.0f);
    p.b_l = uniform(rng, -1.0f, 1.0f);
    p.b_r = uniform(rng, -1.0f, 1.0f);
    if (kind == WetDry::LeftDry || kind == WetDry::DryDry) p.h_l = p.hu_l = 0.0f;
    if (kind == WetDry::RightDry || kind == WetDry::DryDry) p.h_r = p.hu_r = 0.0f;
    out.push_back(p);
  }
  return out;
}

ConvLayerProblem random_cnn(uint32_t h, uint32_t w, uint32_t c, uint64_t seed) {
  std::mt19937_64 rng(seed);
  ConvLayerProblem p;
  p.h = h;
  p.w = w;
  p.c = c;
  p.pixels.resize(std::size_t{h} * w * c);
  for (auto& v : p.pixels) v = uniform_i8(rng, -128, 127);
  p.weights.resize(std::size_t{9} * c);
  for (auto& v : p.weights) v = uniform_i8(rng, -16, 16);
  // Roughly spans the int8 range for a typical pooled maximum.
  p.scale = 1.0f / static_cast<float>(256 * c);
  p.zero_point = uniform_i8(rng, -8, 8);
  return p;
}

// ---------------------------------------------------------------------------
// descriptors

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::vector<uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BenchError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<uint8_t> parse_hex(const std::string& s) {
  if (s.size() % 2 != 0) throw BenchError("hex string has odd length");
  std::vector<uint8_t> out;
  for (std::size_t i = 0; i < s.size(); i += 2) {
    unsigned v = 0;
    if (std::sscanf(s.substr(i, 2).c_str(), "%2x", &v) != 1) throw BenchError("bad hex digit in '" + s + "'");
    out.push_back(static_cast<uint8_t>(v));
  }
  return out;
}

std::vector<uint8_t> message_of(const json& j, const std::filesystem::path& base) {
  if (j.is_string()) return {j.get<std::string>().begin(), j.get<std::string>().end()};
  if (j.contains("text")) {
    auto s = j.at("text").get<std::string>();
    return {s.begin(), s.end()};
  }
  if (j.contains("hex")) return parse_hex(j.at("hex").get<std::string>());
  if (j.contains("file")) return read_bytes(resolve(base, j.at("file").get<std::string>()));
  if (j.contains("length")) {
    std::vector<uint8_t> m(j.at("length").get<std::size_t>());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<uint8_t>(i);
    return m;
  }
  throw BenchError("message needs one of text, hex, file or length");
}

RiemannProblem riemann_of(const json& j) {
  RiemannProblem p;
  p.h_l = j.at("h_l").get<float>();
  p.h_r = j.at("h_r").get<float>();
  p.hu_l = j.value("hu_l", 0.0f);
  p.hu_r = j.value("hu_r", 0.0f);
  p.b_l = j.value("b_l", 0.0f);
  p.b_r = j.value("b_r", 0.0f);
  return p;
}

WetDry wet_dry_of(const std::string& s) {
  static const std::map<std::string, WetDry> names = {
      {"wet", WetDry::WetWet}, {"left_dry", WetDry::LeftDry}, {"right_dry", WetDry::RightDry}, {"dry", WetDry::DryDry}};
  auto it = names.find(s);
  if (it == names.end()) throw BenchError("unknown wet/dry kind '" + s + "'");
  return it->second;
}

ConvLayerProblem cnn_of(const json& j, const std::filesystem::path& base) {
  ConvLayerProblem p;
  if (j.contains("input")) {
    const RfnnTensor in = read_rfnn_file(resolve(base, j.at("input").get<std::string>()));
    const RfnnTensor wt = read_rfnn_file(resolve(base, j.at("weights").get<std::string>()));
    if (wt.h != 3 || wt.w != 3 || wt.c != in.c) throw BenchError("weights must be 3x3 with the input's channel count");
    p.h = in.h;
    p.w = in.w;
    p.c = in.c;
    p.pixels = in.data;
    p.weights = wt.data;
  } else if (j.contains("pixels")) {
    p.h = j.at("h").get<uint32_t>();
    p.w = j.at("w").get<uint32_t>();
    p.c = j.at("c").get<uint32_t>();
    p.pixels = j.at("pixels").get<std::vector<int8_t>>();
    p.weights = j.at("weights").get<std::vector<int8_t>>();
  } else {
    p = random_cnn(j.at("h").get<uint32_t>(), j.at("w").get<uint32_t>(), j.at("c").get<uint32_t>(),
                   j.value("seed", uint64_t{1}));
  }
  if (j.contains("scale")) p.scale = j.at("scale").get<float>();
  if (j.contains("zero_point")) p.zero_point = static_cast<int8_t>(j.at("zero_point").get<int>());
  return p;
}

BenchCase case_of(const json& j, const std::filesystem::path& base, std::size_t index, std::optional<App> implied) {
  BenchCase bc;
  std::optional<App> a = implied;
  if (j.contains("app")) {
    const std::string app = j.at("app").get<std::string>();
    a = app_from_name(app);
    if (!a) throw BenchError("unknown app '" + app + "'");
    if (implied && *a != *implied) throw BenchError("case app '" + app + "' differs from the requested app");
  }
  if (!a) throw BenchError("case " + std::to_string(index) + " has no app");
  bc.app = *a;
  bc.name = j.value("name", std::string(app_name(*a)) + "-" + std::to_string(index));
  if (j.contains("fabric")) bc.fabric = read_fabric_config(resolve(base, j.at("fabric").get<std::string>()));

  switch (*a) {
    case App::Sift: {
      SiftProblem p;
      if (j.contains("a")) {
        p.a = j.at("a").get<std::vector<float>>();
        p.b = j.at("b").get<std::vector<float>>();
        if (p.a.size() != p.b.size()) throw BenchError(bc.name + ": a and b differ in length");
      } else {
        p = random_sift(j.at("n").get<std::size_t>(), j.value("seed", uint64_t{1}));
      }
      bc.run = [p](const FabricConfig& f) { return compare_sift(p, f); };
      break;
    }
    case App::Swe: {
      std::vector<RiemannProblem> ps;
      if (j.contains("problem")) ps.push_back(riemann_of(j.at("problem")));
      if (j.contains("problems")) {
        for (const auto& e : j.at("problems")) ps.push_back(riemann_of(e));
      }
      if (j.contains("random")) {
        const auto& r = j.at("random");
        auto more = random_swe(r.at("count").get<std::size_t>(), r.value("seed", uint64_t{1}),
                               wet_dry_of(r.value("kind", std::string("wet"))));
        ps.insert(ps.end(), more.begin(), more.end());
      }
      if (ps.empty()) throw BenchError(bc.name + ": no problems");
      bc.run = [ps](const FabricConfig& f) { return compare_swe(ps, f); };
      break;
    }
    case App::Cnn: {
      ConvLayerProblem p = cnn_of(j, base);
      bc.run = [p](const FabricConfig& f) { return compare_cnn(p, f); };
      break;
    }
    case App::Sha3: {
      if (j.contains("dual")) {
        const auto& d = j.at("dual");
        if (!d.is_array() || d.size() != 2) throw BenchError(bc.name + ": dual expects two messages");
        auto ma = message_of(d[0], base), mb = message_of(d[1], base);
        bc.run = [ma, mb](const FabricConfig& f) { return compare_sha3_dual(ma, mb, f); };
      } else {
        auto m = message_of(j.contains("message") ? j.at("message") : j, base);
        bc.run = [m](const FabricConfig& f) { return compare_sha3(m, f); };
      }
      break;
    }
  }
  return bc;
}

}  // namespace

std::vector<BenchCase> parse_bench(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                                   std::optional<App> app) {
  json single = json::array();
  if (doc.is_object() && !doc.contains("cases")) single.push_back(doc);
  const json& list = doc.is_array() ? doc : doc.is_object() && doc.contains("cases") ? doc.at("cases") : single;
  if (!list.is_array()) throw BenchError("cases must be an array");
  std::vector<BenchCase> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    try {
      out.push_back(case_of(list[i], base_dir, i, app));
    } catch (const json::exception& e) {
      throw BenchError("case " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::vector<BenchCase> read_bench_file(const std::filesystem::path& path, std::optional<App> app) {
  if (app == App::Sha3 && path.extension() != ".json") {
    const auto msg = read_bytes(path);
    BenchCase bc;
    bc.app = App::Sha3;
    bc.name = path.filename().string();
    bc.run = [msg](const FabricConfig& f) { return compare_sha3(msg, f); };
    return {bc};
  }
  std::ifstream in(path);
  if (!in) throw BenchError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw BenchError(path.string() + ": " + e.what());
  }
  return parse_bench(doc, path.parent_path(), app);
}

std::vector<Comparison> run_bench(const std::vector<BenchCase>& cases, const std::optional<FabricConfig>& fabric,
                                  int jobs, int repeat) {
  const std::size_t reps = static_cast<std::size_t>(std::max(repeat, 1));
  const std::size_t total = cases.size() * reps;
  std::vector<Comparison> results(total);
  auto one = [&](std::size_t i) {
    const BenchCase& bc = cases[i / reps];
    const FabricConfig cfg = fabric ? *fabric : bc.fabric ? *bc.fabric : default_fabric(bc.app);
    try {
      results[i] = bc.run(cfg);
    } catch (const std::exception& e) {
      results[i].app = std::string(app_name(bc.app));
      results[i].detail = e.what();
    }
    results[i].name = bc.name;
  };
  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), total);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < total; ++i) one(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < total; i = next++) one(i);
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

// ---------------------------------------------------------------------------
// reports

std::string report_json(const std::vector<Comparison>& results) {
  ojson arr = ojson::array();
  for (const auto& c : results) {
    ojson o;
    o["app"] = c.app;
    o["name"] = c.name;
    o["matched"] = c.matched;
    o["si_cycles"] = c.si_cycles;
    o["stalled_cycles"] = c.stalled_cycles;
    o["retired_vliws"] = c.retired_vliws;
    o["trap"] = c.trap ? ojson(c.trap->describe()) : ojson(nullptr);
    o["max_abs_rel_error"] = std::isfinite(c.max_abs_rel_error) ? ojson(c.max_abs_rel_error) : ojson("inf");
    o["output"] = c.output;
    o["detail"] = c.detail;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string report_csv(const std::vector<Comparison>& results) {
  std::ostringstream os;
  os << "app,name,matched,si_cycles,stalled_cycles,retired_vliws,trap,max_abs_rel_error,output,detail\n";
  for (const auto& c : results) {
    os << c.app << ',' << csv_quote(c.name) << ',' << (c.matched ? "true" : "false") << ',' << c.si_cycles << ','
       << c.stalled_cycles << ',' << c.retired_vliws << ',' << csv_quote(c.trap ? c.trap->describe() : "") << ','
       << fmt_g(c.max_abs_rel_error) << ',' << csv_quote(c.output) << ',' << csv_quote(c.detail) << '\n';
  }
  return os.str();
}

std::string report_table(const std::vector<Comparison>& results) {
  struct Agg {
    std::size_t cases = 0, matched = 0;
    uint64_t cycles = 0, stalled = 0;
    double max_err = 0;
  };
  std::map<std::string, Agg> by_app;
  for (const auto& c : results) {
    Agg& a = by_app[c.app];
    ++a.cases;
    a.matched += c.matched;
    a.cycles += c.si_cycles;
    a.stalled += c.stalled_cycles;
    a.max_err = std::max(a.max_err, c.max_abs_rel_error);
  }
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s %6s %8s %14s %14s %8s %12s\n", "app", "cases", "matched", "cycles", "mean",
                "stall%", "max_rel_err");
  os << buf;
  for (const auto& [app, a] : by_app) {
    const double mean = a.cases ? double(a.cycles) / double(a.cases) : 0.0;
    const double stall = a.cycles ? 100.0 * double(a.stalled) / double(a.cycles) : 0.0;
    std::snprintf(buf, sizeof buf, "%-6s %6zu %8zu %14llu %14.1f %8.2f %12.3g\n", app.c_str(), a.cases, a.matched,
                  static_cast<unsigned long long>(a.cycles), mean, stall, a.max_err);
    os << buf;
  }
  return os.str();
}

}  // namespace refab::bench
