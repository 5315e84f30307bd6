#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "refab/bench/generators.hpp"
#include "refab/bench/reference.hpp"
#include "refab/controller.hpp"
#include "refab/fabric_config.hpp"

namespace refab::bench {

enum class App { Sift, Swe, Cnn, Sha3 };
std::string_view app_name(App app);
std::optional<App> app_from_name(std::string_view name);
FabricConfig default_fabric(App app);

struct SiRun {
  RunOutcome outcome;
  std::unique_ptr<Fabric> fabric;  // final state, for memory and kernel counters
  std::vector<TraceRecord> trace;  // filled when requested
  std::string fault;               // non-empty if the run threw instead of finishing

  bool clean() const { return fault.empty() && outcome.halted && !outcome.trap; }
  uint32_t word(uint32_t addr) const { return fabric->mem_read(addr); }
};

// Loads the program and its stream payloads onto a fresh fabric and runs to
// completion. Setup errors, faults and cycle limits are captured in `fault`.
SiRun run_generated(const GeneratedProgram& g, const FabricConfig& cfg, bool want_trace = false);

float sift_result(const SiRun& r);
NetUpdates<float> swe_result(const SiRun& r);
std::vector<int8_t> cnn_result(const SiRun& r, const ConvLayerProblem& p);
std::array<uint8_t, 32> sha3_result(const SiRun& r, uint32_t base = kShaDigestA);

struct Comparison {
  std::string app;
  std::string name;
  bool matched = false;
  uint64_t si_cycles = 0;
  uint64_t stalled_cycles = 0;
  uint64_t retired_vliws = 0;
  std::optional<Trap> trap;
  double max_abs_rel_error = 0.0;
  std::string output;  // SI result in text form: digest hex, distance
  std::string detail;
};

// |si - ref| / max(|ref|, FLT_MIN); infinity when exactly one side is NaN.
double rel_error(double si, double ref);
inline constexpr double kSweRelTolerance = 1e-6;

Comparison compare_sift(const SiftProblem& p, const FabricConfig& cfg);
// One record for the whole batch; cycles are summed.
Comparison compare_swe(std::span<const RiemannProblem> problems, const FabricConfig& cfg);
// The CNN variant follows the fabric: a second CNN_MAC in slot 1 selects the two-MAC schedule.
Comparison compare_cnn(const ConvLayerProblem& p, const FabricConfig& cfg);
Comparison compare_sha3(std::span<const uint8_t> msg, const FabricConfig& cfg);
Comparison compare_sha3_dual(std::span<const uint8_t> a, std::span<const uint8_t> b, const FabricConfig& cfg);

// ---- random workloads (deterministic per seed) ----
SiftProblem random_sift(std::size_t n, uint64_t seed);
std::vector<RiemannProblem> random_swe(std::size_t count, uint64_t seed, WetDry kind = WetDry::WetWet);
ConvLayerProblem random_cnn(uint32_t h, uint32_t w, uint32_t c, uint64_t seed);

// ---- benchmark descriptors ----
class BenchError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BenchCase {
  std::string name;
  App app = App::Sift;
  std::optional<FabricConfig> fabric;
  std::function<Comparison(const FabricConfig&)> run;
};

// Accepts {"cases": [...]}, a bare array, or a single case object. With
// `app` set, cases may omit their "app" key. Relative file paths resolve
// against base_dir.
std::vector<BenchCase> parse_bench(const nlohmann::json& doc, const std::filesystem::path& base_dir = {},
                                   std::optional<App> app = std::nullopt);
// A .json file is parsed as descriptors; for sha3 any other file is the raw
// message.
std::vector<BenchCase> read_bench_file(const std::filesystem::path& path, std::optional<App> app = std::nullopt);

// Each case runs `repeat` times; results come back in case order regardless
// of job count.
std::vector<Comparison> run_bench(const std::vector<BenchCase>& cases, const std::optional<FabricConfig>& fabric,
                                  int jobs = 1, int repeat = 1);

std::string report_json(const std::vector<Comparison>& results);
std::string report_csv(const std::vector<Comparison>& results);
std::string report_table(const std::vector<Comparison>& results);

}  // namespace refab::bench
