#pragma once

// Software oracles for the four applications. Nothing here touches the
// simulator; the benchmark generators and harness are checked against these.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace refab::bench {

// ---- SIFT match ----------------------------------------------------------

struct SiftProblem {
  std::vector<float> a, b;
};

// Squared distance with four strided binary32 accumulators combined as
// (acc0 + acc1) + (acc2 + acc3).
float ref_sift_match(const SiftProblem& p);

// ---- shallow water -------------------------------------------------------

struct RiemannProblem {
  float h_l = 0, h_r = 0, hu_l = 0, hu_r = 0, b_l = 0, b_r = 0;
};

inline constexpr float kDryTolerance = 1e-4f;
inline constexpr float kZeroTolerance = 1e-9f;
inline constexpr float kGravity = 9.81f;

enum class WetDry { WetWet, LeftDry, RightDry, DryDry };
WetDry classify(const RiemannProblem& p);

template <class T>
struct NetUpdates {
  T h_upd_l{}, h_upd_r{}, hu_upd_l{}, hu_upd_r{}, max_speed{};
};

class DomainError : public std::domain_error {
  using std::domain_error::domain_error;
};

// T = float mirrors the binary32 microcode operation for operation; T = double
// serves the residual and cross-solver checks.
template <class T>
NetUpdates<T> ref_swe_fwave(const RiemannProblem& p);
template <class T>
NetUpdates<T> ref_swe_hlle(const RiemannProblem& p);

// Flux difference minus the bathymetry source term, in double.
std::array<double, 2> swe_flux_jump(const RiemannProblem& p);

// ---- CNN layer -----------------------------------------------------------

struct ConvLayerProblem {
  uint32_t h = 0, w = 0, c = 0;
  std::vector<int8_t> pixels;   // c planes of h*w, row-major
  std::vector<int8_t> weights;  // c kernels of 3*3, row-major
  float scale = 1.0f;
  int8_t zero_point = 0;

  int8_t px(uint32_t ch, uint32_t y, uint32_t x) const { return pixels[(std::size_t{ch} * h + y) * w + x]; }
  int8_t wt(uint32_t ch, uint32_t i, uint32_t j) const { return weights[std::size_t{ch} * 9 + i * 3 + j]; }
  uint32_t pooled_h() const { return h >= 2 ? (h - 2) / 2 : 0; }
  uint32_t pooled_w() const { return w >= 2 ? (w - 2) / 2 : 0; }
};

// Valid 3x3 convolution summed over channels, ReLU, 2x2/2 max pool,
// quantize. Row-major pooled_h x pooled_w.
std::vector<int8_t> ref_conv_layer(const ConvLayerProblem& p);
int8_t ref_quantize(int32_t v, float scale, int8_t zero_point);

// ---- SHA3-256 ------------------------------------------------------------

std::array<uint8_t, 32> ref_sha3_256(std::span<const uint8_t> msg);

}  // namespace refab::bench
