#include "refab/bench/reference.hpp"

#include <algorithm>
#include <cmath>

namespace refab::bench {

float ref_sift_match(const SiftProblem& p) {
  if (p.a.size() != p.b.size()) throw std::invalid_argument("SIFT vectors differ in length");
  float acc[4] = {0.0f, 0.0f, 0.0f, 0.0f};
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    float d = p.a[i] - p.b[i];
    float sq = d * d;
    acc[i % 4] = acc[i % 4] + sq;
  }
  float lo = acc[0] + acc[1];
  float hi = acc[2] + acc[3];
  return lo + hi;
}

WetDry classify(const RiemannProblem& p) {
  const bool l = p.h_l <= kDryTolerance;
  const bool r = p.h_r <= kDryTolerance;
  if (l && r) return WetDry::DryDry;
  if (l) return WetDry::LeftDry;
  if (r) return WetDry::RightDry;
  return WetDry::WetWet;
}

namespace {

template <class T>
struct State {
  T hl, hr, hul, hur, bl, br;
};

template <class T>
void add_wave(NetUpdates<T>& u, T wh, T whu, T s) {
  const T tol = T(kZeroTolerance);
  if (s < -tol) {
    u.h_upd_l = u.h_upd_l + wh;
    u.hu_upd_l = u.hu_upd_l + whu;
  } else if (s > tol) {
    u.h_upd_r = u.h_upd_r + wh;
    u.hu_upd_r = u.hu_upd_r + whu;
  } else {
    const T half = T(0.5);
    const T hh = half * wh;
    const T hhu = half * whu;
    u.h_upd_l = u.h_upd_l + hh;
    u.h_upd_r = u.h_upd_r + hh;
    u.hu_upd_l = u.hu_upd_l + hhu;
    u.hu_upd_r = u.hu_upd_r + hhu;
  }
}

// f-wave decomposition of the flux jump onto speeds s1 < s2.
template <class T>
NetUpdates<T> decompose(const State<T>& q, T ul, T ur, T s1, T s2) {
  const T g = T(kGravity);
  const T half_g = T(0.5) * g;

  const T dl = s2 - s1;
  const T inv = T(1) / dl;
  const T fdif0 = q.hur - q.hul;
  // Hydrostatic flux jump and bed source folded into one product, so a lake
  // at rest cancels exactly: fl(br - bl) == -fl(hr - hl) when h + b matches.
  const T mom = q.hur * ur - q.hul * ul;
  const T deta = (q.hr - q.hl) + (q.br - q.bl);
  const T fdif1 = mom + (half_g * (q.hr + q.hl)) * deta;
  const T inv_f1 = inv * fdif1;
  const T beta1 = (inv * s2) * fdif0 - inv_f1;
  const T beta2 = inv_f1 - (inv * s1) * fdif0;

  NetUpdates<T> u{};
  add_wave(u, beta1, beta1 * s1, s1);
  add_wave(u, beta2, beta2 * s2, s2);
  u.max_speed = std::max(std::fabs(s1), std::fabs(s2));
  return u;
}

template <class T>
void roe_speeds(const State<T>& q, T ul, T ur, T sq_l, T sq_r, T& s1, T& s2) {
  const T g = T(kGravity);
  const T h_roe = T(0.5) * (q.hl + q.hr);
  const T u_roe = (ul * sq_l + ur * sq_r) / (sq_l + sq_r);
  const T c_roe = std::sqrt(g * h_roe);
  s1 = u_roe - c_roe;
  s2 = u_roe + c_roe;
}

template <class T>
State<T> load(const RiemannProblem& p) {
  return {T(p.h_l), T(p.h_r), T(p.hu_l), T(p.hu_r), T(p.b_l), T(p.b_r)};
}

}  // namespace

template <class T>
NetUpdates<T> ref_swe_fwave(const RiemannProblem& p) {
  if (classify(p) != WetDry::WetWet) throw DomainError("FWave requires two wet cells");
  const State<T> q = load<T>(p);
  const T ul = q.hul / q.hl;
  const T ur = q.hur / q.hr;
  const T sq_l = std::sqrt(q.hl);
  const T sq_r = std::sqrt(q.hr);
  T s1, s2;
  roe_speeds(q, ul, ur, sq_l, sq_r, s1, s2);
  return decompose(q, ul, ur, s1, s2);
}

template <class T>
NetUpdates<T> ref_swe_hlle(const RiemannProblem& p) {
  const WetDry wd = classify(p);
  if (wd == WetDry::DryDry) return {};
  State<T> q = load<T>(p);
  // Reflecting wall in place of the dry cell.
  if (wd == WetDry::RightDry) {
    q.hr = q.hl;
    q.hur = T(0) - q.hul;
    q.br = q.bl;
  } else if (wd == WetDry::LeftDry) {
    q.hl = q.hr;
    q.hul = T(0) - q.hur;
    q.bl = q.br;
  }
  const T g = T(kGravity);
  const T ul = q.hul / q.hl;
  const T ur = q.hur / q.hr;
  const T sq_l = std::sqrt(q.hl);
  const T sq_r = std::sqrt(q.hr);
  T roe1, roe2;
  roe_speeds(q, ul, ur, sq_l, sq_r, roe1, roe2);
  const T c_l = std::sqrt(g * q.hl);
  const T c_r = std::sqrt(g * q.hr);
  const T s1 = std::min(ul - c_l, roe1);
  const T s2 = std::max(ur + c_r, roe2);
  NetUpdates<T> u = decompose(q, ul, ur, s1, s2);
  if (wd == WetDry::RightDry) u.h_upd_r = u.hu_upd_r = T(0);
  if (wd == WetDry::LeftDry) u.h_upd_l = u.hu_upd_l = T(0);
  return u;
}

template NetUpdates<float> ref_swe_fwave<float>(const RiemannProblem&);
template NetUpdates<double> ref_swe_fwave<double>(const RiemannProblem&);
template NetUpdates<float> ref_swe_hlle<float>(const RiemannProblem&);
template NetUpdates<double> ref_swe_hlle<double>(const RiemannProblem&);

std::array<double, 2> swe_flux_jump(const RiemannProblem& p) {
  const double g = kGravity;
  const double hl = p.h_l, hr = p.h_r, hul = p.hu_l, hur = p.hu_r;
  const double f_l = hul * hul / hl + 0.5 * g * hl * hl;
  const double f_r = hur * hur / hr + 0.5 * g * hr * hr;
  const double source = -0.5 * g * (hl + hr) * (double(p.b_r) - double(p.b_l));
  return {hur - hul, f_r - f_l - source};
}

int8_t ref_quantize(int32_t v, float scale, int8_t zero_point) {
  const float prod = static_cast<float>(v) * scale;
  const long r = std::lrint(prod) + zero_point;
  return static_cast<int8_t>(std::clamp<long>(r, -128, 127));
}

std::vector<int8_t> ref_conv_layer(const ConvLayerProblem& p) {
  if (p.h < 3 || p.w < 3) throw std::invalid_argument("image smaller than the 3x3 kernel");
  const uint32_t ch = p.h - 2, cw = p.w - 2;
  std::vector<int32_t> conv(std::size_t{ch} * cw, 0);
  for (uint32_t y = 0; y < ch; ++y) {
    for (uint32_t x = 0; x < cw; ++x) {
      int32_t s = 0;
      for (uint32_t c = 0; c < p.c; ++c) {
        for (uint32_t i = 0; i < 3; ++i) {
          for (uint32_t j = 0; j < 3; ++j) s += int32_t{p.wt(c, i, j)} * int32_t{p.px(c, y + i, x + j)};
        }
      }
      conv[std::size_t{y} * cw + x] = s;
    }
  }
  const uint32_t ph = p.pooled_h(), pw = p.pooled_w();
  std::vector<int8_t> out;
  out.reserve(std::size_t{ph} * pw);
  for (uint32_t r = 0; r < ph; ++r) {
    for (uint32_t c = 0; c < pw; ++c) {
      int32_t m = 0;
      for (uint32_t dy = 0; dy < 2; ++dy) {
        for (uint32_t dx = 0; dx < 2; ++dx) {
          m = std::max(m, std::max(0, conv[std::size_t{2 * r + dy} * cw + 2 * c + dx]));
        }
      }
      out.push_back(ref_quantize(m, p.scale, p.zero_point));
    }
  }
  return out;
}

// Keccak-f[1600] written from the standard's step mappings, with the round
// constants taken from the rc(t) LFSR and the rho offsets from the (x, y)
// walk rather than from tables.
namespace {

using Lanes = uint64_t[5][5];  // [x][y]

uint64_t rotl(uint64_t v, unsigned n) { return n == 0 ? v : (v << n) | (v >> (64 - n)); }

// Bit i of r holds R[i].
bool rc_bit(unsigned t) {
  if (t % 255 == 0) return true;
  uint32_t r = 1;
  for (unsigned i = 1; i <= t % 255; ++i) {
    r <<= 1;
    if (r & 0x100) r ^= 0x171;  // R[0], R[4], R[5], R[6] ^= R[8]; drop R[8]
  }
  return r & 1;
}

uint64_t round_constant(unsigned ir) {
  uint64_t rc = 0;
  for (unsigned j = 0; j <= 6; ++j) {
    if (rc_bit(j + 7 * ir)) rc |= uint64_t{1} << ((1u << j) - 1);
  }
  return rc;
}

struct RhoTable {
  unsigned off[5][5] = {};
  RhoTable() {
    unsigned x = 1, y = 0;
    for (unsigned t = 0; t < 24; ++t) {
      off[x][y] = ((t + 1) * (t + 2) / 2) % 64;
      unsigned nx = y, ny = (2 * x + 3 * y) % 5;
      x = nx;
      y = ny;
    }
  }
};

void permute(Lanes& a) {
  static const RhoTable rho;
  for (unsigned ir = 0; ir < 24; ++ir) {
    uint64_t c[5], d[5];
    for (unsigned x = 0; x < 5; ++x) c[x] = a[x][0] ^ a[x][1] ^ a[x][2] ^ a[x][3] ^ a[x][4];
    for (unsigned x = 0; x < 5; ++x) d[x] = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
    for (unsigned x = 0; x < 5; ++x) {
      for (unsigned y = 0; y < 5; ++y) a[x][y] ^= d[x];
    }
    Lanes b;
    for (unsigned x = 0; x < 5; ++x) {
      for (unsigned y = 0; y < 5; ++y) b[y][(2 * x + 3 * y) % 5] = rotl(a[x][y], rho.off[x][y]);
    }
    for (unsigned x = 0; x < 5; ++x) {
      for (unsigned y = 0; y < 5; ++y) a[x][y] = b[x][y] ^ (~b[(x + 1) % 5][y] & b[(x + 2) % 5][y]);
    }
    a[0][0] ^= round_constant(ir);
  }
}

}  // namespace

std::array<uint8_t, 32> ref_sha3_256(std::span<const uint8_t> msg) {
  constexpr std::size_t rate = 136;
  std::vector<uint8_t> padded(msg.begin(), msg.end());
  padded.push_back(0x06);
  while (padded.size() % rate != 0) padded.push_back(0x00);
  padded.back() |= 0x80;

  Lanes a = {};
  for (std::size_t off = 0; off < padded.size(); off += rate) {
    for (std::size_t i = 0; i < rate; ++i) {
      const std::size_t lane = i / 8;
      a[lane % 5][lane / 5] ^= uint64_t{padded[off + i]} << (8 * (i % 8));
    }
    permute(a);
  }
  std::array<uint8_t, 32> out{};
  for (std::size_t i = 0; i < 32; ++i) {
    const std::size_t lane = i / 8;
    out[i] = static_cast<uint8_t>(a[lane % 5][lane / 5] >> (8 * (i % 8)));
  }
  return out;
}

}  // namespace refab::bench
