#include "fuzzymon/rng.hpp"

#include <cmath>

namespace fuzzymon {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline PhiloxCounter philox_round(const PhiloxCounter& c, const PhiloxKey& k) noexcept {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

// Marsaglia & Tsang (2000) constants for 128 layers.
constexpr double kTailStart = 3.442619855899;
constexpr double kLayerArea = 9.91256303526217e-3;

inline double gauss_density(double x) { return std::exp(-0.5 * x * x); }

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept {
  counter = philox_round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kWeyl0;
    key[1] += kWeyl1;
    counter = philox_round(counter, key);
  }
  return counter;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t counter) noexcept
    : seed_(master_seed), stream_(stream_id), block_(counter) {}

void RngStream::refill() noexcept {
  // kBlocks independent counters per refill, laid out structure-of-arrays so
  // the rounds interleave (and vectorise) instead of forming one serial chain.
  std::uint32_t x0[kBlocks], x1[kBlocks], x2[kBlocks], x3[kBlocks];
  for (unsigned b = 0; b < kBlocks; ++b) {
    const std::uint64_t blk = block_ + b;
    x0[b] = static_cast<std::uint32_t>(blk);
    x1[b] = static_cast<std::uint32_t>(blk >> 32);
    x2[b] = static_cast<std::uint32_t>(stream_);
    x3[b] = static_cast<std::uint32_t>(stream_ >> 32);
  }
  std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    for (unsigned b = 0; b < kBlocks; ++b) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * x0[b];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * x2[b];
      const auto y0 = static_cast<std::uint32_t>(p1 >> 32) ^ x1[b] ^ k0;
      const auto y1 = static_cast<std::uint32_t>(p1);
      const auto y2 = static_cast<std::uint32_t>(p0 >> 32) ^ x3[b] ^ k1;
      const auto y3 = static_cast<std::uint32_t>(p0);
      x0[b] = y0;
      x1[b] = y1;
      x2[b] = y2;
      x3[b] = y3;
    }
  }
  for (unsigned b = 0; b < kBlocks; ++b) {
    buffer_[2 * b] = (static_cast<std::uint64_t>(x1[b]) << 32) | x0[b];
    buffer_[2 * b + 1] = (static_cast<std::uint64_t>(x3[b]) << 32) | x2[b];
  }
  block_ += kBlocks;
  pos_ = 0;
}

double RngStream::normal_slow(std::uint64_t bits) noexcept {
  const auto& z = detail::ziggurat_tables();
  for (;;) {
    const unsigned layer = static_cast<unsigned>(bits & 0x7f);
    const bool negative = (bits & 0x80) != 0;
    const double x = static_cast<double>(bits >> 11) * 0x1.0p-53 * z.x[layer];
    if (x < z.x[layer + 1]) return negative ? -x : x;
    if (layer == 0) {
      // Tail beyond R (Marsaglia 1964).
      double tx;
      double ty;
      do {
        tx = -std::log(uniform_pos()) / kTailStart;
        ty = -std::log(uniform_pos());
      } while (2.0 * ty < tx * tx);
      return negative ? -(kTailStart + tx) : kTailStart + tx;
    }
    // Wedge between layers: accept under the density.
    const double y = z.fx[layer] + uniform() * (z.fx[layer + 1] - z.fx[layer]);
    if (y < gauss_density(x)) return negative ? -x : x;
    bits = next_u64();
  }
}

namespace detail {

const ZigguratTables& ziggurat_tables() noexcept {
  static const ZigguratTables tables = [] {
    ZigguratTables t;
    t.x[0] = kLayerArea / gauss_density(kTailStart);
    t.x[1] = kTailStart;
    for (std::size_t i = 1; i < 128; ++i) {
      t.x[i + 1] = std::sqrt(-2.0 * std::log(kLayerArea / t.x[i] + gauss_density(t.x[i])));
    }
    t.x[128] = 0.0;
    for (std::size_t i = 0; i < t.x.size(); ++i) t.fx[i] = gauss_density(t.x[i]);
    t.fx[0] = gauss_density(kTailStart);
    return t;
  }();
  return tables;
}

}  // namespace detail

}  // namespace fuzzymon
