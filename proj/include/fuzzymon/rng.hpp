#pragma once

#include <array>
#include <cstdint>

namespace fuzzymon {

/// Philox4x32-10 counter-based block function (Salmon et al., SC'11).
/// Maps a 128-bit counter and 64-bit key to 128 pseudo-random bits.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// A reproducible random stream addressed by (master_seed, stream_id).
///
/// Block b of stream s is philox(counter = {b_lo, b_hi, s_lo, s_hi},
/// key = master_seed), so streams never overlap and any position is
/// reachable in O(1). The raw 64-bit outputs are identical on every
/// platform; uniform() is an exact function of them.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t counter = 0) noexcept;

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }
  /// Index of the next Philox block to generate (blocks are generated four
  /// at a time).
  std::uint64_t counter() const noexcept { return block_; }

  std::uint64_t next_u64() noexcept {
    if (pos_ == kBuffer) refill();
    return buffer_[pos_++];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() noexcept { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal deviate (128-layer ziggurat).
  double normal() noexcept;

  /// Jump to an absolute block position.
  void seek(std::uint64_t block) noexcept {
    block_ = block;
    pos_ = kBuffer;
  }

 private:
  static constexpr unsigned kBlocks = 4;
  static constexpr unsigned kBuffer = 2 * kBlocks;

  void refill() noexcept;
  double normal_slow(std::uint64_t bits) noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_;
  std::array<std::uint64_t, kBuffer> buffer_{};
  unsigned pos_ = kBuffer;
};

namespace detail {

struct ZigguratTables {
  std::array<double, 129> x{};   // layer edges, x[0] = pseudo-width of the base layer
  std::array<double, 129> fx{};  // exp(-x^2/2)
};

const ZigguratTables& ziggurat_tables() noexcept;

}  // namespace detail

inline double RngStream::normal() noexcept {
  const auto& z = detail::ziggurat_tables();
  const std::uint64_t bits = next_u64();
  const unsigned layer = static_cast<unsigned>(bits & 0x7f);
  const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
  const double x = u * z.x[layer];
  if (x < z.x[layer + 1]) return (bits & 0x80) ? -x : x;
  return normal_slow(bits);
}

}  // namespace fuzzymon
