#pragma once

// Counter-based random streams (Philox4x32-10). A stream is identified by
// (seed, stream_id); the seed is the Philox key and the stream id occupies
// the upper half of the 128-bit counter, so distinct streams draw from
// disjoint counter ranges and any stream can be recreated without replaying
// the others.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace lpball {

namespace detail {

struct Philox4x32 {
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Block round(const Block& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  static constexpr Block generate(Block counter, Key key) noexcept {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      counter = round(counter, key);
    }
    return counter;
  }
};

}  // namespace detail

class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : seed_(seed), stream_id_(stream_id) {}

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// A sibling stream with the same seed and a different id.
  [[nodiscard]] RngStream substream(std::uint64_t stream_id) const noexcept { return RngStream(seed_, stream_id); }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return next_u64(); }

  std::uint32_t next_u32() noexcept {
    if (used_ == kWords) refill();
    return buffer_[used_++];
  }

  std::uint64_t next_u64() noexcept {
    if (used_ + 2 <= kWords) {
      const std::uint64_t hi = buffer_[used_];
      const std::uint64_t lo = buffer_[used_ + 1];
      used_ += 2;
      return (hi << 32) | lo;
    }
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
  }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on (-1, 1).
  double uniform_symmetric() noexcept { return 2.0 * uniform() - 1.0; }

  /// Standard normal variate (ziggurat).
  double normal() { return boost::random::normal_distribution<double>()(*this); }

  /// Standard exponential variate (ziggurat).
  double exponential() { return boost::random::exponential_distribution<double>()(*this); }

 private:
  static constexpr unsigned kWords = 4;

  void refill() noexcept {
    const detail::Philox4x32::Block counter{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                            static_cast<std::uint32_t>(stream_id_),
                                            static_cast<std::uint32_t>(stream_id_ >> 32)};
    const detail::Philox4x32::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    buffer_ = detail::Philox4x32::generate(counter, key);
    ++block_;
    used_ = 0;
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, kWords> buffer_{};
  unsigned used_ = kWords;
};

}  // namespace lpball
