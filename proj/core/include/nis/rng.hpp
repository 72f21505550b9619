#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace nis {

/// Counter-based random stream built on Philox4x32-10.
///
/// A stream is identified by (seed, stream id). The seed is the Philox key;
/// the 128-bit counter is split into a 64-bit stream id (high words) and a
/// 64-bit block index (low words). Two streams with the same seed and
/// different ids therefore never share a counter value, and each stream can
/// draw 2^64 blocks before wrapping.
///
/// split(child) derives a new stream id by hashing (id, child), so
/// per-repetition and per-chain sub-streams are reproducible from the
/// master seed alone. Instances are single-owner and not thread-safe.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : seed_(seed), stream_id_(stream_id) {}

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Independent child stream. The parent's position is not consumed.
  [[nodiscard]] RngStream split(std::uint64_t child) const noexcept;

  result_type operator()() noexcept { return next_u64(); }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;

  double normal() noexcept;

  /// Gamma with the given shape and scale (mean = shape * scale).
  double gamma(double shape, double scale = 1.0);

  double beta(double a, double b);

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

/// SplitMix64 finaliser; exposed for seed derivation in the harness.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace nis
