#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>

namespace batt {

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is identified by `(seed, stream_id)`; the i-th draw is a pure
/// function of `(seed, stream_id, i)`, so two streams with equal state
/// produce bit-identical sequences on every platform. Independent trials,
/// users and cells get their own `stream_id` (see `derive_stream_id`) and
/// therefore never share draws.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  // Number of 64-bit draws consumed so far.
  std::uint64_t position() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) noexcept { return uniform() < p; }
  // Uniform integer on [0, n); n must be positive.
  std::size_t below(std::size_t n) noexcept;

  // A child stream keyed on this stream's identity plus `label`. Does not
  // advance this stream.
  RngStream child(std::uint64_t label) const noexcept;

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t counter_ = 0;
};

// One Philox4x32-10 block for the given counter and key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

// Order-sensitive hash of labels into a stream id (splitmix64 finalizer chain).
std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> labels) noexcept;

}  // namespace batt
