#pragma once

#include <array>
#include <cstdint>

namespace seeclear {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Pure function of (counter, key).
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

std::uint64_t splitmix64(std::uint64_t x);

/// Map 64 random bits to (0, 1), never returning 0.
inline double bits_to_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Counter-based noise keyed by (seed, stream, step, index).
///
/// Every draw is a pure function of its key, so sampling order, thread
/// count, and partitioning never change the result.
class KeyedNormal {
 public:
  explicit KeyedNormal(std::uint64_t seed, std::uint32_t stream = 0) : seed_(seed), stream_(stream) {}

  double operator()(std::uint32_t step, std::uint64_t index) const;
  double uniform(std::uint32_t step, std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint32_t stream() const { return stream_; }
  KeyedNormal with_stream(std::uint32_t stream) const { return KeyedNormal(seed_, stream); }

 private:
  std::uint64_t seed_;
  std::uint32_t stream_;
};

/// Sequential view of a Philox stream; split() derives independent children.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t next_u64();
  double uniform();                       // (0, 1)
  double uniform(double lo, double hi);
  double normal();

  RandomStream split(std::uint64_t child) const;

 private:
  PhiloxKey key_;
  std::uint64_t stream_id_;
  std::uint64_t counter_ = 0;
  PhiloxCounter block_{};
  int used_ = 4;
};

}  // namespace seeclear
