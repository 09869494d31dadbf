#include "seeclear/rng.hpp"

#include <cmath>
#include <numbers>

namespace seeclear {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

PhiloxKey key_from_seed(std::uint64_t seed) {
  const std::uint64_t mixed = splitmix64(seed);
  return {static_cast<std::uint32_t>(mixed), static_cast<std::uint32_t>(mixed >> 32)};
}

double box_muller(std::uint64_t a, std::uint64_t b) {
  const double u1 = bits_to_unit(a);
  const double u2 = bits_to_unit(b);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double KeyedNormal::operator()(std::uint32_t step, std::uint64_t index) const {
  const auto r = philox4x32_10(
      {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), step, stream_},
      key_from_seed(seed_));
  return box_muller((static_cast<std::uint64_t>(r[1]) << 32) | r[0],
                    (static_cast<std::uint64_t>(r[3]) << 32) | r[2]);
}

double KeyedNormal::uniform(std::uint32_t step, std::uint64_t index) const {
  const auto r = philox4x32_10(
      {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), step, stream_},
      key_from_seed(seed_ ^ 0x5bd1e995ULL));
  return bits_to_unit((static_cast<std::uint64_t>(r[1]) << 32) | r[0]);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : key_(key_from_seed(seed)), stream_id_(stream_id) {}

std::uint64_t RandomStream::next_u64() {
  if (used_ >= 4) {
    block_ = philox4x32_10({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                            static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)},
                           key_);
    ++counter_;
    used_ = 0;
  }
  const std::uint64_t v = (static_cast<std::uint64_t>(block_[used_ + 1]) << 32) | block_[used_];
  used_ += 2;
  return v;
}

double RandomStream::uniform() { return bits_to_unit(next_u64()); }

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RandomStream::normal() {
  const std::uint64_t a = next_u64();
  const std::uint64_t b = next_u64();
  return box_muller(a, b);
}

RandomStream RandomStream::split(std::uint64_t child) const {
  const std::uint64_t parent = (static_cast<std::uint64_t>(key_[1]) << 32) | key_[0];
  return RandomStream(splitmix64(parent ^ splitmix64(stream_id_ + 0x632BE59BD9B4E019ULL)) ^ child,
                      splitmix64(child));
}

}  // namespace seeclear
