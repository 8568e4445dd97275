#include "sentdoc/rng.hpp"

namespace sentdoc {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t label_hash(std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  s0_ = splitmix64(sm);
  s1_ = splitmix64(sm);
  if (s0_ == 0 && s1_ == 0) s0_ = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s0_ + s1_, 17) + s0_;
  const std::uint64_t t = s1_ ^ s0_;
  s0_ = rotl(s0_, 49) ^ t ^ (t << 21);
  s1_ = rotl(t, 28);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  // Rejection sampling; threshold = 2^64 mod n.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

Rng Rng::stream(std::initializer_list<std::uint64_t> path) const {
  std::uint64_t sm = s0_ ^ rotl(s1_, 32);
  std::uint64_t acc = splitmix64(sm);
  for (std::uint64_t p : path) {
    sm = acc ^ p;
    acc = splitmix64(sm);
  }
  Rng out(0);
  std::uint64_t sm2 = acc;
  out.s0_ = splitmix64(sm2);
  out.s1_ = splitmix64(sm2);
  if (out.s0_ == 0 && out.s1_ == 0) out.s0_ = 0x9E3779B97F4A7C15ULL;
  return out;
}

std::array<std::uint8_t, 16> Rng::state() const {
  std::array<std::uint8_t, 16> bytes{};
  for (int i = 0; i < 8; ++i) {
    bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(s0_ >> (8 * i));
    bytes[static_cast<std::size_t>(8 + i)] = static_cast<std::uint8_t>(s1_ >> (8 * i));
  }
  return bytes;
}

Rng Rng::from_state(const std::array<std::uint8_t, 16>& bytes) {
  Rng out(0);
  out.s0_ = 0;
  out.s1_ = 0;
  for (int i = 7; i >= 0; --i) {
    out.s0_ = (out.s0_ << 8) | bytes[static_cast<std::size_t>(i)];
    out.s1_ = (out.s1_ << 8) | bytes[static_cast<std::size_t>(8 + i)];
  }
  if (out.s0_ == 0 && out.s1_ == 0) out.s0_ = 0x9E3779B97F4A7C15ULL;
  return out;
}

}  // namespace sentdoc
