#ifndef SENTDOC_RNG_HPP
#define SENTDOC_RNG_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <utility>
#include <vector>

namespace sentdoc {

/// xoroshiro128++ generator. 16 bytes of state, identical sequences on
/// every platform, cheap to fork into independent streams. <random>
/// distributions are implementation-defined, so all sampling used for
/// reproducible results goes through this class.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0,1) with 53 random bits.
  double uniform();
  /// Uniform in [lo,hi).
  double uniform(double lo, double hi);
  /// Unbiased draw from {0,...,n-1}; n must be >= 1.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Independent stream keyed by this rng's seed material and the path
  /// values. Equal inputs give equal streams; the parent is not advanced.
  Rng stream(std::initializer_list<std::uint64_t> path) const;

  std::array<std::uint8_t, 16> state() const;
  static Rng from_state(const std::array<std::uint8_t, 16>& bytes);

  bool operator==(const Rng&) const = default;

 private:
  std::uint64_t s0_ = 0;
  std::uint64_t s1_ = 0;
};

/// SplitMix64 step; also used to mix labels into stream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// FNV-1a hash of a label, for deriving named substreams.
std::uint64_t label_hash(std::string_view label);

/// In-place Fisher-Yates shuffle with a fixed, portable visit order.
template <typename T>
void fisher_yates(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace sentdoc

#endif  // SENTDOC_RNG_HPP
