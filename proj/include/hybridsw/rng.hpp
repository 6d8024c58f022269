#ifndef HYBRIDSW_RNG_HPP_
#define HYBRIDSW_RNG_HPP_

#include <cstdint>
#include <limits>

namespace hybridsw {

/// Counter-based generator: output k of stream (seed, stream, substream) is a
/// pure function of those three values and k. Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream)
      : key_(mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^
                   mix64(stream + 0xd1b54a32d192ed03ULL) ^
                   mix64(substream + 0x8cb92ba72f3d8dd7ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return mix64(key_ + kGolden * counter_++); }

  std::uint64_t counter() const { return counter_; }

  /// splitmix64 finalizer.
  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Substream ids used by the path sampler.
inline constexpr std::uint64_t kBrownianSubstream = 0;
inline constexpr std::uint64_t kPoissonSubstream = 1;

}  // namespace hybridsw

#endif  // HYBRIDSW_RNG_HPP_
