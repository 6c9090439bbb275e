#pragma once

#include <cstdint>

namespace dialkit {

// SplitMix64 (Steele, Lea, Flood 2014). state += 0x9E3779B97F4A7C15, then the
// output is mix64(state). Fully specified so streams reproduce across
// implementations:
//   mix64(z): z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//             z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//             return z ^ (z >> 31);
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // 53-bit uniform in [0, 1): (next() >> 11) * 2^-53.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n), n > 0, by rejection on the top of the range.
  std::uint64_t below(std::uint64_t n);
  // Uniform on [-1, 1).
  double symmetric() { return uniform(-1.0, 1.0); }

 private:
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t z);

enum class SeedRole : std::uint64_t {
  state = 1,
  appearance = 2,
  style = 3,
  severity = 4,
  negative = 5,
  second_appearance = 6,
  shuffle = 7,
};

// derive_seed(m, i, r) = mix64(mix64(mix64(m + G) ^ (i + G)) ^ (r * G)),
// G = 0x9E3779B97F4A7C15.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, SeedRole role);

}  // namespace dialkit
