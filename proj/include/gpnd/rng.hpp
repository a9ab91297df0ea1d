#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace gpnd {

/// Seed for every random stream in the library.
struct Seed {
  std::uint64_t value = 0;
  bool operator==(const Seed&) const = default;
};

/// Per-purpose sub-seed: the top-level seed XOR a fixed purpose constant.
enum class SeedPurpose : std::uint64_t {
  init_encoder = 0x51A7E5C0DE000001ULL,
  init_decoder = 0x51A7E5C0DE000002ULL,
  init_disc_z = 0x51A7E5C0DE000003ULL,
  init_disc_x = 0x51A7E5C0DE000004ULL,
  training = 0x51A7E5C0DE000005ULL,
  synthetic = 0x51A7E5C0DE000006ULL,
  folds = 0x51A7E5C0DE000007ULL,
  validation_outliers = 0x51A7E5C0DE000008ULL,
  test_outliers = 0x51A7E5C0DE000009ULL,
  subsample = 0x51A7E5C0DE00000AULL,
};

inline Seed derive(Seed s, SeedPurpose p) { return Seed{s.value ^ static_cast<std::uint64_t>(p)}; }
inline Seed derive(Seed s, SeedPurpose p, std::uint64_t index) {
  return Seed{s.value ^ static_cast<std::uint64_t>(p) ^ (index * 0x9E3779B97F4A7C15ULL)};
}

/// xoshiro256** (Blackman & Vigna), state expanded from the seed with
/// splitmix64. Normals come from the Box-Muller transform, two per pair of
/// uniforms, so the stream depends only on the seed and the libm in use.
class Rng {
 public:
  explicit Rng(Seed seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Uniform integer in [0, n), n >= 1, without modulo bias.
  std::size_t below(std::size_t n);

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

}  // namespace gpnd
