// SPDX-License-Identifier: Apache-2.0

#ifndef FEDDP_RNG_HPP
#define FEDDP_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace feddp {

/// Mixes a master seed with a path of stream identifiers (round, client id,
/// purpose tag, ...) into an independent 64-bit seed. Streams that differ in
/// any component are decorrelated, so changing one experiment knob does not
/// shift the randomness consumed elsewhere.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

/// Seeded random source. Integer and real draws are implemented here rather
/// than through <random> distributions so results are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Uniform real in [0, 1) with 53 bits of resolution.
  double uniform01();

  /// Standard normal draw (Box-Muller, no caching).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

  /// k distinct indices drawn uniformly from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

namespace stream {
// Purpose tags for derive_seed; values are part of the determinism contract.
inline constexpr std::uint64_t kRepeat = 0x7265706561740001ULL;
inline constexpr std::uint64_t kOversample = 0x6f76657273610002ULL;
inline constexpr std::uint64_t kSelect = 0x73656c6563740003ULL;
inline constexpr std::uint64_t kClientTrain = 0x636c69656e740004ULL;
inline constexpr std::uint64_t kDistillSubset = 0x64697374696c0005ULL;
inline constexpr std::uint64_t kServerTrain = 0x7365727665720006ULL;
inline constexpr std::uint64_t kCentralized = 0x63656e7472610007ULL;
}  // namespace stream

}  // namespace feddp

#endif  // FEDDP_RNG_HPP
