#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace sliceq {

/// Seeded random source shared by the simulator and the agent.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The variates below are drawn with fixed algorithms rather than
/// the <random> distributions, whose output is implementation-defined, so a
/// seed reproduces the same run with any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Poisson variate with the given mean (>= 0).
  std::int64_t poisson(double mean);

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sliceq
