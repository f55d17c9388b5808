#include "sliceq/rng.hpp"

#include <cmath>
#include <limits>

namespace sliceq {

namespace {

// Knuth's multiplication method is exact but loses range once exp(-mean)
// approaches denormals, so large means are split into independent chunks.
constexpr double kPoissonChunk = 30.0;

std::int64_t poisson_small(std::mt19937_64& engine, double mean) {
  const double limit = std::exp(-mean);
  std::int64_t k = 0;
  double product = 1.0;
  for (;;) {
    product *= static_cast<double>(engine() >> 11) * 0x1.0p-53;
    if (product <= limit) {
      return k;
    }
    ++k;
  }
}

}  // namespace

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::uniform_index(std::size_t n) {
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = engine_();
  while (x >= limit) {
    x = engine_();
  }
  return static_cast<std::size_t>(x % range);
}

std::int64_t Rng::poisson(double mean) {
  if (!(mean > 0.0)) {
    return 0;
  }
  std::int64_t total = 0;
  while (mean > kPoissonChunk) {
    total += poisson_small(engine_, kPoissonChunk);
    mean -= kPoissonChunk;
  }
  return total + poisson_small(engine_, mean);
}

}  // namespace sliceq
