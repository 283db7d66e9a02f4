#pragma once

// Deterministic per-trial random streams. The same (seed, trial) pair always
// yields the same draw sequence, on any platform, so Monte Carlo batches are
// reproducible regardless of how trials are distributed over workers.

#include <cstdint>
#include <random>

namespace lossyq {

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t trial = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    gen_.seed(seq);
  }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0,1) using the top 53 bits of one generator word.
  /// Avoids std::uniform_real_distribution, whose output is
  /// implementation-defined.
  double next_unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace lossyq
