#pragma once

#include <cstdint>
#include <vector>

#include "admmnn/linalg.hpp"

namespace admmnn {

/// xoshiro256** generator, state seeded from a 64-bit value through
/// SplitMix64. The output stream depends only on the seed.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits; one draw.
  double next_uniform();
  /// Uniform integer in [0, bound); one draw (multiply-shift reduction).
  std::uint64_t next_below(std::uint64_t bound);
  /// Standard normal via Box-Muller, cosine branch only; exactly two draws.
  double next_gaussian();

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

/// Mixes a base seed with a stream tag into an independent seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

/// rows x cols matrix of i.i.d. N(0, std^2) entries, filled row-major.
/// Consumes exactly 2 * rows * cols draws from rng.
DenseMatrix gaussian_matrix(SeededRng& rng, std::size_t rows, std::size_t cols, double std);

/// Fisher-Yates shuffle of [0, n); n - 1 draws.
std::vector<std::size_t> random_permutation(SeededRng& rng, std::size_t n);

}  // namespace admmnn
