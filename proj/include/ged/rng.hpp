#pragma once

#include <cstdint>
#include <random>

namespace ged {

/// Deterministic random stream. Gaussians use Box-Muller on explicit 53-bit
/// uniforms so byte-level reproducibility does not depend on the standard
/// library's distribution internals.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal draw.
  double normal();

 private:
  std::mt19937_64 eng_;
};

/// Mixes (master, a, b, c) into an independent stream seed; used to key
/// per-(step, example, purpose) substreams so evaluation order cannot change
/// the draws.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                         std::uint64_t c = 0);

/// Stream purposes used by the training loop.
enum : std::uint64_t {
  kStreamData = 0,
  kStreamLatent = 1,
  kStreamLatentPrime = 2,
  kStreamEval = 100,
};

}  // namespace ged
