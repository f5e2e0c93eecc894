#pragma once

#include <cstdint>
#include <random>

namespace netreg {

/// Seedable generator with a portable output sequence.
///
/// The engine is std::mt19937_64, whose output is fixed by the standard. The
/// distributions are implemented here rather than taken from <random>, whose
/// algorithms vary between standard libraries:
///   - uniform_int: rejection sampling on the top bits (unbiased),
///   - uniform01: 53 high bits scaled by 2^-53,
///   - normal: Marsaglia polar method, caching the second variate.
///
/// Replication r of an experiment with master seed s uses the substream
/// seeded with substream_seed(s, r) (SplitMix64 of s + golden-ratio * (r + 1)),
/// so replications can run in any order or in parallel.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform integer on the closed range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double uniform01();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace netreg
