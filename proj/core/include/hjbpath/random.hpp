#pragma once

#include <cstdint>
#include <random>

namespace hjbpath {

/// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seeded normal-variate stream. Stream `index` of a given `seed` is
/// independent of how many other streams exist or in which order they are
/// consumed, so ensembles are reproducible under any parallel schedule.
///
/// Uniforms are built from the top 53 bits of mt19937_64 and normals use the
/// Box-Muller transform, so sequences do not depend on the standard
/// library's distribution implementations.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t index);

  /// Uniform in [0, 1).
  double uniform();
  /// Standard normal.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hjbpath
