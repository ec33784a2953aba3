#pragma once

#include <cstdint>
#include <random>

namespace roughlab {

/// Random stream identified by (seed, stream). Two generators built from the
/// same pair produce the same sequence regardless of which thread owns them.
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream), engine_(mix(seed, stream)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

  /// Child stream for nested sampling; deterministic in (seed, stream, k).
  SeededRng split(std::uint64_t k) const {
    return SeededRng(mix(seed_, stream_), k);
  }

 private:
  static std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    return splitmix(splitmix(seed) ^ (stream * 0xd1342543de82ef95ULL + 1));
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace roughlab
