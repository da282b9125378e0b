#pragma once

#include <array>
#include <cstdint>

namespace kslearn {

/// Counter-based generator: every draw is a pure function of (seed, stream,
/// counters), so draws can be made in any order or from any thread.
class CounterRng {
public:
  enum class Stream : std::uint64_t { initial_positions = 1, brownian = 2 };

  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(Stream stream, std::uint64_t a, std::uint64_t b, std::uint64_t c) const;

  /// Uniform on the open interval (0, 1).
  double uniform(Stream stream, std::uint64_t a, std::uint64_t b, std::uint64_t c) const;

  /// Two independent standard normals (Box-Muller).
  std::array<double, 2> normal_pair(Stream stream, std::uint64_t a, std::uint64_t b,
                                    std::uint64_t c) const;

private:
  std::uint64_t seed_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

} // namespace kslearn
