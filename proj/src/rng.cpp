#include "kslearn/rng.hpp"

#include <cmath>
#include <numbers>

namespace kslearn {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::bits(Stream stream, std::uint64_t a, std::uint64_t b,
                               std::uint64_t c) const {
  std::uint64_t h = mix64(seed_ ^ mix64(static_cast<std::uint64_t>(stream)));
  h = mix64(h ^ a);
  h = mix64(h ^ (b * 0xd6e8feb86659fd93ULL));
  h = mix64(h ^ (c * 0xa0761d6478bd642fULL));
  return h;
}

double CounterRng::uniform(Stream stream, std::uint64_t a, std::uint64_t b,
                           std::uint64_t c) const {
  return (static_cast<double>(bits(stream, a, b, c) >> 11) + 0.5) * 0x1.0p-53;
}

std::array<double, 2> CounterRng::normal_pair(Stream stream, std::uint64_t a, std::uint64_t b,
                                              std::uint64_t c) const {
  const std::uint64_t h1 = bits(stream, a, b, 2 * c);
  const std::uint64_t h2 = bits(stream, a, b, 2 * c + 1);
  const double u1 = (static_cast<double>(h1 >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = (static_cast<double>(h2 >> 11) + 0.5) * 0x1.0p-53;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

} // namespace kslearn
