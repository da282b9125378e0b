#pragma once

// Data-parallel inner loops over particle pairs. Every kernel has a scalar
// reference implementation; an AVX2 variant is selected at runtime when the CPU
// supports it. All kernels read structure-of-arrays coordinates.

#include <array>
#include <cstddef>
#include <string_view>

namespace kslearn::simd {

/// Non-owning view of N points in R^d stored one axis per contiguous array.
struct Coords {
  std::array<const double*, 4> axis{};
  int d = 0;
  std::size_t n = 0;
};

struct KernelTable {
  std::string_view name;

  /// out[j] = |x_j - x_i|^2 for j in [0, n).
  void (*squared_distances)(const Coords& x, std::size_t i, double* out);

  /// out[j] = exp(-scale * in[j]).
  void (*exp_neg_scaled)(const double* in, std::size_t n, double scale, double* out);

  /// out[j] = coeff / max(r2[j], floor2)^(power / 2) for power in {2, 3, 4}.
  void (*power_law)(const double* r2, std::size_t n, double coeff, double floor2, int power,
                    double* out);

  /// out[j] = coeff / (r2[j] + shift).
  void (*shifted_inverse)(const double* r2, std::size_t n, double coeff, double shift,
                          double* out);

  /// out[k] = sum_j w[j] (x_j[k] - x_i[k]) for k < d.
  void (*weighted_displacement)(const Coords& x, std::size_t i, const double* w, double* out);

  double (*sum)(const double* v, std::size_t n);
};

const KernelTable& scalar_kernels();

/// nullptr when the build has no AVX2 variant or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

/// Table used by the library. Defaults to the widest supported variant; the
/// environment variable KSLEARN_SIMD=scalar forces the reference kernels.
const KernelTable& active_kernels();

/// Overrides the active table (tests, benchmarks). Not thread-safe against
/// concurrent kernel use.
void set_active_kernels(const KernelTable& table);

} // namespace kslearn::simd
