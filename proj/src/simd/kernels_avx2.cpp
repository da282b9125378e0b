// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "kslearn/simd/kernels.hpp"

namespace kslearn::simd {
namespace {

constexpr std::size_t kWidth = 4;

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d pow2i(__m128i k) {
  const __m256i biased = _mm256_add_epi64(_mm256_cvtepi32_epi64(k), _mm256_set1_epi64x(1023));
  return _mm256_castsi256_pd(_mm256_slli_epi64(biased, 52));
}

// exp(x) by range reduction x = n ln2 + r, |r| <= ln2/2, and a degree-13 Taylor
// polynomial (truncation below 1e-17 relative). 2^n is applied as two factors so
// that results in the subnormal range are still produced.
inline __m256d exp256(__m256d x) {
  x = _mm256_max_pd(x, _mm256_set1_pd(-746.0));
  x = _mm256_min_pd(x, _mm256_set1_pd(709.7));
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.90821492927058770002e-10), r);

  static constexpr double inv_fact[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
      1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
      1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
      1.0,                1.0,
  };
  __m256d p = _mm256_set1_pd(inv_fact[0]);
  for (std::size_t c = 1; c < std::size(inv_fact); ++c)
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(inv_fact[c]));

  const __m128i ni = _mm256_cvtpd_epi32(n);
  const __m128i n1 = _mm_srai_epi32(ni, 1);
  const __m128i n2 = _mm_sub_epi32(ni, n1);
  return _mm256_mul_pd(_mm256_mul_pd(p, pow2i(n1)), pow2i(n2));
}

void squared_distances(const Coords& x, std::size_t i, double* out) {
  const std::size_t vec_end = x.n - x.n % kWidth;
  for (std::size_t j = 0; j < vec_end; j += kWidth) {
    __m256d acc = _mm256_setzero_pd();
    for (int k = 0; k < x.d; ++k) {
      const __m256d diff =
          _mm256_sub_pd(_mm256_loadu_pd(x.axis[k] + j), _mm256_set1_pd(x.axis[k][i]));
      acc = _mm256_fmadd_pd(diff, diff, acc);
    }
    _mm256_storeu_pd(out + j, acc);
  }
  for (std::size_t j = vec_end; j < x.n; ++j) {
    double acc = 0.0;
    for (int k = 0; k < x.d; ++k) {
      const double diff = x.axis[k][j] - x.axis[k][i];
      acc = std::fma(diff, diff, acc);
    }
    out[j] = acc;
  }
}

void exp_neg_scaled(const double* in, std::size_t n, double scale, double* out) {
  const std::size_t vec_end = n - n % kWidth;
  const __m256d s = _mm256_set1_pd(-scale);
  for (std::size_t j = 0; j < vec_end; j += kWidth)
    _mm256_storeu_pd(out + j, exp256(_mm256_mul_pd(s, _mm256_loadu_pd(in + j))));
  if (vec_end < n) {
    alignas(32) double tail[kWidth] = {0.0, 0.0, 0.0, 0.0};
    std::copy(in + vec_end, in + n, tail);
    alignas(32) double res[kWidth];
    _mm256_store_pd(res, exp256(_mm256_mul_pd(s, _mm256_load_pd(tail))));
    std::copy(res, res + (n - vec_end), out + vec_end);
  }
}

inline __m256d power_law_lane(__m256d r2, __m256d coeff, __m256d floor2, int power) {
  const __m256d s = _mm256_max_pd(r2, floor2);
  switch (power) {
  case 2:
    return _mm256_div_pd(coeff, s);
  case 3:
    return _mm256_div_pd(coeff, _mm256_mul_pd(s, _mm256_sqrt_pd(s)));
  default:
    return _mm256_div_pd(coeff, _mm256_mul_pd(s, s));
  }
}

void power_law(const double* r2, std::size_t n, double coeff, double floor2, int power,
               double* out) {
  const std::size_t vec_end = n - n % kWidth;
  const __m256d c = _mm256_set1_pd(coeff);
  const __m256d f = _mm256_set1_pd(floor2);
  for (std::size_t j = 0; j < vec_end; j += kWidth)
    _mm256_storeu_pd(out + j, power_law_lane(_mm256_loadu_pd(r2 + j), c, f, power));
  for (std::size_t j = vec_end; j < n; ++j) {
    const double s = std::max(r2[j], floor2);
    out[j] = power == 2 ? coeff / s : power == 3 ? coeff / (s * std::sqrt(s)) : coeff / (s * s);
  }
}

void shifted_inverse(const double* r2, std::size_t n, double coeff, double shift, double* out) {
  const std::size_t vec_end = n - n % kWidth;
  const __m256d c = _mm256_set1_pd(coeff);
  const __m256d sh = _mm256_set1_pd(shift);
  for (std::size_t j = 0; j < vec_end; j += kWidth)
    _mm256_storeu_pd(out + j, _mm256_div_pd(c, _mm256_add_pd(_mm256_loadu_pd(r2 + j), sh)));
  for (std::size_t j = vec_end; j < n; ++j)
    out[j] = coeff / (r2[j] + shift);
}

void weighted_displacement(const Coords& x, std::size_t i, const double* w, double* out) {
  const std::size_t vec_end = x.n - x.n % kWidth;
  for (int k = 0; k < x.d; ++k) {
    const double* a = x.axis[k];
    const __m256d xi = _mm256_set1_pd(a[i]);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < vec_end; j += kWidth)
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + j), _mm256_sub_pd(_mm256_loadu_pd(a + j), xi),
                            acc);
    double total = hsum(acc);
    for (std::size_t j = vec_end; j < x.n; ++j)
      total = std::fma(w[j], a[j] - a[i], total);
    out[k] = total;
  }
}

double sum(const double* v, std::size_t n) {
  const std::size_t vec_end = n - n % kWidth;
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t j = 0; j < vec_end; j += kWidth)
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(v + j));
  double total = hsum(acc);
  for (std::size_t j = vec_end; j < n; ++j)
    total += v[j];
  return total;
}

} // namespace

namespace detail {
const KernelTable& avx2_table() {
  static const KernelTable table{
      "avx2",          squared_distances,     exp_neg_scaled, power_law,
      shifted_inverse, weighted_displacement, sum,
  };
  return table;
}
} // namespace detail

} // namespace kslearn::simd
