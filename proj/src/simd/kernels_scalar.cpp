#include <algorithm>
#include <cmath>

#include "kslearn/simd/kernels.hpp"

namespace kslearn::simd {
namespace {

void squared_distances(const Coords& x, std::size_t i, double* out) {
  std::fill(out, out + x.n, 0.0);
  for (int k = 0; k < x.d; ++k) {
    const double* a = x.axis[k];
    const double xi = a[i];
    for (std::size_t j = 0; j < x.n; ++j) {
      const double diff = a[j] - xi;
      out[j] += diff * diff;
    }
  }
}

void exp_neg_scaled(const double* in, std::size_t n, double scale, double* out) {
  for (std::size_t j = 0; j < n; ++j)
    out[j] = std::exp(-scale * in[j]);
}

void power_law(const double* r2, std::size_t n, double coeff, double floor2, int power,
               double* out) {
  for (std::size_t j = 0; j < n; ++j) {
    const double s = std::max(r2[j], floor2);
    switch (power) {
    case 2:
      out[j] = coeff / s;
      break;
    case 3:
      out[j] = coeff / (s * std::sqrt(s));
      break;
    default:
      out[j] = coeff / (s * s);
      break;
    }
  }
}

void shifted_inverse(const double* r2, std::size_t n, double coeff, double shift, double* out) {
  for (std::size_t j = 0; j < n; ++j)
    out[j] = coeff / (r2[j] + shift);
}

void weighted_displacement(const Coords& x, std::size_t i, const double* w, double* out) {
  for (int k = 0; k < x.d; ++k) {
    const double* a = x.axis[k];
    const double xi = a[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < x.n; ++j)
      acc += w[j] * (a[j] - xi);
    out[k] = acc;
  }
}

double sum(const double* v, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    acc += v[j];
  return acc;
}

} // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",        squared_distances,     exp_neg_scaled, power_law,
      shifted_inverse, weighted_displacement, sum,
  };
  return table;
}

} // namespace kslearn::simd
