#include "kslearn/profile.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "kslearn/simd/kernels.hpp"

namespace kslearn {

void RadialProfile::values_from_squared(std::span<const double> r2, std::span<double> out) const {
  for (std::size_t j = 0; j < r2.size(); ++j)
    out[j] = value(std::sqrt(r2[j]));
}

CutoffProfile::CutoffProfile(const KernelSpec& spec)
    : spec_(spec), law_(power_law(spec)), rc2_(spec.r_c() * spec.r_c()) {
  spec_.validate();
}

double CutoffProfile::value(double r) const { return profile_cutoff(spec_, r); }

double CutoffProfile::potential(double r) const { return potential_cutoff(spec_, r); }

void CutoffProfile::values_from_squared(std::span<const double> r2, std::span<double> out) const {
  simd::active_kernels().power_law(r2.data(), r2.size(), law_.coeff, rc2_, law_.power,
                                   out.data());
}

EpsilonProfile::EpsilonProfile(double chi, double eps) : chi_(chi), eps_(eps) {}

double EpsilonProfile::value(double r) const { return profile_epsilon(chi_, eps_, r); }

double EpsilonProfile::potential(double r) const { return potential_epsilon(chi_, eps_, r); }

void EpsilonProfile::values_from_squared(std::span<const double> r2, std::span<double> out) const {
  simd::active_kernels().shifted_inverse(r2.data(), r2.size(), chi_ / (2.0 * std::numbers::pi),
                                         eps_ * eps_, out.data());
}

SplineProfile::SplineProfile(SplineModel model)
    : model_(std::move(model)),
      stride_(static_cast<std::size_t>(model_.partition().degree()) + 1) {
  const auto& x = model_.partition().breakpoints();
  const std::size_t intervals = model_.partition().intervals();
  const auto p = static_cast<Eigen::Index>(stride_);
  poly_.assign(intervals * stride_, 0.0);
  cumulative_.assign(intervals + 1, 0.0);

  for (std::size_t k = 0; k < intervals; ++k) {
    const double lo = x[k];
    const double width = x[k + 1] - lo;
    // Chebyshev nodes keep the local Vandermonde system well conditioned.
    Eigen::MatrixXd vander(p, p);
    Eigen::VectorXd rhs(p);
    for (Eigen::Index q = 0; q < p; ++q) {
      const double s = p == 1 ? 0.5
                              : 0.5 - 0.5 * std::cos(std::numbers::pi * (2.0 * q + 1.0) /
                                                     (2.0 * static_cast<double>(p)));
      const double t = s * width;
      double power = 1.0;
      for (Eigen::Index c = 0; c < p; ++c, power *= s)
        vander(q, c) = power;
      rhs(q) = model_(lo + t);
    }
    const Eigen::VectorXd scaled = vander.partialPivLu().solve(rhs);
    double inv_width_pow = 1.0;
    double integral = 0.0;
    for (std::size_t c = 0; c < stride_; ++c, inv_width_pow /= width) {
      const double coeff = scaled(static_cast<Eigen::Index>(c)) * inv_width_pow;
      poly_[k * stride_ + c] = coeff;
      const double q = static_cast<double>(c);
      integral += coeff * (lo * std::pow(width, q + 1) / (q + 1) + std::pow(width, q + 2) / (q + 2));
    }
    cumulative_[k + 1] = cumulative_[k] + integral;
  }
}

double SplineProfile::value(double r) const { return model_(r); }

double SplineProfile::potential(double r) const {
  const Partition& part = model_.partition();
  const double a = part.a();
  const double b = part.b();
  if (r <= a)
    return 0.5 * model_(a) * (r * r - a * a);
  if (r >= b)
    return cumulative_.back() + 0.5 * model_(b) * (r * r - b * b);
  const std::size_t k = part.find_interval(r);
  const double lo = part.breakpoints()[k];
  const double t = r - lo;
  // integral_0^t sum_q c_q s^q (lo + s) ds
  double acc = 0.0;
  double tp = t;
  for (std::size_t c = 0; c < stride_; ++c) {
    const double q = static_cast<double>(c);
    acc += poly_[k * stride_ + c] * (lo * tp / (q + 1) + tp * t / (q + 2));
    tp *= t;
  }
  return cumulative_[k] + acc;
}

std::shared_ptr<const RadialProfile> make_reference_profile(const KernelSpec& spec) {
  if (spec.has_cutoff())
    return std::make_shared<CutoffProfile>(spec);
  return std::make_shared<EpsilonProfile>(spec.chi, spec.eps());
}

} // namespace kslearn
