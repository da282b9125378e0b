#include "kslearn/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kslearn/error.hpp"

namespace kslearn {

using std::numbers::pi;

void KernelSpec::validate() const {
  if (d < 1 || d > 4)
    throw DomainError("kernel dimension must be in 1..4, got " + std::to_string(d));
  if (!(chi > 0.0))
    throw DomainError("chi must be positive");
  if (!(h > 0.0))
    throw DomainError("mollifier bandwidth h must be positive");
  if (m != 1 && m != 2)
    throw DomainError("diffusion exponent m must be 1 or 2");
  if (has_cutoff() ? !(r_c() > 0.0) : !(eps() > 0.0))
    throw DomainError("regularization length must be positive");
}

double KernelSpec::r_c() const {
  if (const auto* c = std::get_if<Cutoff>(&reg))
    return c->r_c;
  throw DomainError("kernel has no cutoff radius");
}

double KernelSpec::eps() const {
  if (const auto* e = std::get_if<Epsilon>(&reg))
    return e->eps;
  throw DomainError("kernel has no epsilon regularization");
}

double surface_area(int d) {
  if (d < 3)
    throw DomainError("surface_area requires d >= 3, got " + std::to_string(d));
  return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
}

PowerLaw power_law(const KernelSpec& spec) {
  switch (spec.d) {
  case 1:
    return {2.0 * spec.chi, 2};
  case 2:
    return {spec.chi / (2.0 * pi), 2};
  default:
    return {spec.chi / surface_area(spec.d), spec.d};
  }
}

double profile_true(const KernelSpec& spec, double r) {
  if (!(r > 0.0))
    throw DomainError("profile_true is singular at r <= 0");
  const auto [c, p] = power_law(spec);
  return c / std::pow(r, p);
}

double potential_true(const KernelSpec& spec, double r) {
  if (!(r > 0.0))
    throw DomainError("potential_true is singular at r <= 0");
  const auto [c, p] = power_law(spec);
  if (p == 2)
    return c * std::log(r);
  return c * std::pow(r, 2 - p) / (2 - p);
}

double profile_cutoff(const KernelSpec& spec, double r) {
  const double rc = spec.r_c();
  return profile_true(spec, r > rc ? r : rc);
}

double potential_cutoff(const KernelSpec& spec, double r) {
  const double rc = spec.r_c();
  if (r > rc)
    return potential_true(spec, r);
  return potential_true(spec, rc) + 0.5 * profile_true(spec, rc) * (r * r - rc * rc);
}

double profile_epsilon(double chi, double eps, double r) {
  return chi / (2.0 * pi * (r * r + eps * eps));
}

double potential_epsilon(double chi, double eps, double r) {
  return chi / (4.0 * pi) * std::log(r * r + eps * eps);
}

double mollifier(double h, int d, std::span<const double> x) {
  double r2 = 0.0;
  for (double xi : x)
    r2 += xi * xi;
  return std::pow(2.0 * pi * h * h, -0.5 * d) * std::exp(-r2 / (2.0 * h * h));
}

void mollifier_grad(double h, int d, std::span<const double> x, std::span<double> out) {
  const double k = mollifier(h, d, x);
  const double s = -k / (h * h);
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = s * x[i];
}

} // namespace kslearn
