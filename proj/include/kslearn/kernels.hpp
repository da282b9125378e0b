#pragma once

#include <span>
#include <variant>

namespace kslearn {

struct Cutoff {
  double r_c = 0.05;
  bool operator==(const Cutoff&) const = default;
};

struct Epsilon {
  double eps = 0.01;
  bool operator==(const Epsilon&) const = default;
};

using Regularization = std::variant<Cutoff, Epsilon>;

/// Parameters of the built-in Keller-Segel interaction and the diffusion mollifier.
struct KernelSpec {
  int d = 2;
  double chi = 1.0;
  Regularization reg = Cutoff{};
  int m = 1;       // diffusion exponent, 1 (log entropy) or 2
  double h = 0.01; // mollifier bandwidth

  /// Throws DomainError if any invariant is violated.
  void validate() const;

  bool has_cutoff() const { return std::holds_alternative<Cutoff>(reg); }
  double r_c() const;
  double eps() const;

  bool operator==(const KernelSpec&) const = default;
};

/// Surface area of the unit sphere in R^d, d >= 3.
double surface_area(int d);

/// Attractive radial profile phi(r) = chi * c_d / r^p with p = max(d, 2), so that
/// grad W(x) = phi(|x|) x and the pair drift (x_j - x_i) phi points inward.
double profile_true(const KernelSpec& spec, double r);

/// Potential U with U'(r) = profile_true(r) * r.
double potential_true(const KernelSpec& spec, double r);

/// Profile with the plateau phi(r_c) below the cutoff radius.
double profile_cutoff(const KernelSpec& spec, double r);

/// C^1 potential of profile_cutoff: quadratic below r_c, potential_true above.
double potential_cutoff(const KernelSpec& spec, double r);

/// chi / (2 pi (r^2 + eps^2)).
double profile_epsilon(double chi, double eps, double r);

/// chi / (4 pi) log(r^2 + eps^2); its radial derivative is profile_epsilon * r.
double potential_epsilon(double chi, double eps, double r);

/// Gaussian mollifier K_h(x) = (2 pi h^2)^{-d/2} exp(-|x|^2 / 2h^2).
double mollifier(double h, int d, std::span<const double> x);

/// grad K_h(x) = -x / h^2 K_h(x), written into out (same length as x).
void mollifier_grad(double h, int d, std::span<const double> x, std::span<double> out);

/// Coefficient c_d and power p of the built-in profile chi * c_d / r^p.
struct PowerLaw {
  double coeff;
  int power;
};
PowerLaw power_law(const KernelSpec& spec);

} // namespace kslearn
