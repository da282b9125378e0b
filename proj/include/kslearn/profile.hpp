#pragma once

#include <memory>
#include <span>
#include <vector>

#include "kslearn/bspline.hpp"
#include "kslearn/kernels.hpp"

namespace kslearn {

/// Radial interaction profile phi together with a potential U, U'(r) = phi(r) r.
/// Pair drift on particle i from j is phi(|x_j - x_i|) (x_j - x_i) / N.
class RadialProfile {
public:
  virtual ~RadialProfile() = default;

  virtual double value(double r) const = 0;
  virtual double potential(double r) const = 0;

  /// out[j] = value(sqrt(r2[j])).
  virtual void values_from_squared(std::span<const double> r2, std::span<double> out) const;
};

/// Built-in Keller-Segel profile with a plateau below r_c.
class CutoffProfile final : public RadialProfile {
public:
  explicit CutoffProfile(const KernelSpec& spec);
  double value(double r) const override;
  double potential(double r) const override;
  void values_from_squared(std::span<const double> r2, std::span<double> out) const override;

private:
  KernelSpec spec_;
  PowerLaw law_;
  double rc2_;
};

/// chi / (2 pi (r^2 + eps^2)).
class EpsilonProfile final : public RadialProfile {
public:
  EpsilonProfile(double chi, double eps);
  double value(double r) const override;
  double potential(double r) const override;
  void values_from_squared(std::span<const double> r2, std::span<double> out) const override;

private:
  double chi_;
  double eps_;
};

/// Learned spline profile, extended by constants outside [a, b]. The potential
/// is integrated exactly from a piecewise power-form copy of the spline.
class SplineProfile final : public RadialProfile {
public:
  explicit SplineProfile(SplineModel model);
  double value(double r) const override;
  double potential(double r) const override;

  const SplineModel& model() const { return model_; }

private:
  SplineModel model_;
  // Per interval k: coefficients c_q of sum_q c_q (r - x_k)^q.
  std::vector<double> poly_;
  std::vector<double> cumulative_; // potential at each breakpoint, zero at a
  std::size_t stride_;
};

/// Cutoff or epsilon profile, following the regularization of `spec`.
std::shared_ptr<const RadialProfile> make_reference_profile(const KernelSpec& spec);

} // namespace kslearn
