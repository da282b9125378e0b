#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kslearn {

/// Strictly increasing breakpoints x_0 = a < ... < x_K = b with a polynomial degree.
/// Carries the clamped knot vector of the associated B-spline basis.
class Partition {
public:
  static constexpr int kMaxDegree = 7;

  Partition(std::vector<double> breakpoints, int degree = 3);

  /// `count` equally spaced breakpoints including both ends.
  static Partition uniform(double a, double b, std::size_t count, int degree = 3);

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  int degree() const { return degree_; }
  double a() const { return breakpoints_.front(); }
  double b() const { return breakpoints_.back(); }
  std::size_t intervals() const { return breakpoints_.size() - 1; }
  std::size_t basis_size() const { return intervals() + static_cast<std::size_t>(degree_); }

  /// [a x (degree+1), interior breakpoints, b x (degree+1)].
  const std::vector<double>& knots() const { return knots_; }

  /// Index k of the interval [x_k, x_{k+1}) containing clamp(r); b maps to the last interval.
  std::size_t find_interval(double r) const;

  double clamp(double r) const;

  /// Writes the degree+1 basis functions that can be nonzero at clamp(r) into
  /// `values` and returns the index of the first one. Cox-de Boor recursion.
  std::size_t eval_nonzero(double r, std::span<double> values) const;

  /// All n = basis_size() basis values at clamp(r).
  std::vector<double> eval_basis(double r) const;

  bool operator==(const Partition&) const = default;

private:
  std::vector<double> breakpoints_;
  int degree_;
  std::vector<double> knots_;
};

/// Free-function form of Partition::knots for a breakpoint list.
std::vector<double> clamped_knots(const Partition& partition);

/// Learned profile: a linear combination of the clamped basis on a partition.
class SplineModel {
public:
  SplineModel(Partition partition, std::vector<double> coefficients);

  const Partition& partition() const { return partition_; }
  const std::vector<double>& coefficients() const { return coefficients_; }

  /// sum_eta alpha_eta psi_eta(clamp(r)).
  double operator()(double r) const;

  bool operator==(const SplineModel&) const = default;

private:
  Partition partition_;
  std::vector<double> coefficients_;
};

inline double eval_spline(const SplineModel& model, double r) { return model(r); }

} // namespace kslearn
