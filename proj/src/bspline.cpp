#include "kslearn/bspline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "kslearn/error.hpp"

namespace kslearn {

Partition::Partition(std::vector<double> breakpoints, int degree)
    : breakpoints_(std::move(breakpoints)), degree_(degree) {
  if (breakpoints_.size() < 2)
    throw DomainError("partition needs at least 2 breakpoints");
  if (degree_ < 0 || degree_ > kMaxDegree)
    throw DomainError("spline degree must be in 0.." + std::to_string(kMaxDegree));
  for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
    if (!std::isfinite(breakpoints_[k]))
      throw DomainError("non-finite breakpoint");
    if (k > 0 && !(breakpoints_[k] > breakpoints_[k - 1]))
      throw DomainError("breakpoints must be strictly increasing (index " + std::to_string(k) +
                        ")");
  }
  const auto p = static_cast<std::size_t>(degree_);
  knots_.reserve(breakpoints_.size() + 2 * p);
  knots_.insert(knots_.end(), p, breakpoints_.front());
  knots_.insert(knots_.end(), breakpoints_.begin(), breakpoints_.end());
  knots_.insert(knots_.end(), p, breakpoints_.back());
}

Partition Partition::uniform(double a, double b, std::size_t count, int degree) {
  if (count < 2)
    throw DomainError("uniform partition needs at least 2 breakpoints");
  if (!(b > a))
    throw DomainError("uniform partition needs a < b");
  std::vector<double> x(count);
  const double step = (b - a) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k)
    x[k] = a + step * static_cast<double>(k);
  x.back() = b;
  return Partition(std::move(x), degree);
}

double Partition::clamp(double r) const { return std::clamp(r, a(), b()); }

std::size_t Partition::find_interval(double r) const {
  r = clamp(r);
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), r);
  const auto k = static_cast<std::size_t>(it - breakpoints_.begin());
  return std::min(k == 0 ? 0 : k - 1, intervals() - 1);
}

std::size_t Partition::eval_nonzero(double r, std::span<double> values) const {
  const double u = clamp(r);
  const std::size_t k = find_interval(u);
  const auto p = static_cast<std::size_t>(degree_);
  const std::size_t span = k + p; // knots_[span] <= u < knots_[span + 1]

  std::array<double, kMaxDegree + 1> left{};
  std::array<double, kMaxDegree + 1> right{};
  values[0] = 1.0;
  for (std::size_t j = 1; j <= p; ++j) {
    left[j] = u - knots_[span + 1 - j];
    right[j] = knots_[span + j] - u;
    double saved = 0.0;
    for (std::size_t q = 0; q < j; ++q) {
      const double temp = values[q] / (right[q + 1] + left[j - q]);
      values[q] = saved + right[q + 1] * temp;
      saved = left[j - q] * temp;
    }
    values[j] = saved;
  }
  return k;
}

std::vector<double> Partition::eval_basis(double r) const {
  std::vector<double> out(basis_size(), 0.0);
  std::array<double, kMaxDegree + 1> local{};
  const std::size_t first = eval_nonzero(r, local);
  for (int q = 0; q <= degree_; ++q)
    out[first + static_cast<std::size_t>(q)] = local[static_cast<std::size_t>(q)];
  return out;
}

std::vector<double> clamped_knots(const Partition& partition) { return partition.knots(); }

SplineModel::SplineModel(Partition partition, std::vector<double> coefficients)
    : partition_(std::move(partition)), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != partition_.basis_size())
    throw DomainError("spline needs " + std::to_string(partition_.basis_size()) +
                      " coefficients, got " + std::to_string(coefficients_.size()));
}

double SplineModel::operator()(double r) const {
  std::array<double, Partition::kMaxDegree + 1> local{};
  const std::size_t first = partition_.eval_nonzero(r, local);
  double acc = 0.0;
  for (int q = 0; q <= partition_.degree(); ++q)
    acc += coefficients_[first + static_cast<std::size_t>(q)] * local[static_cast<std::size_t>(q)];
  return acc;
}

} // namespace kslearn
