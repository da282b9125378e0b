#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "kslearn/bspline.hpp"
#include "kslearn/particles.hpp"

namespace kslearn {

/// Histogram of pairwise distances on [a, b] with P uniform bins, total mass 1.
struct EmpiricalDensity {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> weights;

  std::size_t bins() const { return weights.size(); }
  double edge(std::size_t k) const;
  double center(std::size_t k) const;
};

/// Uniformly weighted histogram over all (m, l, i < j) distances at all frames.
EmpiricalDensity pairwise_density(const TrajectoryDataset& data, std::size_t bins = 400);

/// Relative trajectory error: mean over m of sqrt(sum_{l>=1} |X - Xhat|_N^2 dt)
/// divided by the same functional of the reference.
double traj_error_rel(const TrajectoryDataset& reference, const TrajectoryDataset& reconstructed);

/// Relative L^2(rho) error of r phi(r): midpoint quadrature over the density bins.
double profile_error_rel(const std::function<double(double)>& truth, const SplineModel& learned,
                         const EmpiricalDensity& density);

} // namespace kslearn
