#include "kslearn/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "kslearn/error.hpp"

namespace kslearn {

double EmpiricalDensity::edge(std::size_t k) const {
  return a + (b - a) * static_cast<double>(k) / static_cast<double>(bins());
}

double EmpiricalDensity::center(std::size_t k) const {
  return a + (b - a) * (static_cast<double>(k) + 0.5) / static_cast<double>(bins());
}

EmpiricalDensity pairwise_density(const TrajectoryDataset& data, std::size_t bins) {
  if (bins < 1)
    throw DomainError("density needs at least one bin");
  const DistanceRange range = pairwise_distance_range(data);
  EmpiricalDensity rho;
  rho.a = range.min;
  rho.b = range.max;
  rho.weights.assign(bins, 0.0);
  // a range at rounding level is a single distance
  const double width =
      rho.b - rho.a > 1e-12 * std::max(1.0, rho.b) ? rho.b - rho.a : 0.0;
  std::size_t total = 0;
  for (const auto& traj : data.trajectories)
    for (const auto& x : traj.frames)
      for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
          const double r = pair_distance(x, i, j);
          std::size_t k = 0;
          if (width > 0.0) {
            const double pos = (r - rho.a) / width * static_cast<double>(bins);
            k = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), bins - 1);
          }
          rho.weights[k] += 1.0;
          ++total;
        }
  for (double& w : rho.weights)
    w /= static_cast<double>(total);
  if (width == 0.0)
    rho.b = rho.a + 1.0; // keep a valid interval for a point mass
  return rho;
}

double traj_error_rel(const TrajectoryDataset& reference, const TrajectoryDataset& reconstructed) {
  if (reference.M() != reconstructed.M() || reference.L() != reconstructed.L() ||
      reference.N() != reconstructed.N() || reference.d() != reconstructed.d())
    throw DomainError("trajectory datasets have different shapes");
  if (reference.L() < 1)
    throw DomainError("trajectory error needs at least one step");
  for (std::size_t l = 0; l < reference.times.size(); ++l)
    if (reference.times[l] != reconstructed.times[l])
      throw DomainError("trajectory datasets have different observation times");

  const double dt = reference.dt();
  const double inv_n = 1.0 / static_cast<double>(reference.N());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t m = 0; m < reference.M(); ++m) {
    double diff_sum = 0.0;
    double ref_sum = 0.0;
    for (std::size_t l = 1; l <= reference.L(); ++l) {
      const auto& x = reference.trajectories[m].frames[l].raw();
      const auto& xh = reconstructed.trajectories[m].frames[l].raw();
      double dn = 0.0;
      double rn = 0.0;
      for (std::size_t q = 0; q < x.size(); ++q) {
        const double e = x[q] - xh[q];
        dn += e * e;
        rn += x[q] * x[q];
      }
      diff_sum += dn * inv_n * dt;
      ref_sum += rn * inv_n * dt;
    }
    num += std::sqrt(diff_sum);
    den += std::sqrt(ref_sum);
  }
  if (den == 0.0)
    throw DomainError("reference trajectories have zero norm");
  return num / den;
}

double profile_error_rel(const std::function<double(double)>& truth, const SplineModel& learned,
                         const EmpiricalDensity& density) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < density.bins(); ++k) {
    const double w = density.weights[k];
    if (w == 0.0)
      continue;
    const double r = density.center(k);
    const double t = truth(r);
    const double e = t - learned(r);
    num += e * e * r * r * w;
    den += t * t * r * r * w;
  }
  if (den == 0.0)
    throw DomainError("reference profile has zero L2(rho) norm");
  return std::sqrt(num / den);
}

} // namespace kslearn
