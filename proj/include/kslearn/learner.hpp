#pragma once

#include <Eigen/Dense>

#include "kslearn/bspline.hpp"
#include "kslearn/particles.hpp"

namespace kslearn {

/// Normal equations A alpha = b of the quadratic trajectory loss
/// 1/2 alpha^T A alpha - b^T alpha (the constant term is dropped).
struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

/// Drift not explained by the interaction: the mollified-diffusion velocity
/// -(1/w) dE_diff/dx for deterministic data, zero for stochastic data.
VectorField diffusion_correction(const ParticleConfiguration& frame, Mode mode,
                                 const KernelSpec& kernel);

/// Assembles A and b from the L forward differences of every trajectory.
/// Throws DomainError if the pairwise distances fall outside [a, b].
LinearSystem assemble(const TrajectoryDataset& data, const Partition& partition,
                      unsigned threads = 1);

struct SolveResult {
  Eigen::VectorXd alpha;
  bool stabilized = false; // Tikhonov fallback was used
  double lambda = 0.0;
};

/// Cholesky solve; on failure (A + lambda I) alpha = b with lambda = 1e-10 tr(A) / n.
SolveResult solve(const LinearSystem& system);

/// 1/2 alpha^T A alpha - b^T alpha.
double loss(const LinearSystem& system, const Eigen::VectorXd& alpha);

struct LearnDiagnostics {
  LinearSystem system;
  SolveResult solution;
};

SplineModel learn(const TrajectoryDataset& data, const Partition& partition, unsigned threads = 1,
                  LearnDiagnostics* diagnostics = nullptr);

/// Copy of `data` without its first `count` frames (times keep their values).
TrajectoryDataset drop_leading_frames(const TrajectoryDataset& data, std::size_t count);

/// Uniform partition with `count` breakpoints over the dataset's pairwise-distance range.
Partition data_partition(const TrajectoryDataset& data, std::size_t count, int degree = 3);

} // namespace kslearn
