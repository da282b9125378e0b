#include "kslearn/learner.hpp"

#include <array>
#include <cmath>
#include <string>

#include "kslearn/deterministic.hpp"
#include "kslearn/error.hpp"
#include "kslearn/parallel.hpp"

namespace kslearn {

VectorField diffusion_correction(const ParticleConfiguration& frame, Mode mode,
                                 const KernelSpec& kernel) {
  if (mode == Mode::stochastic)
    return VectorField(frame.dim(), frame.size());
  EnergyModel model;
  model.diffusion = Diffusion{kernel.m, kernel.h};
  EnergyEvaluator ev(std::move(model));
  VectorField g;
  ev.gradient(frame, g);
  const double inv_w = static_cast<double>(frame.size());
  for (double& v : g.raw())
    v *= -inv_w;
  return g;
}

namespace {

void check_range(const TrajectoryDataset& data, const Partition& partition) {
  const DistanceRange range = pairwise_distance_range(data, 0, data.L() - 1);
  const double slack = 1e-12 * (partition.b() - partition.a());
  if (range.min < partition.a() - slack || range.max > partition.b() + slack)
    throw DomainError("partition [" + std::to_string(partition.a()) + ", " +
                      std::to_string(partition.b()) +
                      "] does not cover the observed pairwise distances [" +
                      std::to_string(range.min) + ", " + std::to_string(range.max) + "]");
}

// Contribution of one trajectory, accumulated in a fixed order.
void assemble_trajectory(const TrajectoryDataset& data, std::size_t m, const Partition& partition,
                         Eigen::MatrixXd& a_out, Eigen::VectorXd& b_out) {
  const std::size_t n_basis = partition.basis_size();
  const std::size_t n = data.N();
  const int d = data.d();
  const double dt = data.dt();
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto p1 = static_cast<std::size_t>(partition.degree()) + 1;
  const auto& frames = data.trajectories[m].frames;

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_basis), d);
  Eigen::VectorXd target(d);
  std::array<double, Partition::kMaxDegree + 1> psi{};

  for (std::size_t l = 0; l + 1 < frames.size(); ++l) {
    const ParticleConfiguration& x = frames[l];
    const ParticleConfiguration& next = frames[l + 1];
    const VectorField fd = diffusion_correction(x, data.metadata.mode, data.metadata.kernel);
    for (std::size_t i = 0; i < n; ++i) {
      // Only rows lo..hi of g are touched; g is all zero between particles.
      std::size_t lo = n_basis;
      std::size_t hi = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i)
          continue;
        const double r = pair_distance(x, i, j);
        const std::size_t first = partition.eval_nonzero(r, psi);
        lo = std::min(lo, first);
        hi = std::max(hi, first + p1 - 1);
        for (std::size_t q = 0; q < p1; ++q) {
          const auto row = static_cast<Eigen::Index>(first + q);
          const double coeff = psi[q] * inv_n;
          for (int k = 0; k < d; ++k)
            g(row, k) += coeff * (x(j, k) - x(i, k));
        }
      }
      for (int k = 0; k < d; ++k)
        target(k) = (next(i, k) - x(i, k)) - fd(i, k) * dt;
      const auto lo_i = static_cast<Eigen::Index>(lo);
      const auto len = static_cast<Eigen::Index>(hi - lo + 1);
      auto rows = g.middleRows(lo_i, len);
      a_out.block(lo_i, lo_i, len, len).noalias() += dt * (rows * rows.transpose());
      b_out.segment(lo_i, len).noalias() += rows * target;
      rows.setZero();
    }
  }
}

} // namespace

LinearSystem assemble(const TrajectoryDataset& data, const Partition& partition,
                      unsigned threads) {
  data.validate();
  check_range(data, partition);
  const auto n_basis = static_cast<Eigen::Index>(partition.basis_size());
  std::vector<Eigen::MatrixXd> partial_a(data.M(), Eigen::MatrixXd::Zero(n_basis, n_basis));
  std::vector<Eigen::VectorXd> partial_b(data.M(), Eigen::VectorXd::Zero(n_basis));
  parallel_for(data.M(), threads, [&](std::size_t m) {
    assemble_trajectory(data, m, partition, partial_a[m], partial_b[m]);
  });

  LinearSystem sys{Eigen::MatrixXd::Zero(n_basis, n_basis), Eigen::VectorXd::Zero(n_basis)};
  for (std::size_t m = 0; m < data.M(); ++m) {
    sys.A += partial_a[m];
    sys.b += partial_b[m];
  }
  const double scale = 1.0 / (static_cast<double>(data.M()) * static_cast<double>(data.L()) *
                              static_cast<double>(data.N()));
  sys.A *= scale;
  sys.b *= scale;
  // Symmetrize away rounding differences between the two triangles.
  sys.A = 0.5 * (sys.A + sys.A.transpose()).eval();
  return sys;
}

SolveResult solve(const LinearSystem& system) {
  const auto n = system.A.rows();
  if (n == 0 || system.A.cols() != n || system.b.size() != n)
    throw DomainError("linear system has inconsistent dimensions");
  if (system.A.cwiseAbs().maxCoeff() == 0.0)
    throw DomainError("system matrix is zero: no data in the partition range");

  SolveResult result;
  Eigen::LLT<Eigen::MatrixXd> llt(system.A);
  if (llt.info() == Eigen::Success) {
    // Pivots at rounding level mean A is only semidefinite in floating point.
    const Eigen::VectorXd pivots = llt.matrixLLT().diagonal().array().square();
    const double scale = system.A.diagonal().cwiseAbs().maxCoeff();
    if (pivots.minCoeff() > 1e-15 * scale) {
      result.alpha = llt.solve(system.b);
      if (result.alpha.allFinite())
        return result;
    }
  }
  result.stabilized = true;
  result.lambda = 1e-10 * system.A.trace() / static_cast<double>(n);
  const Eigen::MatrixXd shifted =
      system.A + result.lambda * Eigen::MatrixXd::Identity(n, n);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
  result.alpha = ldlt.solve(system.b);
  if (!result.alpha.allFinite())
    throw NumericError("stabilized solve produced non-finite coefficients");
  return result;
}

double loss(const LinearSystem& system, const Eigen::VectorXd& alpha) {
  return 0.5 * alpha.dot(system.A * alpha) - system.b.dot(alpha);
}

SplineModel learn(const TrajectoryDataset& data, const Partition& partition, unsigned threads,
                  LearnDiagnostics* diagnostics) {
  LinearSystem sys = assemble(data, partition, threads);
  SolveResult sol = solve(sys);
  std::vector<double> coeffs(sol.alpha.data(), sol.alpha.data() + sol.alpha.size());
  if (diagnostics)
    *diagnostics = LearnDiagnostics{std::move(sys), std::move(sol)};
  return SplineModel(partition, std::move(coeffs));
}

TrajectoryDataset drop_leading_frames(const TrajectoryDataset& data, std::size_t count) {
  if (count == 0)
    return data;
  if (count + 2 > data.times.size())
    throw DomainError("dropping " + std::to_string(count) + " frames leaves fewer than two");
  TrajectoryDataset out;
  out.metadata = data.metadata;
  const auto skip = static_cast<std::ptrdiff_t>(count);
  out.times.assign(data.times.begin() + skip, data.times.end());
  out.trajectories.reserve(data.M());
  for (const Trajectory& t : data.trajectories)
    out.trajectories.push_back(Trajectory{{t.frames.begin() + skip, t.frames.end()}});
  return out;
}

Partition data_partition(const TrajectoryDataset& data, std::size_t count, int degree) {
  const DistanceRange range = pairwise_distance_range(data);
  return Partition::uniform(range.min, range.max, count, degree);
}

} // namespace kslearn
