#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kslearn/bspline.hpp"
#include "kslearn/kernels.hpp"
#include "kslearn/simd/kernels.hpp"

namespace kslearn {

/// N points in R^d, stored one axis per contiguous block (structure of arrays).
template <class Tag>
class BasicField {
public:
  BasicField() = default;
  BasicField(int d, std::size_t n) : d_(d), n_(n), data_(static_cast<std::size_t>(d) * n, 0.0) {}

  /// Builds from row-major input [x_0, x_1, ...] with d values per point.
  static BasicField from_rows(int d, std::span<const double> rows) {
    BasicField f(d, rows.size() / static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < f.n_; ++i)
      for (int k = 0; k < d; ++k)
        f(i, k) = rows[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)];
    return f;
  }

  int dim() const { return d_; }
  std::size_t size() const { return n_; }

  double& operator()(std::size_t i, int k) { return data_[static_cast<std::size_t>(k) * n_ + i]; }
  double operator()(std::size_t i, int k) const {
    return data_[static_cast<std::size_t>(k) * n_ + i];
  }

  std::span<double> axis(int k) { return {data_.data() + static_cast<std::size_t>(k) * n_, n_}; }
  std::span<const double> axis(int k) const {
    return {data_.data() + static_cast<std::size_t>(k) * n_, n_};
  }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  simd::Coords coords() const {
    simd::Coords c;
    c.d = d_;
    c.n = n_;
    for (int k = 0; k < d_; ++k)
      c.axis[static_cast<std::size_t>(k)] = data_.data() + static_cast<std::size_t>(k) * n_;
    return c;
  }

  bool all_finite() const;

  bool operator==(const BasicField&) const = default;

private:
  int d_ = 0;
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct PositionTag;
struct VectorTag;

/// Particle positions at one instant; particles carry uniform mass 1/N.
using ParticleConfiguration = BasicField<PositionTag>;
/// Per-particle vectors (gradients, drifts, noise).
using VectorField = BasicField<VectorTag>;

extern template class BasicField<PositionTag>;
extern template class BasicField<VectorTag>;

double pair_distance(const ParticleConfiguration& x, std::size_t i, std::size_t j);

/// Mean over i < j of |x_i - x_j|.
double mean_pairwise_distance(const ParticleConfiguration& x);

struct Trajectory {
  std::vector<ParticleConfiguration> frames;
  bool operator==(const Trajectory&) const = default;
};

enum class Mode { deterministic, stochastic };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& s);

struct DatasetMetadata {
  Mode mode = Mode::deterministic;
  KernelSpec kernel;
  double eta = 0.0;
  std::uint64_t seed = 0;
  double tau = 1e-4;
  double dt_obs = 0.01;
  double T = 0.2;
  /// Interaction profile used instead of the built-in kernel, if any.
  std::optional<SplineModel> profile_model;
  /// Serialized JSON of the configuration that produced the data.
  std::string config_echo = "{}";

  bool operator==(const DatasetMetadata&) const = default;
};

/// M trajectories, each with L+1 frames of N particles in R^d.
struct TrajectoryDataset {
  DatasetMetadata metadata;
  std::vector<double> times;
  std::vector<Trajectory> trajectories;

  std::size_t M() const { return trajectories.size(); }
  std::size_t L() const { return times.empty() ? 0 : times.size() - 1; }
  std::size_t N() const;
  int d() const;
  /// Uniform observation spacing t_1 - t_0.
  double dt() const;

  /// Throws DomainError on ragged shapes, non-uniform times or M, L < 1, N < 2.
  void validate() const;

  bool operator==(const TrajectoryDataset&) const = default;
};

struct DistanceRange {
  double min;
  double max;
};

/// Min and max of |x_i - x_j|, i != j, over the frames [first_frame, last_frame]
/// of every trajectory (all frames by default).
DistanceRange pairwise_distance_range(const TrajectoryDataset& data, std::size_t first_frame = 0,
                                      std::optional<std::size_t> last_frame = std::nullopt);

} // namespace kslearn
