#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kslearn/adaptive.hpp"
#include "kslearn/io.hpp"
#include "kslearn/metrics.hpp"
#include "kslearn/particles.hpp"

namespace kslearn {

struct BasisChoice {
  bool adaptive = false;
  std::size_t count = 30; // uniform breakpoints
  double tol = 0.01;
  int max_iter = 6;
  std::size_t initial_count = 8;
  std::size_t max_breakpoints = 0;
};

struct ExperimentConfig {
  Mode mode = Mode::deterministic;
  KernelSpec kernel{2, 1.0, Cutoff{0.05}, 1, 0.01};
  std::size_t N = 50;
  std::size_t M = 500;
  double T = 0.2;
  double dt_obs = 0.01;
  double tau = 1e-4;
  double eta = 0.01;
  std::size_t P = 400;
  BasisChoice basis;
  /// Learning uses frames learn_from_frame..L; the uniformly sampled initial
  /// frame sits in a stiff transient of the mollified diffusion.
  std::size_t learn_from_frame = 1;
  std::uint64_t seed = 0;
  std::string output = "out";
  double inner_tol = -1.0;
  int inner_max_iters = 500;
  /// Overrides the built-in interaction when set.
  std::optional<SplineModel> profile_model;

  void validate() const;
};

/// Missing fields take the defaults above. A string `profile_model` is read as a
/// path relative to `base_dir`.
ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {});
json to_json(const ExperimentConfig& config);

/// Output directory, prefixed by $KSLEARN_OUTPUT_ROOT when that is set and the
/// path is relative.
std::filesystem::path resolve_output(const std::filesystem::path& path);

/// Uniform positions in [0,1]^d for trajectory m.
ParticleConfiguration initial_positions(std::uint64_t seed, std::uint64_t m, int d, std::size_t n);

TrajectoryDataset generate_dataset(const ExperimentConfig& config, unsigned threads = 1);

/// Reference interaction of a dataset (the override model if present).
std::function<double(double)> truth_profile(const DatasetMetadata& metadata);

/// Re-simulates every trajectory from its initial frame with the learned profile
/// in place of the reference one; stochastic runs reuse the reference noise.
TrajectoryDataset reconstruct(const TrajectoryDataset& reference, const SplineModel& model,
                              unsigned threads = 1);

struct Evaluation {
  double traj_err_rel = 0.0;
  double profile_err_rel = 0.0;
  EmpiricalDensity density;
  TrajectoryDataset reconstructed;
};

Evaluation evaluate(const TrajectoryDataset& reference, const SplineModel& model,
                    std::size_t bins = 400, unsigned threads = 1);

json report_json(const TrajectoryDataset& reference, const SplineModel& model,
                 const Evaluation& evaluation);

/// Writes report.json, profile.csv, density.csv and trajectories.csv into `dir`.
void write_evaluation(const std::filesystem::path& dir, const TrajectoryDataset& reference,
                      const SplineModel& model, const Evaluation& evaluation);

struct LearnOutcome {
  SplineModel model;
  std::optional<RefineResult> refinement;
};

/// Learns from frames first_frame..L of `data`.
LearnOutcome learn_with_basis(const TrajectoryDataset& data, const BasisChoice& basis,
                              std::size_t first_frame = 0, unsigned threads = 1);

/// learn_from_frame recorded in the dataset's config echo, or `fallback`.
std::size_t recorded_first_frame(const TrajectoryDataset& data, std::size_t fallback = 1);

enum class Scale { desk, full };

Scale scale_from_string(const std::string& s);

/// Configurations of one table sweep, one per chi.
std::vector<ExperimentConfig> preset_sweep(const std::string& table, Scale scale);

struct SweepRow {
  double chi = 0.0;
  double traj_err_rel = 0.0;
  double profile_err_rel = 0.0;
  std::size_t breakpoints = 0;
};

/// Simulates, learns and evaluates one configuration.
SweepRow run_experiment(const ExperimentConfig& config, unsigned threads = 1,
                        const std::filesystem::path& out_dir = {});

/// Table of rows in the layout "chi | Err_traj | Err_phi".
std::string format_table(const std::string& table, const std::vector<SweepRow>& rows);

} // namespace kslearn
