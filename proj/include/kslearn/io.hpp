#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <json.hpp>

#include "kslearn/bspline.hpp"
#include "kslearn/learner.hpp"
#include "kslearn/metrics.hpp"
#include "kslearn/particles.hpp"

namespace kslearn {

using json = nlohmann::json;

inline constexpr int kDatasetFormatVersion = 1;

json to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const json& j);

/// {"breakpoints": [...], "degree": k, "coefficients": [...]}
json to_json(const SplineModel& model);
SplineModel spline_from_json(const json& j);

json to_json(const LinearSystem& system);

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

/// Writes <dir>/metadata.json and one <dir>/traj_NNNNN.csv per trajectory with
/// columns l,t,i,x_1..x_d. Existing files are overwritten.
void write_dataset(const TrajectoryDataset& data, const std::filesystem::path& dir);
TrajectoryDataset read_dataset(const std::filesystem::path& dir);

/// r, truth, learned on the P+1 edges of the density grid.
void write_profile_csv(const std::filesystem::path& path, const EmpiricalDensity& density,
                       const std::function<double(double)>& truth, const SplineModel& learned);

/// bin, left, right, center, weight.
void write_density_csv(const std::filesystem::path& path, const EmpiricalDensity& density);

/// m, l, t, i, source, x_1..x_d with source in {reference, reconstructed}.
void write_trajectories_csv(const std::filesystem::path& path, const TrajectoryDataset& reference,
                            const TrajectoryDataset& reconstructed);

} // namespace kslearn
