#include "kslearn/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kslearn/error.hpp"

namespace kslearn {

template <class Tag>
bool BasicField<Tag>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

template class BasicField<PositionTag>;
template class BasicField<VectorTag>;

double pair_distance(const ParticleConfiguration& x, std::size_t i, std::size_t j) {
  double r2 = 0.0;
  for (int k = 0; k < x.dim(); ++k) {
    const double diff = x(j, k) - x(i, k);
    r2 += diff * diff;
  }
  return std::sqrt(r2);
}

double mean_pairwise_distance(const ParticleConfiguration& x) {
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j, ++count)
      acc += pair_distance(x, i, j);
  return count ? acc / static_cast<double>(count) : 0.0;
}

std::string to_string(Mode mode) {
  return mode == Mode::deterministic ? "deterministic" : "stochastic";
}

Mode mode_from_string(const std::string& s) {
  if (s == "deterministic")
    return Mode::deterministic;
  if (s == "stochastic")
    return Mode::stochastic;
  throw ConfigError("unknown mode '" + s + "'");
}

std::size_t TrajectoryDataset::N() const {
  return trajectories.empty() || trajectories.front().frames.empty()
             ? 0
             : trajectories.front().frames.front().size();
}

int TrajectoryDataset::d() const {
  return trajectories.empty() || trajectories.front().frames.empty()
             ? 0
             : trajectories.front().frames.front().dim();
}

double TrajectoryDataset::dt() const {
  if (times.size() < 2)
    throw DomainError("dataset has fewer than two observation times");
  return times[1] - times[0];
}

void TrajectoryDataset::validate() const {
  if (M() < 1)
    throw DomainError("dataset has no trajectories");
  if (L() < 1)
    throw DomainError("dataset needs at least two observation times");
  if (N() < 2)
    throw DomainError("dataset needs at least two particles");
  const double step = dt();
  if (!(step > 0.0))
    throw DomainError("observation times must increase");
  for (std::size_t l = 1; l < times.size(); ++l) {
    const double gap = times[l] - times[l - 1];
    if (std::abs(gap - step) > 1e-9 * step)
      throw DomainError("observation times are not uniformly spaced at index " +
                        std::to_string(l));
  }
  const std::size_t n = N();
  const int d = this->d();
  for (std::size_t m = 0; m < M(); ++m) {
    const auto& frames = trajectories[m].frames;
    if (frames.size() != times.size())
      throw DomainError("trajectory " + std::to_string(m) + " has " +
                        std::to_string(frames.size()) + " frames, expected " +
                        std::to_string(times.size()));
    for (const auto& f : frames) {
      if (f.size() != n || f.dim() != d)
        throw DomainError("trajectory " + std::to_string(m) + " has inconsistent frame shape");
      if (!f.all_finite())
        throw DomainError("trajectory " + std::to_string(m) + " has non-finite coordinates");
    }
  }
}

DistanceRange pairwise_distance_range(const TrajectoryDataset& data, std::size_t first_frame,
                                      std::optional<std::size_t> last_frame) {
  DistanceRange range{std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity()};
  for (const auto& traj : data.trajectories) {
    const std::size_t last = std::min(last_frame.value_or(traj.frames.size() - 1),
                                      traj.frames.size() - 1);
    for (std::size_t l = first_frame; l <= last; ++l) {
      const auto& x = traj.frames[l];
      for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
          const double r = pair_distance(x, i, j);
          range.min = std::min(range.min, r);
          range.max = std::max(range.max, r);
        }
    }
  }
  if (!(range.max >= range.min))
    throw DomainError("dataset has no particle pairs");
  return range;
}

} // namespace kslearn
