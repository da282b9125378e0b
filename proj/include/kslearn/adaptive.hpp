#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "kslearn/bspline.hpp"
#include "kslearn/particles.hpp"

namespace kslearn {

struct RefinementLogEntry {
  int iteration = 0;
  std::vector<double> breakpoints;   // partition P^{j-1} under test
  std::vector<std::size_t> flagged;  // subinterval indices marked for splitting
  std::vector<double> errors;        // midpoint indicator per subinterval
};

struct RefineOptions {
  double tol = 0.01;
  int max_iter = 6;
  std::size_t initial_count = 8; // breakpoints of the uniform starting partition
  int degree = 3;
  /// Cap on the final breakpoint count; 0 means unlimited. When the flagged
  /// intervals do not all fit, those with the largest indicator are split first.
  std::size_t max_breakpoints = 0;
  unsigned threads = 1;
  std::function<void(const RefinementLogEntry&)> on_iteration;
};

struct RefineResult {
  Partition partition;
  SplineModel model;
  int iterations = 0;
  std::vector<RefinementLogEntry> log;
};

/// Midpoint indicator |prev(mid) - next(mid)| / |prev(mid)|. When |prev(mid)| is
/// below 1e-12 * `scale`, the difference is divided by `scale` instead.
double midpoint_indicator(double prev, double next, double scale);

/// Midpoint-refinement loop on a uniform starting partition over the data's
/// pairwise-distance range.
RefineResult refine(const TrajectoryDataset& data, const RefineOptions& options);

RefineResult refine(const TrajectoryDataset& data, const Partition& initial,
                    const RefineOptions& options);

/// Breakpoints of `p` plus the midpoints of every interval.
Partition bisect_all(const Partition& p);

} // namespace kslearn
