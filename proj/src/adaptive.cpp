#include "kslearn/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kslearn/error.hpp"
#include "kslearn/learner.hpp"

namespace kslearn {

double midpoint_indicator(double prev, double next, double scale) {
  const double diff = std::abs(prev - next);
  if (std::abs(prev) <= 1e-12 * scale)
    return scale > 0.0 ? diff / scale : diff;
  return diff / std::abs(prev);
}

Partition bisect_all(const Partition& p) {
  const auto& x = p.breakpoints();
  std::vector<double> out;
  out.reserve(2 * x.size() - 1);
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    out.push_back(x[k]);
    out.push_back(0.5 * (x[k] + x[k + 1]));
  }
  out.push_back(x.back());
  return Partition(std::move(out), p.degree());
}

RefineResult refine(const TrajectoryDataset& data, const RefineOptions& options) {
  if (options.initial_count < 2)
    throw DomainError("initial partition needs at least 2 breakpoints");
  return refine(data, data_partition(data, options.initial_count, options.degree), options);
}

RefineResult refine(const TrajectoryDataset& data, const Partition& initial,
                    const RefineOptions& options) {
  if (!(options.tol > 0.0))
    throw DomainError("refinement tolerance must be positive");
  if (options.max_iter < 1)
    throw DomainError("max_iter must be at least 1");
  if (options.max_breakpoints != 0 && options.max_breakpoints < initial.breakpoints().size())
    throw DomainError("breakpoint budget is smaller than the initial partition");

  Partition current = initial;
  SplineModel current_model = learn(data, current, options.threads);
  std::vector<RefinementLogEntry> log;
  int iteration = 0;

  for (iteration = 1; iteration <= options.max_iter; ++iteration) {
    const Partition fine = bisect_all(current);
    const SplineModel fine_model = learn(data, fine, options.threads);

    const auto& x = current.breakpoints();
    const std::size_t intervals = current.intervals();
    std::vector<double> prev_mid(intervals);
    std::vector<double> next_mid(intervals);
    double scale = 0.0;
    for (double bp : fine.breakpoints())
      scale = std::max(scale, std::abs(current_model(bp)));

    RefinementLogEntry entry;
    entry.iteration = iteration;
    entry.breakpoints = x;
    entry.errors.resize(intervals);
    for (std::size_t k = 0; k < intervals; ++k) {
      const double mid = 0.5 * (x[k] + x[k + 1]);
      entry.errors[k] = midpoint_indicator(current_model(mid), fine_model(mid), scale);
      if (entry.errors[k] > options.tol)
        entry.flagged.push_back(k);
    }

    if (options.max_breakpoints != 0) {
      const std::size_t room = options.max_breakpoints - x.size();
      if (entry.flagged.size() > room) {
        std::stable_sort(entry.flagged.begin(), entry.flagged.end(),
                         [&](std::size_t p, std::size_t q) {
                           return entry.errors[p] > entry.errors[q];
                         });
        entry.flagged.resize(room);
        std::sort(entry.flagged.begin(), entry.flagged.end());
      }
    }

    const bool done = entry.flagged.empty();
    if (options.on_iteration)
      options.on_iteration(entry);
    log.push_back(entry);
    if (done)
      break;

    std::vector<double> refined;
    refined.reserve(x.size() + entry.flagged.size());
    std::size_t f = 0;
    for (std::size_t k = 0; k < intervals; ++k) {
      refined.push_back(x[k]);
      if (f < entry.flagged.size() && entry.flagged[f] == k) {
        refined.push_back(0.5 * (x[k] + x[k + 1]));
        ++f;
      }
    }
    refined.push_back(x.back());
    current = Partition(std::move(refined), current.degree());
    current_model = learn(data, current, options.threads);

    if (options.max_breakpoints != 0 && current.breakpoints().size() >= options.max_breakpoints)
      break;
  }

  return RefineResult{current, current_model, std::min(iteration, options.max_iter),
                      std::move(log)};
}

} // namespace kslearn
