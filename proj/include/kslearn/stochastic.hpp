#pragma once

#include <cstdint>

#include "kslearn/kernels.hpp"
#include "kslearn/particles.hpp"
#include "kslearn/profile.hpp"
#include "kslearn/rng.hpp"

namespace kslearn {

struct StochasticRunConfig {
  KernelSpec kernel{2, 1.0, Epsilon{0.01}, 1, 0.01};
  double eta = 0.01;
  double tau = 1e-4;
  double T = 0.2;
  double dt_obs = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t steps_per_observation() const;
  std::size_t observation_count() const;
};

/// drift_i = (1/N) sum_{j != i} phi(|x_j - x_i|) (x_j - x_i).
VectorField drift(const ParticleConfiguration& x, const RadialProfile& profile);

/// Drift with the epsilon-regularized built-in profile of `kernel`.
VectorField drift(const ParticleConfiguration& x, const KernelSpec& kernel);

/// x + drift tau + sqrt(2 tau) eta noise.
ParticleConfiguration em_step(const ParticleConfiguration& x, const RadialProfile& profile,
                              double tau, double eta, const VectorField& noise);

/// Standard normal noise for (trajectory, step); depends only on the seed and the counters.
VectorField brownian_increments(const CounterRng& rng, std::uint64_t trajectory,
                                std::uint64_t step, int d, std::size_t n);

/// Euler-Maruyama with step tau, frames every dt_obs. Noise for trajectory m is
/// keyed by (seed, m, step, particle); `profile` defaults to the run's kernel.
Trajectory simulate_sde(const ParticleConfiguration& initial, const StochasticRunConfig& run,
                        std::uint64_t trajectory_index, const RadialProfile* profile = nullptr);

} // namespace kslearn
