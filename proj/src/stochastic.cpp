#include "kslearn/stochastic.hpp"

#include <cmath>
#include <string>

#include "kslearn/deterministic.hpp"
#include "kslearn/error.hpp"
#include "kslearn/simd/kernels.hpp"

namespace kslearn {

void StochasticRunConfig::validate() const {
  kernel.validate();
  if (kernel.has_cutoff())
    throw DomainError("stochastic runs use the epsilon-regularized kernel");
  if (kernel.d != 2)
    throw DomainError("the stochastic kernel is defined for d = 2");
  if (!(eta >= 0.0))
    throw DomainError("noise scale eta must be nonnegative");
  if (!(tau > 0.0) || !(dt_obs >= tau) || T < 0.0)
    throw DomainError("time parameters must satisfy 0 < tau <= dt_obs and T >= 0");
  steps_per_observation();
  observation_count();
}

std::size_t StochasticRunConfig::steps_per_observation() const {
  return integer_ratio(dt_obs, tau, "dt_obs / tau");
}

std::size_t StochasticRunConfig::observation_count() const {
  return integer_ratio(T, dt_obs, "T / dt_obs");
}

VectorField drift(const ParticleConfiguration& x, const RadialProfile& profile) {
  const auto& kt = simd::active_kernels();
  const std::size_t n = x.size();
  const int d = x.dim();
  VectorField out(d, n);
  std::vector<double> r2(n);
  std::vector<double> phi(n);
  std::array<double, 4> acc{};
  const double w = 1.0 / static_cast<double>(n);
  const simd::Coords c = x.coords();
  for (std::size_t i = 0; i < n; ++i) {
    kt.squared_distances(c, i, r2.data());
    profile.values_from_squared(r2, phi);
    phi[i] = 0.0;
    kt.weighted_displacement(c, i, phi.data(), acc.data());
    for (int k = 0; k < d; ++k)
      out(i, k) = w * acc[static_cast<std::size_t>(k)];
  }
  return out;
}

VectorField drift(const ParticleConfiguration& x, const KernelSpec& kernel) {
  return drift(x, EpsilonProfile(kernel.chi, kernel.eps()));
}

ParticleConfiguration em_step(const ParticleConfiguration& x, const RadialProfile& profile,
                              double tau, double eta, const VectorField& noise) {
  if (noise.size() != x.size() || noise.dim() != x.dim())
    throw DomainError("noise field shape does not match the configuration");
  const VectorField b = drift(x, profile);
  const double scale = std::sqrt(2.0 * tau) * eta;
  ParticleConfiguration next = x;
  auto& out = next.raw();
  for (std::size_t q = 0; q < out.size(); ++q)
    out[q] += b.raw()[q] * tau + scale * noise.raw()[q];
  return next;
}

VectorField brownian_increments(const CounterRng& rng, std::uint64_t trajectory,
                                std::uint64_t step, int d, std::size_t n) {
  VectorField xi(d, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < d; k += 2) {
      const auto pair = rng.normal_pair(CounterRng::Stream::brownian, trajectory, step,
                                        i * 2 + static_cast<std::size_t>(k / 2));
      xi(i, k) = pair[0];
      if (k + 1 < d)
        xi(i, k + 1) = pair[1];
    }
  }
  return xi;
}

Trajectory simulate_sde(const ParticleConfiguration& initial, const StochasticRunConfig& run,
                        std::uint64_t trajectory_index, const RadialProfile* profile) {
  run.validate();
  if (initial.size() < 2)
    throw DomainError("simulation needs at least two particles");
  const EpsilonProfile builtin(run.kernel.chi, run.kernel.eps());
  const RadialProfile& phi = profile ? *profile : builtin;
  const CounterRng rng(run.seed);
  const std::size_t per_obs = run.steps_per_observation();
  const std::size_t obs = run.observation_count();

  Trajectory traj;
  traj.frames.reserve(obs + 1);
  traj.frames.push_back(initial);
  ParticleConfiguration state = initial;
  std::uint64_t step = 0;
  for (std::size_t l = 0; l < obs; ++l) {
    for (std::size_t s = 0; s < per_obs; ++s, ++step) {
      const VectorField xi = brownian_increments(rng, trajectory_index, step, state.dim(),
                                                 state.size());
      state = em_step(state, phi, run.tau, run.eta, xi);
      if (!state.all_finite())
        throw NumericError("non-finite particle position at step " + std::to_string(step));
    }
    traj.frames.push_back(state);
  }
  return traj;
}

} // namespace kslearn
