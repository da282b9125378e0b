#pragma once

#include <cstddef>
#include <memory>
#include <optional>

#include "kslearn/kernels.hpp"
#include "kslearn/particles.hpp"
#include "kslearn/profile.hpp"

namespace kslearn {

/// Mollified diffusion term sum_i w F_m(sum_j w K_h(x_i - x_j)).
struct Diffusion {
  int m = 1;
  double h = 0.01;
};

/// Discrete free energy of N particles of mass `mass / N` each:
///   E = sum_{i<j} w^2 W(r_ij) + sum_i w F_m(w S_i),  S_i = sum_j K_h(x_i - x_j),
/// where W is the potential of `interaction`.
struct EnergyModel {
  std::shared_ptr<const RadialProfile> interaction; // null: no interaction
  std::optional<Diffusion> diffusion;               // nullopt: no diffusion
  double mass = 1.0;

  /// Cutoff profile of `spec` plus its mollified diffusion.
  static EnergyModel from_kernel(const KernelSpec& spec);
};

/// Evaluates E and dE/dx for one particle count; holds scratch buffers, so use
/// one instance per thread.
class EnergyEvaluator {
public:
  explicit EnergyEvaluator(EnergyModel model);

  const EnergyModel& model() const { return model_; }

  /// Throws NumericError naming the first pair or particle with a non-finite term.
  double energy(const ParticleConfiguration& x);

  /// Gradient at the configuration passed to the most recent energy() call.
  void gradient_from_last(VectorField& out);

  void gradient(const ParticleConfiguration& x, VectorField& out);

private:
  void prepare(const ParticleConfiguration& x);

  EnergyModel model_;
  std::size_t n_ = 0;
  int d_ = 0;
  ParticleConfiguration last_;
  std::vector<double> r2_;   // n x n squared distances
  std::vector<double> kern_; // n x n mollifier values
  std::vector<double> dens_; // S_i
  std::vector<double> row_;
  std::vector<double> weights_;
};

double energy(const ParticleConfiguration& x, const KernelSpec& kernel);
VectorField energy_grad(const ParticleConfiguration& x, const KernelSpec& kernel);

struct InnerSolverOptions {
  double tol = -1.0; // max-norm of grad J; negative selects 1e-8 * N
  int max_iters = 500;
};

struct StepStatus {
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
};

struct StepResult {
  ParticleConfiguration state;
  StepStatus status;
};

/// One implicit Euler step: argmin_y sum_i w/(2 tau) |y_i - x_i|^2 + E(y), by
/// gradient descent with Barzilai-Borwein trial steps and Armijo halving,
/// started at y = x. A step that stops at the iteration cap is returned with
/// status.converged = false.
StepResult implicit_step(const ParticleConfiguration& x, EnergyEvaluator& evaluator, double tau,
                         const InnerSolverOptions& options = {});

StepResult implicit_step(const ParticleConfiguration& x, const KernelSpec& kernel, double tau,
                         double inner_tol, int inner_max_iters);

struct DeterministicRunConfig {
  KernelSpec kernel;
  double tau = 1e-4;
  double T = 0.2;
  double dt_obs = 0.01;
  double inner_tol = -1.0;
  int inner_max_iters = 500;

  void validate() const;
  std::size_t steps_per_observation() const;
  std::size_t observation_count() const; // L
};

struct SimulationReport {
  std::size_t steps = 0;
  std::size_t unconverged_steps = 0;
  double worst_grad_norm = 0.0;
};

/// Frames at t = 0, dt_obs, ..., T using the built-in cutoff kernel.
Trajectory simulate(const ParticleConfiguration& initial, const DeterministicRunConfig& run,
                    SimulationReport* report = nullptr);

/// Same, with an explicit energy model (e.g. a learned interaction profile).
Trajectory simulate(const ParticleConfiguration& initial, const DeterministicRunConfig& run,
                    const EnergyModel& model, SimulationReport* report = nullptr);

/// Checks that t_total / step is an integer within 1e-9 relative and returns it.
std::size_t integer_ratio(double t_total, double step, const char* what);

} // namespace kslearn
