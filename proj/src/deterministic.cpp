#include "kslearn/deterministic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kslearn/error.hpp"
#include "kslearn/simd/kernels.hpp"

namespace kslearn {

EnergyModel EnergyModel::from_kernel(const KernelSpec& spec) {
  spec.validate();
  EnergyModel model;
  model.interaction = std::make_shared<CutoffProfile>(spec);
  model.diffusion = Diffusion{spec.m, spec.h};
  return model;
}

EnergyEvaluator::EnergyEvaluator(EnergyModel model) : model_(std::move(model)) {
  if (model_.diffusion) {
    if (model_.diffusion->m != 1 && model_.diffusion->m != 2)
      throw DomainError("diffusion exponent m must be 1 or 2");
    if (!(model_.diffusion->h > 0.0))
      throw DomainError("mollifier bandwidth must be positive");
  }
}

void EnergyEvaluator::prepare(const ParticleConfiguration& x) {
  const auto& kt = simd::active_kernels();
  n_ = x.size();
  d_ = x.dim();
  last_ = x;
  r2_.resize(n_ * n_);
  row_.resize(n_);
  weights_.resize(n_);
  const simd::Coords c = last_.coords();
  for (std::size_t i = 0; i < n_; ++i)
    kt.squared_distances(c, i, r2_.data() + i * n_);

  if (model_.diffusion) {
    const double h = model_.diffusion->h;
    const double norm = std::pow(2.0 * std::numbers::pi * h * h, -0.5 * d_);
    kern_.resize(n_ * n_);
    dens_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      double* krow = kern_.data() + i * n_;
      kt.exp_neg_scaled(r2_.data() + i * n_, n_, 1.0 / (2.0 * h * h), krow);
      for (std::size_t j = 0; j < n_; ++j)
        krow[j] *= norm;
      dens_[i] = kt.sum(krow, n_);
      if (!(dens_[i] > 0.0) || !std::isfinite(dens_[i]))
        throw NumericError("mollified density vanished or overflowed at particle " +
                           std::to_string(i));
    }
  }
}

double EnergyEvaluator::energy(const ParticleConfiguration& x) {
  if (x.size() < 2)
    throw DomainError("energy needs at least two particles");
  prepare(x);
  const double w = model_.mass / static_cast<double>(n_);
  double pair_sum = 0.0;
  if (model_.interaction) {
    for (std::size_t i = 0; i < n_; ++i) {
      const double* r2 = r2_.data() + i * n_;
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double u = model_.interaction->potential(std::sqrt(r2[j]));
        if (!std::isfinite(u))
          throw NumericError("non-finite interaction potential for pair (" + std::to_string(i) +
                             ", " + std::to_string(j) + ")");
        pair_sum += u;
      }
    }
  }
  double entropy = 0.0;
  if (model_.diffusion) {
    for (std::size_t i = 0; i < n_; ++i)
      entropy += model_.diffusion->m == 1 ? std::log(w * dens_[i]) : w * dens_[i];
  }
  const double e = w * w * pair_sum + w * entropy;
  if (!std::isfinite(e))
    throw NumericError("non-finite energy");
  return e;
}

void EnergyEvaluator::gradient_from_last(VectorField& out) {
  const auto& kt = simd::active_kernels();
  if (out.size() != n_ || out.dim() != d_)
    out = VectorField(d_, n_);
  const double w = model_.mass / static_cast<double>(n_);
  const simd::Coords c = last_.coords();
  std::array<double, 4> acc{};

  for (std::size_t k = 0; k < n_; ++k) {
    const double* r2 = r2_.data() + k * n_;
    if (model_.interaction) {
      model_.interaction->values_from_squared({r2, n_}, row_);
      for (std::size_t j = 0; j < n_; ++j)
        weights_[j] = -w * w * row_[j];
    } else {
      std::fill(weights_.begin(), weights_.end(), 0.0);
    }
    if (model_.diffusion) {
      const double h2 = model_.diffusion->h * model_.diffusion->h;
      const double* krow = kern_.data() + k * n_;
      if (model_.diffusion->m == 1) {
        const double scale = w / h2;
        const double inv_k = 1.0 / dens_[k];
        for (std::size_t j = 0; j < n_; ++j)
          weights_[j] += scale * krow[j] * (inv_k + 1.0 / dens_[j]);
      } else {
        const double scale = 2.0 * w * w / h2;
        for (std::size_t j = 0; j < n_; ++j)
          weights_[j] += scale * krow[j];
      }
    }
    weights_[k] = 0.0;
    kt.weighted_displacement(c, k, weights_.data(), acc.data());
    for (int a = 0; a < d_; ++a) {
      if (!std::isfinite(acc[static_cast<std::size_t>(a)]))
        throw NumericError("non-finite energy gradient at particle " + std::to_string(k));
      out(k, a) = acc[static_cast<std::size_t>(a)];
    }
  }
}

void EnergyEvaluator::gradient(const ParticleConfiguration& x, VectorField& out) {
  energy(x);
  gradient_from_last(out);
}

double energy(const ParticleConfiguration& x, const KernelSpec& kernel) {
  EnergyEvaluator ev(EnergyModel::from_kernel(kernel));
  return ev.energy(x);
}

VectorField energy_grad(const ParticleConfiguration& x, const KernelSpec& kernel) {
  EnergyEvaluator ev(EnergyModel::from_kernel(kernel));
  VectorField g;
  ev.gradient(x, g);
  return g;
}

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v)
    m = std::max(m, std::abs(e));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += a[i] * b[i];
  return acc;
}

} // namespace

StepResult implicit_step(const ParticleConfiguration& x, EnergyEvaluator& evaluator, double tau,
                         const InnerSolverOptions& options) {
  if (!(tau > 0.0))
    throw DomainError("time step must be positive");
  const std::size_t n = x.size();
  const double w = evaluator.model().mass / static_cast<double>(n);
  const double c = w / tau;
  const double tol = options.tol > 0.0 ? options.tol : 1e-8 * static_cast<double>(n);

  const auto& x0 = x.raw();
  auto objective = [&](const ParticleConfiguration& y) {
    double prox = 0.0;
    const auto& yr = y.raw();
    for (std::size_t q = 0; q < yr.size(); ++q) {
      const double diff = yr[q] - x0[q];
      prox += diff * diff;
    }
    return 0.5 * c * prox + evaluator.energy(y);
  };
  VectorField grad_e;
  auto objective_gradient = [&](const ParticleConfiguration& y, std::vector<double>& g) {
    evaluator.gradient_from_last(grad_e);
    const auto& yr = y.raw();
    g.resize(yr.size());
    for (std::size_t q = 0; q < yr.size(); ++q)
      g[q] = grad_e.raw()[q] + c * (yr[q] - x0[q]);
  };

  ParticleConfiguration y = x;
  double j_cur = objective(y);
  std::vector<double> g;
  objective_gradient(y, g);

  StepStatus status;
  ParticleConfiguration trial = y;
  std::vector<double> g_trial;
  double alpha = 1.0 / c;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 60;
  constexpr double kSlack = 1e-14;

  for (;;) {
    status.grad_norm = max_abs(g);
    if (status.grad_norm <= tol) {
      status.converged = true;
      break;
    }
    if (status.iterations >= options.max_iters)
      break;

    const double g2 = dot(g, g);
    bool accepted = false;
    double j_trial = 0.0;
    for (int halving = 0; halving < kMaxHalvings; ++halving) {
      auto& tr = trial.raw();
      const auto& yr = y.raw();
      for (std::size_t q = 0; q < tr.size(); ++q)
        tr[q] = yr[q] - alpha * g[q];
      j_trial = objective(trial);
      // Near the minimizer the required decrease drops below the rounding
      // error of J, so allow a slack of a few ulps of its magnitude.
      if (j_trial <= j_cur - kArmijo * alpha * g2 + kSlack * (1.0 + std::abs(j_cur))) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted)
      break;

    objective_gradient(trial, g_trial);
    // Barzilai-Borwein length for the next trial step.
    double ss = 0.0;
    double sy = 0.0;
    const auto& tr = trial.raw();
    const auto& yr = y.raw();
    for (std::size_t q = 0; q < tr.size(); ++q) {
      const double s = tr[q] - yr[q];
      ss += s * s;
      sy += s * (g_trial[q] - g[q]);
    }
    alpha = (sy > 0.0 && std::isfinite(ss / sy)) ? std::clamp(ss / sy, 1e-6 / c, 1e3 / c) : 1.0 / c;

    std::swap(y, trial);
    std::swap(g, g_trial);
    j_cur = j_trial;
    ++status.iterations;
  }
  return {std::move(y), status};
}

StepResult implicit_step(const ParticleConfiguration& x, const KernelSpec& kernel, double tau,
                         double inner_tol, int inner_max_iters) {
  EnergyEvaluator ev(EnergyModel::from_kernel(kernel));
  return implicit_step(x, ev, tau, InnerSolverOptions{inner_tol, inner_max_iters});
}

std::size_t integer_ratio(double t_total, double step, const char* what) {
  if (!(step > 0.0))
    throw DomainError(std::string(what) + ": step must be positive");
  const double ratio = t_total / step;
  const double rounded = std::round(ratio);
  if (rounded < 0.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw DomainError(std::string(what) + ": ratio " + std::to_string(ratio) +
                      " is not an integer");
  return static_cast<std::size_t>(rounded);
}

void DeterministicRunConfig::validate() const {
  kernel.validate();
  if (!kernel.has_cutoff())
    throw DomainError("deterministic runs use a cutoff kernel");
  if (!(tau > 0.0) || !(dt_obs >= tau) || T < 0.0)
    throw DomainError("time parameters must satisfy 0 < tau <= dt_obs and T >= 0");
  if (T > 0.0 && T < dt_obs)
    throw DomainError("final time is shorter than the observation interval");
  steps_per_observation();
  observation_count();
  if (inner_max_iters < 1)
    throw DomainError("inner_max_iters must be at least 1");
}

std::size_t DeterministicRunConfig::steps_per_observation() const {
  return integer_ratio(dt_obs, tau, "dt_obs / tau");
}

std::size_t DeterministicRunConfig::observation_count() const {
  return integer_ratio(T, dt_obs, "T / dt_obs");
}

Trajectory simulate(const ParticleConfiguration& initial, const DeterministicRunConfig& run,
                    SimulationReport* report) {
  run.validate();
  return simulate(initial, run, EnergyModel::from_kernel(run.kernel), report);
}

Trajectory simulate(const ParticleConfiguration& initial, const DeterministicRunConfig& run,
                    const EnergyModel& model, SimulationReport* report) {
  if (initial.size() < 2)
    throw DomainError("simulation needs at least two particles");
  if (!initial.all_finite())
    throw DomainError("initial configuration has non-finite coordinates");
  const std::size_t per_obs = run.steps_per_observation();
  const std::size_t obs = run.observation_count();
  EnergyEvaluator evaluator(model);
  const InnerSolverOptions options{run.inner_tol, run.inner_max_iters};

  Trajectory traj;
  traj.frames.reserve(obs + 1);
  traj.frames.push_back(initial);
  ParticleConfiguration state = initial;
  SimulationReport local;
  for (std::size_t l = 0; l < obs; ++l) {
    for (std::size_t s = 0; s < per_obs; ++s) {
      StepResult step = implicit_step(state, evaluator, run.tau, options);
      ++local.steps;
      if (!step.status.converged) {
        ++local.unconverged_steps;
        local.worst_grad_norm = std::max(local.worst_grad_norm, step.status.grad_norm);
      }
      if (!step.state.all_finite())
        throw NumericError("non-finite particle position at step " + std::to_string(local.steps));
      state = std::move(step.state);
    }
    traj.frames.push_back(state);
  }
  if (report)
    *report = local;
  return traj;
}

} // namespace kslearn
