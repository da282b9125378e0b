#include "kslearn/experiment.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kslearn/deterministic.hpp"
#include "kslearn/error.hpp"
#include "kslearn/learner.hpp"
#include "kslearn/parallel.hpp"
#include "kslearn/rng.hpp"
#include "kslearn/stochastic.hpp"

namespace kslearn {

namespace fs = std::filesystem;

namespace {

DeterministicRunConfig deterministic_run(const DatasetMetadata& md, double inner_tol,
                                         int inner_max_iters) {
  DeterministicRunConfig run;
  run.kernel = md.kernel;
  run.tau = md.tau;
  run.T = md.T;
  run.dt_obs = md.dt_obs;
  run.inner_tol = inner_tol;
  run.inner_max_iters = inner_max_iters;
  return run;
}

StochasticRunConfig stochastic_run(const DatasetMetadata& md) {
  StochasticRunConfig run;
  run.kernel = md.kernel;
  run.eta = md.eta;
  run.tau = md.tau;
  run.T = md.T;
  run.dt_obs = md.dt_obs;
  run.seed = md.seed;
  return run;
}

EnergyModel energy_model(const KernelSpec& kernel, std::shared_ptr<const RadialProfile> phi) {
  EnergyModel model;
  model.interaction = std::move(phi);
  model.diffusion = Diffusion{kernel.m, kernel.h};
  return model;
}

Trajectory run_one(const ParticleConfiguration& initial, const DatasetMetadata& md,
                   std::uint64_t m, const std::shared_ptr<const RadialProfile>& phi,
                   double inner_tol, int inner_max_iters) {
  if (md.mode == Mode::stochastic)
    return simulate_sde(initial, stochastic_run(md), m, phi.get());
  const DeterministicRunConfig run = deterministic_run(md, inner_tol, inner_max_iters);
  run.validate();
  if (phi)
    return simulate(initial, run, energy_model(md.kernel, phi));
  return simulate(initial, run);
}

std::vector<double> frame_times(std::size_t L, double dt) {
  std::vector<double> t(L + 1);
  for (std::size_t l = 0; l <= L; ++l)
    t[l] = static_cast<double>(l) * dt;
  return t;
}

} // namespace

void ExperimentConfig::validate() const {
  try {
    kernel.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (N < 2)
    throw ConfigError("N must be at least 2");
  if (M < 1)
    throw ConfigError("M must be at least 1");
  if (P < 1)
    throw ConfigError("P must be at least 1");
  if (!(tau > 0.0) || !(dt_obs >= tau) || !(T >= dt_obs))
    throw ConfigError("time parameters must satisfy 0 < tau <= dt_obs <= T");
  if (mode == Mode::stochastic && (kernel.has_cutoff() || kernel.d != 2))
    throw ConfigError("stochastic mode needs d = 2 and an epsilon regularization");
  if (!(eta >= 0.0))
    throw ConfigError("eta must be nonnegative");
  if (learn_from_frame + 1 > static_cast<std::size_t>(T / dt_obs + 0.5))
    throw ConfigError("learn_from_frame leaves no forward difference to learn from");
  if (basis.adaptive) {
    if (basis.initial_count < 2 || basis.max_iter < 1 || !(basis.tol >= 0.0))
      throw ConfigError("adaptive basis needs initial_count >= 2, max_iter >= 1, tol >= 0");
  } else if (basis.count < 2) {
    throw ConfigError("uniform basis needs at least 2 breakpoints");
  }
  try {
    integer_ratio(dt_obs, tau, "dt_obs / tau");
    integer_ratio(T, dt_obs, "T / dt_obs");
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig config_from_json(const json& j, const fs::path& base_dir) {
  ExperimentConfig c;
  if (!j.is_object())
    throw ConfigError("configuration must be a JSON object");
  try {
    if (j.contains("mode"))
      c.mode = mode_from_string(j.at("mode").get<std::string>());
    if (c.mode == Mode::stochastic)
      c.kernel.reg = Epsilon{0.01};
    c.kernel.d = j.value("d", c.kernel.d);
    c.kernel.chi = j.value("chi", c.kernel.chi);
    c.kernel.h = j.value("h", c.kernel.h);
    c.kernel.m = j.value("m", c.kernel.m);
    if (j.contains("r_c") && j.contains("eps"))
      throw ConfigError("give either r_c or eps, not both");
    if (j.contains("r_c"))
      c.kernel.reg = Cutoff{j.at("r_c").get<double>()};
    if (j.contains("eps"))
      c.kernel.reg = Epsilon{j.at("eps").get<double>()};
    c.N = j.value("N", c.N);
    c.M = j.value("M", c.M);
    c.T = j.value("T", c.T);
    c.dt_obs = j.value("dt_obs", c.dt_obs);
    c.tau = j.value("tau", c.tau);
    c.eta = j.value("eta", c.eta);
    c.P = j.value("P", c.P);
    c.learn_from_frame = j.value("learn_from_frame", c.learn_from_frame);
    c.seed = j.value("seed", c.seed);
    c.output = j.value("output", c.output);
    c.inner_tol = j.value("inner_tol", c.inner_tol);
    c.inner_max_iters = j.value("inner_max_iters", c.inner_max_iters);
    if (j.contains("basis")) {
      const json& b = j.at("basis");
      if (b.contains("uniform")) {
        const json& u = b.at("uniform");
        c.basis.adaptive = false;
        c.basis.count = u.is_object() ? u.at("count").get<std::size_t>() : u.get<std::size_t>();
      } else if (b.contains("adaptive")) {
        const json& a = b.at("adaptive");
        c.basis.adaptive = true;
        c.basis.tol = a.value("tol", c.basis.tol);
        c.basis.max_iter = a.value("max_iter", a.value("maxIter", c.basis.max_iter));
        c.basis.initial_count = a.value("initial_count", c.basis.initial_count);
        c.basis.max_breakpoints = a.value("max_breakpoints", c.basis.max_breakpoints);
      } else {
        throw ConfigError("basis must be {\"uniform\": ...} or {\"adaptive\": ...}");
      }
    }
    if (j.contains("profile_model") && !j.at("profile_model").is_null()) {
      const json& pm = j.at("profile_model");
      if (pm.is_string()) {
        fs::path p = pm.get<std::string>();
        if (p.is_relative())
          p = base_dir / p;
        c.profile_model = spline_from_json(read_json(p));
      } else {
        c.profile_model = spline_from_json(pm);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad configuration: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("bad configuration: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j{{"mode", to_string(c.mode)},
         {"d", c.kernel.d},
         {"chi", c.kernel.chi},
         {"h", c.kernel.h},
         {"m", c.kernel.m},
         {"N", c.N},
         {"M", c.M},
         {"T", c.T},
         {"dt_obs", c.dt_obs},
         {"tau", c.tau},
         {"eta", c.eta},
         {"P", c.P},
         {"learn_from_frame", c.learn_from_frame},
         {"seed", c.seed},
         {"output", c.output},
         {"inner_tol", c.inner_tol},
         {"inner_max_iters", c.inner_max_iters}};
  if (c.kernel.has_cutoff())
    j["r_c"] = c.kernel.r_c();
  else
    j["eps"] = c.kernel.eps();
  if (c.basis.adaptive)
    j["basis"] = {{"adaptive",
                   {{"tol", c.basis.tol},
                    {"max_iter", c.basis.max_iter},
                    {"initial_count", c.basis.initial_count},
                    {"max_breakpoints", c.basis.max_breakpoints}}}};
  else
    j["basis"] = {{"uniform", {{"count", c.basis.count}}}};
  if (c.profile_model)
    j["profile_model"] = to_json(*c.profile_model);
  return j;
}

fs::path resolve_output(const fs::path& path) {
  const char* root = std::getenv("KSLEARN_OUTPUT_ROOT");
  if (root && *root && path.is_relative())
    return fs::path(root) / path;
  return path;
}

ParticleConfiguration initial_positions(std::uint64_t seed, std::uint64_t m, int d,
                                        std::size_t n) {
  const CounterRng rng(seed);
  ParticleConfiguration x(d, n);
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k)
      x(i, k) = rng.uniform(CounterRng::Stream::initial_positions, m, i,
                            static_cast<std::uint64_t>(k));
  return x;
}

TrajectoryDataset generate_dataset(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  TrajectoryDataset data;
  DatasetMetadata& md = data.metadata;
  md.mode = config.mode;
  md.kernel = config.kernel;
  md.eta = config.mode == Mode::stochastic ? config.eta : 0.0;
  md.seed = config.seed;
  md.tau = config.tau;
  md.dt_obs = config.dt_obs;
  md.T = config.T;
  md.profile_model = config.profile_model;
  md.config_echo = to_json(config).dump();

  std::shared_ptr<const RadialProfile> phi;
  if (config.profile_model)
    phi = std::make_shared<SplineProfile>(*config.profile_model);

  const std::size_t L = integer_ratio(config.T, config.dt_obs, "T / dt_obs");
  data.times = frame_times(L, config.dt_obs);
  data.trajectories.resize(config.M);
  parallel_for(config.M, threads, [&](std::size_t m) {
    const ParticleConfiguration x0 = initial_positions(config.seed, m, config.kernel.d, config.N);
    data.trajectories[m] = run_one(x0, md, m, phi, config.inner_tol, config.inner_max_iters);
  });
  return data;
}

std::function<double(double)> truth_profile(const DatasetMetadata& md) {
  if (md.profile_model) {
    auto phi = std::make_shared<SplineProfile>(*md.profile_model);
    return [phi](double r) { return phi->value(r); };
  }
  auto phi = make_reference_profile(md.kernel);
  return [phi](double r) { return phi->value(r); };
}

TrajectoryDataset reconstruct(const TrajectoryDataset& reference, const SplineModel& model,
                              unsigned threads) {
  reference.validate();
  TrajectoryDataset out;
  out.metadata = reference.metadata;
  out.metadata.profile_model = model;
  out.times = reference.times;
  out.trajectories.resize(reference.M());
  double inner_tol = -1.0;
  int inner_max_iters = 500;
  try {
    const json echo = json::parse(reference.metadata.config_echo);
    inner_tol = echo.value("inner_tol", inner_tol);
    inner_max_iters = echo.value("inner_max_iters", inner_max_iters);
  } catch (const json::exception&) {
  }
  const auto phi = std::make_shared<SplineProfile>(model);
  parallel_for(reference.M(), threads, [&](std::size_t m) {
    out.trajectories[m] = run_one(reference.trajectories[m].frames.front(), reference.metadata, m,
                                  phi, inner_tol, inner_max_iters);
  });
  return out;
}

Evaluation evaluate(const TrajectoryDataset& reference, const SplineModel& model,
                    std::size_t bins, unsigned threads) {
  Evaluation ev;
  ev.reconstructed = reconstruct(reference, model, threads);
  ev.density = pairwise_density(reference, bins);
  ev.traj_err_rel = traj_error_rel(reference, ev.reconstructed);
  ev.profile_err_rel = profile_error_rel(truth_profile(reference.metadata), model, ev.density);
  return ev;
}

json report_json(const TrajectoryDataset& reference, const SplineModel& model,
                 const Evaluation& ev) {
  const DatasetMetadata& md = reference.metadata;
  json config;
  try {
    config = json::parse(md.config_echo);
  } catch (const json::exception&) {
    config = md.config_echo;
  }
  return json{{"traj_err_rel", ev.traj_err_rel},
              {"profile_err_rel", ev.profile_err_rel},
              {"mode", to_string(md.mode)},
              {"d", md.kernel.d},
              {"chi", md.kernel.chi},
              {"regularization", md.kernel.has_cutoff() ? "cutoff" : "epsilon"},
              {"r_c_or_eps", md.kernel.has_cutoff() ? md.kernel.r_c() : md.kernel.eps()},
              {"M", reference.M()},
              {"L", reference.L()},
              {"N", reference.N()},
              {"n_breakpoints", model.partition().breakpoints().size()},
              {"bins", ev.density.bins()},
              {"a", ev.density.a},
              {"b", ev.density.b},
              {"model", to_json(model)},
              {"config", config}};
}

void write_evaluation(const fs::path& dir, const TrajectoryDataset& reference,
                      const SplineModel& model, const Evaluation& ev) {
  fs::create_directories(dir);
  write_json(dir / "report.json", report_json(reference, model, ev));
  write_profile_csv(dir / "profile.csv", ev.density, truth_profile(reference.metadata), model);
  write_density_csv(dir / "density.csv", ev.density);
  write_trajectories_csv(dir / "trajectories.csv", reference, ev.reconstructed);
}

LearnOutcome learn_with_basis(const TrajectoryDataset& full, const BasisChoice& basis,
                              std::size_t first_frame, unsigned threads) {
  const TrajectoryDataset data = drop_leading_frames(full, first_frame);
  if (!basis.adaptive)
    return {learn(data, data_partition(data, basis.count), threads), std::nullopt};
  RefineOptions options;
  options.tol = basis.tol;
  options.max_iter = basis.max_iter;
  options.initial_count = basis.initial_count;
  options.max_breakpoints = basis.max_breakpoints;
  options.threads = threads;
  RefineResult r = refine(data, options);
  SplineModel model = r.model;
  return {std::move(model), std::move(r)};
}

std::size_t recorded_first_frame(const TrajectoryDataset& data, std::size_t fallback) {
  try {
    return json::parse(data.metadata.config_echo).value("learn_from_frame", fallback);
  } catch (const json::exception&) {
    return fallback;
  }
}

Scale scale_from_string(const std::string& s) {
  if (s == "desk")
    return Scale::desk;
  if (s == "full")
    return Scale::full;
  throw ConfigError("unknown scale '" + s + "' (expected desk or full)");
}

std::vector<ExperimentConfig> preset_sweep(const std::string& table, Scale scale) {
  ExperimentConfig base;
  base.seed = 1;
  if (scale == Scale::desk) {
    base.M = 50;
    base.N = 20;
    base.T = 0.1;
  }
  std::vector<double> chis;
  if (table == "1d") {
    base.kernel.d = 1;
    base.kernel.reg = Cutoff{0.01};
    base.basis.count = 30;
    chis = {0.35, 0.55, 0.75};
  } else if (table == "2d") {
    base.kernel.d = 2;
    base.kernel.reg = Cutoff{0.05};
    base.basis.count = 20;
    chis = {1.0, 2.0, 4.0};
  } else if (table == "3d") {
    base.kernel.d = 3;
    base.kernel.reg = Cutoff{0.05};
    base.basis.count = 25;
    chis = {1.0, 2.0, 4.0};
  } else if (table == "4d") {
    base.kernel.d = 4;
    base.kernel.reg = Cutoff{0.05};
    base.basis.count = 30;
    chis = {1.0};
  } else if (table == "s2d") {
    base.mode = Mode::stochastic;
    base.kernel.d = 2;
    base.kernel.reg = Epsilon{0.01};
    base.basis.count = 30;
    chis = {1.0, 2.0, 4.0};
  } else {
    throw ConfigError("unknown table '" + table + "' (expected 1d, 2d, 3d, 4d or s2d)");
  }
  std::vector<ExperimentConfig> out;
  for (double chi : chis) {
    ExperimentConfig c = base;
    c.kernel.chi = chi;
    char name[64];
    std::snprintf(name, sizeof name, "%s_chi%g", table.c_str(), chi);
    c.output = name;
    out.push_back(c);
  }
  return out;
}

SweepRow run_experiment(const ExperimentConfig& config, unsigned threads, const fs::path& out_dir) {
  const TrajectoryDataset data = generate_dataset(config, threads);
  const LearnOutcome learned = learn_with_basis(data, config.basis, config.learn_from_frame, threads);
  const Evaluation ev = evaluate(data, learned.model, config.P, threads);
  if (!out_dir.empty()) {
    write_dataset(data, out_dir / "data");
    write_json(out_dir / "model.json", to_json(learned.model));
    write_evaluation(out_dir, data, learned.model, ev);
    if (learned.refinement) {
      std::ofstream log(out_dir / "adaptive_log.jsonl");
      for (const auto& e : learned.refinement->log)
        log << json{{"iteration", e.iteration},
                    {"breakpoints", e.breakpoints},
                    {"flagged", e.flagged},
                    {"errors", e.errors}}
                   .dump()
            << '\n';
    }
  }
  return {config.kernel.chi, ev.traj_err_rel, ev.profile_err_rel,
          learned.model.partition().breakpoints().size()};
}

std::string format_table(const std::string& table, const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "table " << table << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %-6s %-14s %-14s\n", "chi", "knots", "Err_traj",
                "Err_phi");
  out << line;
  for (const SweepRow& r : rows) {
    std::snprintf(line, sizeof line, "%-8.3g %-6zu %-14.3e %-14.3e\n", r.chi, r.breakpoints,
                  r.traj_err_rel, r.profile_err_rel);
    out << line;
  }
  return out.str();
}

} // namespace kslearn
