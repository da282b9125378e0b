#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kslearn/error.hpp"
#include "kslearn/experiment.hpp"
#include "kslearn/learner.hpp"

namespace fs = std::filesystem;
using namespace kslearn;

namespace {

enum Exit { ok = 0, config_error = 2, numeric_error = 3, io_error = 4 };

int cmd_simulate(const fs::path& config_path, const fs::path& out, unsigned threads) {
  const json j = read_json(config_path);
  const ExperimentConfig config = config_from_json(j, config_path.parent_path());
  const TrajectoryDataset data = generate_dataset(config, threads);
  write_dataset(data, resolve_output(out));
  return ok;
}

int cmd_learn(const fs::path& data_dir, const std::string& knots, const BasisChoice& adaptive,
              int from_frame, const fs::path& out, const fs::path& log_path,
              const fs::path& system_path, unsigned threads) {
  const TrajectoryDataset data = read_dataset(data_dir);
  const std::size_t first = from_frame < 0 ? recorded_first_frame(data)
                                           : static_cast<std::size_t>(from_frame);
  BasisChoice basis = adaptive;
  if (knots == "adaptive") {
    basis.adaptive = true;
  } else {
    std::size_t pos = 0;
    unsigned long count = 0;
    try {
      count = std::stoul(knots, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != knots.size() || count < 2)
      throw ConfigError("--knots expects an integer >= 2 or 'adaptive'");
    basis.adaptive = false;
    basis.count = count;
  }
  const LearnOutcome learned = learn_with_basis(data, basis, first, threads);
  if (!system_path.empty()) {
    LearnDiagnostics diag;
    learn(drop_leading_frames(data, first), learned.model.partition(), threads, &diag);
    write_json(resolve_output(system_path), to_json(diag.system));
  }
  if (!log_path.empty() && learned.refinement) {
    const fs::path p = resolve_output(log_path);
    if (p.has_parent_path())
      fs::create_directories(p.parent_path());
    std::ofstream log(p);
    if (!log)
      throw IoError("cannot open " + p.string());
    for (const auto& e : learned.refinement->log)
      log << json{{"iteration", e.iteration},
                  {"breakpoints", e.breakpoints},
                  {"flagged", e.flagged},
                  {"errors", e.errors}}
                 .dump()
          << '\n';
  }
  write_json(resolve_output(out), to_json(learned.model));
  return ok;
}

int cmd_evaluate(const fs::path& data_dir, const fs::path& model_path, const fs::path& out,
                 std::size_t bins, unsigned threads) {
  const TrajectoryDataset data = read_dataset(data_dir);
  const SplineModel model = spline_from_json(read_json(model_path));
  const Evaluation ev = evaluate(data, model, bins, threads);
  const fs::path report = resolve_output(out);
  const fs::path dir = report.has_parent_path() ? report.parent_path() : fs::path(".");
  write_evaluation(dir, data, model, ev);
  if (report.filename() != "report.json")
    write_json(report, report_json(data, model, ev));
  std::printf("Err_traj %.6e\nErr_phi  %.6e\n", ev.traj_err_rel, ev.profile_err_rel);
  return ok;
}

int cmd_reproduce(const std::string& table, const std::string& scale, const std::string& knots,
                  const fs::path& out, unsigned threads) {
  std::vector<ExperimentConfig> sweep = preset_sweep(table, scale_from_string(scale));
  if (knots == "adaptive")
    for (auto& c : sweep) {
      c.basis.max_breakpoints = c.basis.count;
      c.basis.adaptive = true;
    }
  else if (knots != "uniform")
    throw ConfigError("--basis expects uniform or adaptive");
  const fs::path root = resolve_output(out);
  std::vector<SweepRow> rows;
  for (const auto& c : sweep)
    rows.push_back(run_experiment(c, threads, root / c.output));
  std::cout << format_table(table, rows);
  return ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn Keller-Segel interaction profiles from particle trajectories"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  fs::path config_path, out, data_dir, model_path, log_path, system_path;
  std::string knots, table, scale = "desk", basis_kind = "uniform";
  std::size_t bins = 400;
  BasisChoice adaptive;
  int from_frame = -1;

  auto* sim = app.add_subcommand("simulate", "Generate a trajectory dataset");
  sim->add_option("--config", config_path, "Experiment configuration (JSON)")->required();
  sim->add_option("--out", out, "Dataset directory")->required();

  auto* lrn = app.add_subcommand("learn", "Fit a spline profile to a dataset");
  lrn->add_option("--data", data_dir, "Dataset directory")->required();
  lrn->add_option("--knots", knots, "Breakpoint count or 'adaptive'")->required();
  lrn->add_option("--out", out, "Model JSON")->required();
  lrn->add_option("--tol", adaptive.tol, "Adaptive refinement tolerance");
  lrn->add_option("--max-iter", adaptive.max_iter, "Adaptive iteration limit");
  lrn->add_option("--initial-count", adaptive.initial_count, "Initial uniform breakpoints");
  lrn->add_option("--max-breakpoints", adaptive.max_breakpoints, "Breakpoint budget (0: none)");
  lrn->add_option("--from-frame", from_frame,
                  "First frame used for learning (default: value recorded with the data)");
  lrn->add_option("--log", log_path, "Adaptive refinement log (JSON lines)");
  lrn->add_option("--dump-system", system_path, "Write the normal equations as JSON");

  auto* evl = app.add_subcommand("evaluate", "Reconstruct trajectories and report errors");
  evl->add_option("--data", data_dir, "Dataset directory")->required();
  evl->add_option("--model", model_path, "Model JSON")->required();
  evl->add_option("--out", out, "Report JSON; CSVs go next to it")->required();
  evl->add_option("--bins", bins, "Density bins P")->check(CLI::PositiveNumber);

  auto* rep = app.add_subcommand("reproduce", "Run a preset table sweep");
  rep->add_option("--table", table, "1d, 2d, 3d, 4d or s2d")->required();
  rep->add_option("--scale", scale, "desk or full");
  rep->add_option("--basis", basis_kind, "uniform or adaptive (same breakpoint budget)");
  rep->add_option("--out", out, "Output directory")->default_str("reproduce");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*sim)
      return cmd_simulate(config_path, out, threads);
    if (*lrn)
      return cmd_learn(data_dir, knots, adaptive, from_frame, out, log_path, system_path, threads);
    if (*evl)
      return cmd_evaluate(data_dir, model_path, out, bins, threads);
    if (*rep)
      return cmd_reproduce(table, scale, basis_kind, out.empty() ? fs::path("reproduce") : out,
                           threads);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return io_error;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return io_error;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return numeric_error;
  } catch (const DomainError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return numeric_error;
  }
  return ok;
}
