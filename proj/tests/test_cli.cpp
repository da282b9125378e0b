#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "kslearn/experiment.hpp"
#include "kslearn/io.hpp"

using namespace kslearn;
namespace fs = std::filesystem;

namespace {

const fs::path work = fs::temp_directory_path() / "kslearn_test_cli";

struct Run {
  int code;
  std::string out;
};

Run cli(const std::string& args) {
  const char* exe = std::getenv("KSLEARN_CLI_PATH");
  if (!exe)
    exe = KSLEARN_CLI_PATH;
  const fs::path log = work / "stdout.txt";
  const std::string cmd = std::string("\"") + exe + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

fs::path write_config(const std::string& name, const json& j) {
  fs::create_directories(work);
  const fs::path p = work / name;
  write_json(p, j);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// A single cubic piece: in the span of every cubic basis on a subinterval.
SplineModel cubic_truth() {
  return SplineModel(Partition({0.0, 1.5}, 3), {2.0, 1.2, 0.9, 0.4});
}

json recovery_config() {
  return json{{"mode", "stochastic"}, {"eps", 0.01},   {"eta", 0.0},
              {"tau", 1e-4},          {"dt_obs", 1e-4}, {"T", 6e-4},
              {"M", 3},               {"N", 10},        {"seed", 3},
              {"learn_from_frame", 0}, {"profile_model", to_json(cubic_truth())}};
}

} // namespace

TEST_CASE("simulate writes the expected shape and is stable") {
  fs::remove_all(work);
  const fs::path cfg = write_config(
      "small.json", json{{"d", 1}, {"chi", 0.55}, {"r_c", 0.01}, {"M", 2}, {"N", 3}, {"T", 0.02}});
  REQUIRE(cli("simulate --config " + cfg.string() + " --out " + (work / "a").string()).code == 0);
  const TrajectoryDataset data = read_dataset(work / "a");
  CHECK(data.M() == 2);
  CHECK(data.L() + 1 == 3);
  CHECK(data.N() == 3);
  CHECK(data.d() == 1);
  REQUIRE(cli("--threads 2 simulate --config " + cfg.string() + " --out " + (work / "b").string()).code == 0);
  for (const char* f : {"metadata.json", "traj_00000.csv", "traj_00001.csv"})
    CHECK(slurp(work / "a" / f) == slurp(work / "b" / f));
}

TEST_CASE("learn recovers an in-span profile") {
  const fs::path cfg = write_config("recovery.json", recovery_config());
  const fs::path data = work / "rec";
  REQUIRE(cli("simulate --config " + cfg.string() + " --out " + data.string()).code == 0);
  const Run r = cli("learn --data " + data.string() + " --knots 10 --out " + (work / "m.json").string());
  REQUIRE(r.code == 0);
  const SplineModel got = spline_from_json(read_json(work / "m.json"));
  CHECK(got.partition().breakpoints().size() == 10);
  const SplineModel truth = cubic_truth();
  double worst = 0.0;
  for (int q = 0; q <= 200; ++q) {
    const double x = got.partition().a() + (got.partition().b() - got.partition().a()) * q / 200.0;
    worst = std::max(worst, std::abs(got(x) - truth(x)) / std::abs(truth(x)));
  }
  CHECK(worst <= 1e-8);

  const fs::path initial = work / "initial.json";
  REQUIRE(cli("learn --data " + data.string() + " --knots adaptive --tol inf --initial-count 8 --log " +
              (work / "log.jsonl").string() + " --out " + initial.string())
              .code == 0);
  const SplineModel adaptive = spline_from_json(read_json(initial));
  CHECK(adaptive.partition().breakpoints().size() == 8);
  CHECK(line_count(work / "log.jsonl") == 1);
  REQUIRE(cli("learn --data " + data.string() + " --knots 8 --out " + (work / "u8.json").string()).code == 0);
  CHECK(adaptive == spline_from_json(read_json(work / "u8.json")));
}

TEST_CASE("learn failures") {
  const fs::path out = work / "never.json";
  const Run r = cli("learn --data " + (work / "no_such_dir").string() + " --knots 10 --out " + out.string());
  CHECK(r.code == 4);
  CHECK_FALSE(fs::exists(out));
  CHECK(cli("learn --data " + (work / "rec").string() + " --knots one --out " + out.string()).code == 2);
  CHECK_FALSE(fs::exists(out));
  CHECK(cli("learn --knots 10").code == 2);
}

TEST_CASE("evaluate with the generating model") {
  json j{{"d", 2},   {"chi", 1.0}, {"r_c", 0.05}, {"M", 2},
         {"N", 6},   {"T", 0.03},  {"profile_model", to_json(cubic_truth())}};
  const fs::path cfg = write_config("eval.json", j);
  const fs::path data = work / "ev";
  REQUIRE(cli("simulate --config " + cfg.string() + " --out " + data.string()).code == 0);
  write_json(work / "truth.json", to_json(cubic_truth()));
  const fs::path report = work / "evaluation" / "report.json";
  const Run r = cli("evaluate --data " + data.string() + " --model " + (work / "truth.json").string() +
                    " --out " + report.string() + " --bins 50");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Err_traj") != std::string::npos);
  const json rep = read_json(report);
  CHECK(rep.at("traj_err_rel").get<double>() <= 1e-10);
  CHECK(rep.at("profile_err_rel").get<double>() == 0.0);
  CHECK(rep.at("mode") == "deterministic");
  CHECK(rep.at("M") == 2);
  CHECK(rep.at("n_breakpoints") == 2);
  CHECK(rep.at("config").is_object());
  CHECK(line_count(work / "evaluation" / "profile.csv") == 1 + 51);
  CHECK(line_count(work / "evaluation" / "density.csv") == 1 + 50);
  CHECK(line_count(work / "evaluation" / "trajectories.csv") == 1 + 2 * 2 * 4 * 6);
}

TEST_CASE("bad configuration exits with the config code") {
  const fs::path cfg = write_config("bad.json", json{{"r_c", 0.01}, {"eps", 0.01}});
  CHECK(cli("simulate --config " + cfg.string() + " --out " + (work / "bad").string()).code == 2);
  CHECK(cli("simulate --config " + (work / "absent.json").string() + " --out " + (work / "bad").string()).code == 4);
  CHECK(cli("reproduce --table 7d").code == 2);
}

TEST_CASE("desk reproduction of the 1d table") {
  const Run r = cli("--threads 4 reproduce --table 1d --scale desk --out " + (work / "rep").string());
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  int rows = 0;
  for (std::string line; std::getline(in, line);) {
    std::istringstream ls(line);
    double chi, traj, phi;
    std::size_t knots;
    if (ls >> chi >> knots >> traj >> phi) {
      ++rows;
      CHECK(std::isfinite(traj));
      CHECK(std::isfinite(phi));
    }
  }
  CHECK(rows == 3);
  CHECK(fs::exists(work / "rep" / "1d_chi0.55" / "report.json"));
  fs::remove_all(work);
}
