#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "kslearn/error.hpp"
#include "kslearn/experiment.hpp"
#include "kslearn/io.hpp"

using namespace kslearn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kslearn_test_io_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    out.push_back(line);
  return out;
}

std::size_t columns(const std::string& line) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

TrajectoryDataset sample_dataset(Mode mode) {
  ExperimentConfig cfg;
  cfg.mode = mode;
  cfg.kernel = mode == Mode::stochastic ? KernelSpec{2, 2.0, Epsilon{0.01}}
                                        : KernelSpec{3, 1.5, Cutoff{0.05}, 1, 0.02};
  cfg.M = 3;
  cfg.N = 5;
  cfg.T = 0.03;
  cfg.seed = 17;
  return generate_dataset(cfg, 1);
}

} // namespace

TEST_CASE("double formatting round-trips") {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<std::uint64_t> bits;
  int checked = 0;
  while (checked < 20000) {
    const std::uint64_t u = bits(rng);
    double v;
    std::memcpy(&v, &u, sizeof v);
    if (!std::isfinite(v))
      continue;
    const double back = parse_double(format_double(v));
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
    ++checked;
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(parse_double("1e-4") == 1e-4);
  CHECK_THROWS_AS(parse_double("1.0x"), IoError);
  CHECK_THROWS_AS(parse_double(""), IoError);
}

TEST_CASE("kernel and spline JSON") {
  for (const KernelSpec& k : {KernelSpec{1, 0.55, Cutoff{0.01}, 1, 0.01},
                              KernelSpec{2, 2.0, Epsilon{0.01}, 2, 0.03}}) {
    const KernelSpec back = kernel_from_json(json::parse(to_json(k).dump()));
    CHECK(back.d == k.d);
    CHECK(back.chi == k.chi);
    CHECK(back.m == k.m);
    CHECK(back.h == k.h);
    CHECK(back.reg.index() == k.reg.index());
    CHECK((k.has_cutoff() ? back.r_c() == k.r_c() : back.eps() == k.eps()));
  }
  const SplineModel m(Partition({0.0, 0.1, 0.35, 1.0}, 3), {1.0, -2.5, 1e-17, 4.0, 0.3, 7.0});
  const json j = to_json(m);
  CHECK(j.at("degree") == 3);
  CHECK(j.at("breakpoints").size() == 4);
  CHECK(j.at("coefficients").size() == 6);
  CHECK(spline_from_json(json::parse(j.dump())) == m);
  CHECK_THROWS_AS(spline_from_json(json{{"degree", 3}}), ConfigError);
  CHECK_THROWS_AS(kernel_from_json(json{{"d", 2}}), ConfigError);

  LinearSystem sys{Eigen::MatrixXd(2, 2), Eigen::VectorXd(2)};
  sys.A << 1, 2, 3, 4;
  sys.b << 5, 6;
  const json js = to_json(sys);
  CHECK(js.at("n") == 2);
  CHECK(js.at("A") == json::array({1.0, 2.0, 3.0, 4.0}));
  CHECK(js.at("b") == json::array({5.0, 6.0}));
}

TEST_CASE("dataset round trip is bit exact") {
  for (Mode mode : {Mode::deterministic, Mode::stochastic}) {
    const auto data = sample_dataset(mode);
    const fs::path dir = scratch("roundtrip");
    write_dataset(data, dir);
    CHECK(fs::exists(dir / "metadata.json"));
    CHECK(fs::exists(dir / "traj_00002.csv"));
    const TrajectoryDataset back = read_dataset(dir);
    CHECK(back == data);

    const json meta = read_json(dir / "metadata.json");
    CHECK(meta.at("format_version") == kDatasetFormatVersion);
    CHECK(meta.at("M") == 3);
    CHECK(meta.at("L") == 3);
    CHECK(meta.at("N") == 5);
    CHECK(meta.at("config").is_object());
    const DistanceRange r = pairwise_distance_range(data);
    CHECK(meta.at("a").get<double>() == r.min);
    CHECK(meta.at("b").get<double>() == r.max);

    const auto rows = lines_of(dir / "traj_00000.csv");
    REQUIRE(rows.size() == 1 + 4 * 5);
    const int d = data.d();
    CHECK(rows[0] == (d == 2 ? "l,t,i,x_1,x_2" : "l,t,i,x_1,x_2,x_3"));
    for (std::size_t q = 1; q < rows.size(); ++q)
      CHECK(columns(rows[q]) == static_cast<std::size_t>(3 + d));
    fs::remove_all(dir);
  }

  const auto data = sample_dataset(Mode::deterministic);
  TrajectoryDataset with_model = data;
  with_model.metadata.profile_model = SplineModel(Partition({0.0, 2.0}, 1), {1.0, 0.5});
  const fs::path dir = scratch("model");
  write_dataset(with_model, dir);
  CHECK(read_dataset(dir) == with_model);
  fs::remove_all(dir);
}

TEST_CASE("dataset read errors") {
  CHECK_THROWS_AS(read_dataset(scratch("missing")), IoError);

  const auto data = sample_dataset(Mode::stochastic);
  const fs::path dir = scratch("broken");
  write_dataset(data, dir);
  fs::remove(dir / "traj_00001.csv");
  CHECK_THROWS_AS(read_dataset(dir), IoError);

  write_dataset(data, dir);
  {
    auto rows = lines_of(dir / "traj_00000.csv");
    rows.pop_back();
    std::ofstream out(dir / "traj_00000.csv");
    for (const auto& r : rows)
      out << r << '\n';
  }
  CHECK_THROWS_AS(read_dataset(dir), IoError);

  write_dataset(data, dir);
  {
    std::ofstream out(dir / "metadata.json");
    out << "{ not json";
  }
  CHECK_THROWS_AS(read_dataset(dir), IoError);
  CHECK_THROWS_AS(read_json(dir / "nope.json"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("plotting CSV schemas") {
  const auto data = sample_dataset(Mode::deterministic);
  const fs::path dir = scratch("csv");
  const EmpiricalDensity rho = pairwise_density(data, 40);
  const SplineModel model(Partition({rho.a, rho.b}, 1), {1.0, 2.0});

  write_profile_csv(dir / "profile.csv", rho, [](double r) { return 3.0 * r; }, model);
  const auto prof = lines_of(dir / "profile.csv");
  REQUIRE(prof.size() == 1 + 41);
  CHECK(prof[0] == "r,truth,learned");
  CHECK(prof[1] == format_double(rho.a) + "," + format_double(3.0 * rho.a) + ",1");
  CHECK(parse_double(prof.back().substr(0, prof.back().find(','))) == rho.b);

  write_density_csv(dir / "density.csv", rho);
  const auto dens = lines_of(dir / "density.csv");
  REQUIRE(dens.size() == 1 + 40);
  CHECK(dens[0] == "bin,left,right,center,weight");
  double total = 0.0;
  for (std::size_t k = 1; k < dens.size(); ++k) {
    CHECK(columns(dens[k]) == 5);
    total += parse_double(dens[k].substr(dens[k].rfind(',') + 1));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  write_trajectories_csv(dir / "trajectories.csv", data, data);
  const auto traj = lines_of(dir / "trajectories.csv");
  CHECK(traj[0] == "m,l,t,i,source,x_1,x_2,x_3");
  CHECK(traj.size() == 1 + 2 * 3 * 4 * 5);
  CHECK(traj[1].rfind("0,0,0,0,reference,", 0) == 0);
  CHECK(traj.back().rfind("2,3,", 0) == 0);
  CHECK(traj.back().find(",reconstructed,") != std::string::npos);
  fs::remove_all(dir);
}
